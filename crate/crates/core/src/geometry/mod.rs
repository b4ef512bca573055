//! Domains in C² given by defining functions with exact derivatives.
//!
//! A domain is `{ρ < 0}`. Implementations of [`DefiningFunction`] provide the
//! value, the real gradient and the real Hessian in the coordinates
//! (x₁, y₁, x₂, y₂); every complex quantity (∂ρ, the Levi matrix
//! ∂²ρ/∂wⱼ∂w̄ₖ and the holomorphic Hessian ∂²ρ/∂wⱼ∂wₖ) is derived from those
//! by exact linear algebra, never by differencing.

mod audit;
mod catalog;
mod domains;
mod probes;

pub use audit::{derivative_audit, DerivativeAudit};
pub use catalog::{parse_domain_id, CATALOG_IDS};
pub use domains::{
    make_ball, make_ball_radius, make_ellipsoid, make_model_graph, make_worm,
    worm_sampled_half_width, ModelKind,
};
pub use probes::{clinear_convexity_probe, levi_determinant, levi_form_tangent};

use crate::cpoint::{c, CPoint2, C64};
use crate::error::{LabError, Result};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::sync::Arc;

/// Real-coordinate derivatives of a defining function.
///
/// Implementations must be pure; they are evaluated concurrently. Points for
/// which [`DefiningFunction::admits`] is false may return NaN.
pub trait DefiningFunction: Send + Sync + fmt::Debug {
    fn value(&self, p: &CPoint2) -> f64;
    fn gradient_real(&self, p: &CPoint2) -> [f64; 4];
    fn hessian_real(&self, p: &CPoint2) -> [[f64; 4]; 4];

    /// Whether the defining function is defined at `p`.
    fn admits(&self, _p: &CPoint2) -> Result<()> {
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum SmoothnessTag {
    CInfinity,
    C2,
    C11,
    /// C^{1,α}
    C1Alpha(f64),
}

impl fmt::Display for SmoothnessTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SmoothnessTag::CInfinity => write!(f, "C-infinity"),
            SmoothnessTag::C2 => write!(f, "C2"),
            SmoothnessTag::C11 => write!(f, "C11"),
            SmoothnessTag::C1Alpha(a) => write!(f, "C1-alpha({a})"),
        }
    }
}

/// Catalog identity of a domain; also selects the chart atlas.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DomainKind {
    Ball {
        radius: f64,
    },
    Ellipsoid {
        r: f64,
        q: f64,
    },
    Worm {
        beta: f64,
        mu: f64,
    },
    Model(ModelKind),
    /// Programmatic extension without a registered atlas.
    Custom,
}

/// A defining function together with its catalog metadata.
#[derive(Clone)]
pub struct DomainSpec {
    id: String,
    kind: DomainKind,
    func: Arc<dyn DefiningFunction>,
    smoothness: SmoothnessTag,
    degenerate_hints: Vec<CPoint2>,
    interior_ref: CPoint2,
    bounded: bool,
    star_shaped_at_origin: bool,
    /// Catalog claim used to gate experiments; the audit checks it numerically.
    strongly_clinear_convex: bool,
}

impl fmt::Debug for DomainSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DomainSpec")
            .field("id", &self.id)
            .field("kind", &self.kind)
            .field("smoothness", &self.smoothness)
            .finish()
    }
}

/// Gradient and complex Hessians at one point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ComplexDerivatives {
    /// (∂ρ/∂w₁, ∂ρ/∂w₂)
    pub grad: [C64; 2],
    /// `levi[j][k] = ∂²ρ/∂wⱼ∂w̄ₖ` (Hermitian)
    pub levi: [[C64; 2]; 2],
    /// `holo[j][k] = ∂²ρ/∂wⱼ∂wₖ` (symmetric)
    pub holo: [[C64; 2]; 2],
}

/// ∂ρ/∂wⱼ = ½(∂ρ/∂xⱼ − i ∂ρ/∂yⱼ).
pub fn complex_gradient(g: &[f64; 4]) -> [C64; 2] {
    [c(0.5 * g[0], -0.5 * g[1]), c(0.5 * g[2], -0.5 * g[3])]
}

/// Complex Hessians from a symmetric real Hessian. Exactly Hermitian /
/// symmetric whenever the input is exactly symmetric.
pub fn complex_hessians(h: &[[f64; 4]; 4]) -> ([[C64; 2]; 2], [[C64; 2]; 2]) {
    let mut levi = [[C64::new(0.0, 0.0); 2]; 2];
    let mut holo = [[C64::new(0.0, 0.0); 2]; 2];
    for j in 0..2 {
        for k in 0..2 {
            let (xj, yj, xk, yk) = (2 * j, 2 * j + 1, 2 * k, 2 * k + 1);
            levi[j][k] = c(
                0.25 * (h[xj][xk] + h[yj][yk]),
                0.25 * (h[xj][yk] - h[yj][xk]),
            );
            holo[j][k] = c(
                0.25 * (h[xj][xk] - h[yj][yk]),
                -0.25 * (h[xj][yk] + h[yj][xk]),
            );
        }
    }
    (levi, holo)
}

impl DomainSpec {
    /// Extension hook: wrap a user-supplied defining function. No chart atlas
    /// is registered for such domains, so they cannot be meshed.
    pub fn custom(
        id: impl Into<String>,
        func: Arc<dyn DefiningFunction>,
        smoothness: SmoothnessTag,
        interior_ref: CPoint2,
    ) -> Self {
        Self {
            id: id.into(),
            kind: DomainKind::Custom,
            func,
            smoothness,
            degenerate_hints: Vec::new(),
            interior_ref,
            bounded: true,
            star_shaped_at_origin: false,
            strongly_clinear_convex: false,
        }
    }

    #[allow(clippy::too_many_arguments)]
    pub(crate) fn from_parts(
        id: String,
        kind: DomainKind,
        func: Arc<dyn DefiningFunction>,
        smoothness: SmoothnessTag,
        degenerate_hints: Vec<CPoint2>,
        interior_ref: CPoint2,
        bounded: bool,
        star_shaped_at_origin: bool,
        strongly_clinear_convex: bool,
    ) -> Self {
        Self {
            id,
            kind,
            func,
            smoothness,
            degenerate_hints,
            interior_ref,
            bounded,
            star_shaped_at_origin,
            strongly_clinear_convex,
        }
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn kind(&self) -> DomainKind {
        self.kind
    }

    pub fn smoothness(&self) -> SmoothnessTag {
        self.smoothness
    }

    pub fn degenerate_hints(&self) -> &[CPoint2] {
        &self.degenerate_hints
    }

    pub fn interior_ref(&self) -> CPoint2 {
        self.interior_ref
    }

    pub fn is_bounded(&self) -> bool {
        self.bounded
    }

    pub fn is_star_shaped_at_origin(&self) -> bool {
        self.star_shaped_at_origin
    }

    pub fn claims_strong_clinear_convexity(&self) -> bool {
        self.strongly_clinear_convex
    }

    pub fn function(&self) -> &dyn DefiningFunction {
        self.func.as_ref()
    }

    fn check(&self, p: &CPoint2) -> Result<()> {
        if !p.is_finite() {
            return Err(LabError::InvalidParameter(format!(
                "non-finite point {p:?}"
            )));
        }
        self.func.admits(p)
    }

    pub fn rho(&self, p: &CPoint2) -> Result<f64> {
        self.check(p)?;
        Ok(self.func.value(p))
    }

    /// Unchecked value for hot loops over points already validated.
    #[inline]
    pub fn rho_unchecked(&self, p: &CPoint2) -> f64 {
        self.func.value(p)
    }

    pub fn grad(&self, p: &CPoint2) -> Result<[C64; 2]> {
        self.check(p)?;
        Ok(complex_gradient(&self.func.gradient_real(p)))
    }

    pub fn grad_real(&self, p: &CPoint2) -> Result<[f64; 4]> {
        self.check(p)?;
        Ok(self.func.gradient_real(p))
    }

    pub fn hess_mixed(&self, p: &CPoint2) -> Result<[[C64; 2]; 2]> {
        self.check(p)?;
        Ok(complex_hessians(&self.func.hessian_real(p)).0)
    }

    pub fn hess_holo(&self, p: &CPoint2) -> Result<[[C64; 2]; 2]> {
        self.check(p)?;
        Ok(complex_hessians(&self.func.hessian_real(p)).1)
    }

    pub fn derivatives(&self, p: &CPoint2) -> Result<ComplexDerivatives> {
        self.check(p)?;
        let (levi, holo) = complex_hessians(&self.func.hessian_real(p));
        Ok(ComplexDerivatives {
            grad: complex_gradient(&self.func.gradient_real(p)),
            levi,
            holo,
        })
    }

    /// |ρ| tolerance for "on bD": 1e-10·(1 + |∇ρ|).
    pub fn boundary_tolerance(&self, p: &CPoint2) -> Result<f64> {
        let g = self.grad_real(p)?;
        let norm = g.iter().map(|x| x * x).sum::<f64>().sqrt();
        Ok(1e-10 * (1.0 + norm))
    }

    pub fn is_on_boundary(&self, p: &CPoint2) -> Result<bool> {
        Ok(self.rho(p)?.abs() <= self.boundary_tolerance(p)?)
    }

    pub fn require_on_boundary(&self, p: &CPoint2) -> Result<()> {
        let rho = self.rho(p)?;
        let tol = self.boundary_tolerance(p)?;
        if rho.abs() > tol {
            return Err(LabError::NotOnBoundary { rho, tol });
        }
        Ok(())
    }
}
