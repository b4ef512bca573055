use crate::boundary::BoundaryMesh;
use crate::cpoint::{CPoint2, C64};
use crate::error::{LabError, Result};
use crate::geometry::DomainSpec;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// |denominator| below which a kernel is refused as on-diagonal.
pub const DIAGONAL_CUTOFF: f64 = 1e-14;

/// ⟨∂ρ(w), w − z⟩ = Σ ∂ρ/∂wⱼ(w)·(wⱼ − zⱼ) from a precomputed gradient.
pub fn cl_denominator_from_grad(grad: &[C64; 2], z: &CPoint2, w: &CPoint2) -> C64 {
    CPoint2::pair(grad, &(*w - *z))
}

pub fn cl_denominator(d: &DomainSpec, z: &CPoint2, w: &CPoint2) -> Result<C64> {
    Ok(cl_denominator_from_grad(&d.grad(w)?, z, w))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KernelKind {
    CauchyLeray,
    BochnerMartinelli,
}

impl KernelKind {
    /// Quadrature contribution K(z, wᵢ)·(node weight) of mesh node `i`.
    ///
    /// For Cauchy-Leray the weight is the oriented pull-back of
    /// (2πi)^{-2} ∂ρ ∧ d_w∂ρ, so no separate measure enters; Bochner-Martinelli
    /// is integrated against Σ.
    #[inline]
    pub fn weighted(self, mesh: &BoundaryMesh, i: usize, z: &CPoint2) -> Result<C64> {
        match self {
            KernelKind::CauchyLeray => {
                let den = cl_denominator_from_grad(&mesh.gradients[i], z, &mesh.nodes[i]);
                if den.norm() < DIAGONAL_CUTOFF {
                    return Err(LabError::NearDiagonal {
                        denominator: den.norm(),
                    });
                }
                Ok(mesh.cl_weights[i] / (den * den))
            }
            KernelKind::BochnerMartinelli => {
                Ok(bm_kernel(z, &mesh.nodes[i], &mesh.normals[i])? * mesh.sigma_weights[i])
            }
        }
    }
}

/// Cauchy-Leray kernel per unit chart parameter volume at node `i`:
/// (2πi)^{-2}·j*(∂ρ ∧ d_w∂ρ)(frame) / ⟨∂ρ(w), w − z⟩².
pub fn cl_kernel(mesh: &BoundaryMesh, i: usize, z: &CPoint2) -> Result<C64> {
    Ok(KernelKind::CauchyLeray.weighted(mesh, i, z)? / mesh.param_weights[i])
}

/// Bochner-Martinelli kernel against Σ:
/// (1/2π²)·Σⱼ conj(wⱼ − zⱼ)·νⱼ / |w − z|⁴ with ν the complex unit normal.
pub fn bm_kernel(z: &CPoint2, w: &CPoint2, normal: &[f64; 4]) -> Result<C64> {
    let diff = *w - *z;
    let r2 = diff.norm_sqr();
    if r2.sqrt() < DIAGONAL_CUTOFF {
        return Err(LabError::NearDiagonal { denominator: r2 });
    }
    let nu = CPoint2::from_real(*normal);
    let num = diff.z1.conj() * nu.z1 + diff.z2.conj() * nu.z2;
    Ok(num / (2.0 * PI * PI * r2 * r2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cpoint::c;
    use crate::geometry::make_ball;

    #[test]
    fn ball_denominator_closed_form() {
        let d = make_ball();
        let w = CPoint2::new(c(0.6, 0.0), c(0.0, 0.8));
        let z = CPoint2::new(c(0.1, 0.2), c(-0.3, 0.05));
        let den = cl_denominator(&d, &z, &w).unwrap();
        let expected = C64::new(1.0, 0.0) - z.herm(&w);
        assert!((den - expected).norm() < 1e-15);
        assert_eq!(cl_denominator(&d, &w, &w).unwrap(), C64::new(0.0, 0.0));
    }
}
