use super::{complex_gradient, complex_hessians, DomainSpec};
use crate::cpoint::{CPoint2, C64};
use crate::error::{LabError, Result};
use crate::exec::Exec;
use serde::Serialize;

/// Analytic-vs-finite-difference comparison over a point set.
///
/// Errors are maxima over points and components. When the coarse-step error is
/// already at the rounding floor (polynomial ρ, for which centered differences
/// are exact) the empirical order is meaningless and the check passes on
/// magnitude instead.
#[derive(Clone, Debug, Serialize)]
pub struct DerivativeAudit {
    pub domain: String,
    pub points: usize,
    pub steps: [f64; 2],
    pub grad_errors: [f64; 2],
    pub hess_mixed_errors: [f64; 2],
    pub hess_holo_errors: [f64; 2],
    pub grad_order: f64,
    pub hess_order: f64,
    pub grad_at_floor: bool,
    pub hess_at_floor: bool,
    pub grad_pass: bool,
    pub hess_pass: bool,
}

pub const GRAD_ORDER_MIN: f64 = 1.8;
pub const HESS_ORDER_MIN: f64 = 0.8;
const GRAD_FLOOR: f64 = 1e-10;
const HESS_FLOOR: f64 = 1e-8;

fn shifted(p: &CPoint2, moves: &[(usize, f64)]) -> CPoint2 {
    let mut x = p.to_real();
    for &(i, s) in moves {
        x[i] += s;
    }
    CPoint2::from_real(x)
}

fn max_c(a: &[C64], b: &[C64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// (gradient error, mixed Hessian error, holomorphic Hessian error) at one
/// point for step h.
fn errors_at(d: &DomainSpec, p: &CPoint2, h: f64) -> Result<[f64; 3]> {
    let f = |q: CPoint2| d.rho(&q);
    let r0 = f(*p)?;
    let mut g = [0.0; 4];
    let mut hess = [[0.0; 4]; 4];
    for i in 0..4 {
        let fp = f(shifted(p, &[(i, h)]))?;
        let fm = f(shifted(p, &[(i, -h)]))?;
        g[i] = (fp - fm) / (2.0 * h);
        hess[i][i] = (fp - 2.0 * r0 + fm) / (h * h);
        for j in 0..i {
            let v = (f(shifted(p, &[(i, h), (j, h)]))?
                - f(shifted(p, &[(i, h), (j, -h)]))?
                - f(shifted(p, &[(i, -h), (j, h)]))?
                + f(shifted(p, &[(i, -h), (j, -h)]))?)
                / (4.0 * h * h);
            hess[i][j] = v;
            hess[j][i] = v;
        }
    }
    let der = d.derivatives(p)?;
    let fd_grad = complex_gradient(&g);
    let (fd_levi, fd_holo) = complex_hessians(&hess);
    let flat = |m: [[C64; 2]; 2]| [m[0][0], m[0][1], m[1][0], m[1][1]];
    Ok([
        max_c(&der.grad, &fd_grad),
        max_c(&flat(der.levi), &flat(fd_levi)),
        max_c(&flat(der.holo), &flat(fd_holo)),
    ])
}

fn order(coarse: f64, fine: f64, ratio: f64) -> f64 {
    if fine <= 0.0 {
        return f64::INFINITY;
    }
    (coarse / fine).ln() / ratio.ln()
}

/// Runs the audit at the steps `h = steps[0] > steps[1]`.
pub fn derivative_audit(
    d: &DomainSpec,
    points: &[CPoint2],
    steps: [f64; 2],
    exec: Exec,
) -> Result<DerivativeAudit> {
    if points.is_empty() {
        return Err(LabError::EmptyMask);
    }
    if !(steps[0] > steps[1] && steps[1] > 0.0) {
        return Err(LabError::InvalidParameter(format!("audit steps {steps:?}")));
    }
    let per_point = exec.try_map(points.len(), |i| {
        Ok::<_, LabError>([
            errors_at(d, &points[i], steps[0])?,
            errors_at(d, &points[i], steps[1])?,
        ])
    })?;
    let mut e = [[0.0f64; 3]; 2];
    for pe in &per_point {
        for s in 0..2 {
            for k in 0..3 {
                e[s][k] = e[s][k].max(pe[s][k]);
            }
        }
    }
    let ratio = steps[0] / steps[1];
    let grad_order = order(e[0][0], e[1][0], ratio);
    let hess_order = order(e[0][1], e[1][1], ratio).min(order(e[0][2], e[1][2], ratio));
    let grad_at_floor = e[0][0] <= GRAD_FLOOR;
    let hess_at_floor = e[0][1].max(e[0][2]) <= HESS_FLOOR;
    Ok(DerivativeAudit {
        domain: d.id().to_string(),
        points: points.len(),
        steps,
        grad_errors: [e[0][0], e[1][0]],
        hess_mixed_errors: [e[0][1], e[1][1]],
        hess_holo_errors: [e[0][2], e[1][2]],
        grad_order,
        hess_order,
        grad_at_floor,
        hess_at_floor,
        grad_pass: grad_at_floor || grad_order >= GRAD_ORDER_MIN,
        hess_pass: hess_at_floor || hess_order >= HESS_ORDER_MIN,
    })
}
