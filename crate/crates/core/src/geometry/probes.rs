use super::DomainSpec;
use crate::cpoint::{CPoint2, C64};
use crate::error::{LabError, Result};

/// |⟨∂ρ(w), w − z⟩| / |w − z|² for boundary points w ≠ z.
///
/// Bounded away from zero over all pairs exactly when the domain is strongly
/// C-linearly convex.
pub fn clinear_convexity_probe(d: &DomainSpec, w: &CPoint2, z: &CPoint2) -> Result<f64> {
    d.require_on_boundary(w)?;
    d.require_on_boundary(z)?;
    let diff = *w - *z;
    let dist2 = diff.norm_sqr();
    if dist2 == 0.0 {
        return Err(LabError::CoincidentPoints);
    }
    let g = d.grad(w)?;
    Ok(CPoint2::pair(&g, &diff).norm() / dist2)
}

/// Levi form L(v, v) = Σ ∂²ρ/∂wⱼ∂w̄ₖ vⱼ v̄ₖ on the complex tangent vector
/// v = (∂ρ/∂w₂, −∂ρ/∂w₁).
pub fn levi_form_tangent(d: &DomainSpec, w: &CPoint2) -> Result<f64> {
    let der = d.derivatives(w)?;
    let v = [der.grad[1], -der.grad[0]];
    let mut s = C64::new(0.0, 0.0);
    for j in 0..2 {
        for k in 0..2 {
            s += der.levi[j][k] * v[j] * v[k].conj();
        }
    }
    Ok(s.re)
}

/// Levi determinant φ(w) = L(v, v)/|∂ρ| on the complex tangent line.
///
/// With this normalization the Leray-Levi measure satisfies
/// dλ = |φ| dΣ / (8π⁴) exactly; φ ≡ 1 on the unit sphere.
pub fn levi_determinant(d: &DomainSpec, w: &CPoint2) -> Result<f64> {
    d.require_on_boundary(w)?;
    let g = d.grad(w)?;
    let norm = (g[0].norm_sqr() + g[1].norm_sqr()).sqrt();
    Ok(levi_form_tangent(d, w)? / norm)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cpoint::c;
    use crate::geometry::{make_ball, make_ellipsoid, make_worm};
    use approx::assert_abs_diff_eq;

    #[test]
    fn ball_probe_closed_form() {
        let d = make_ball();
        let w = CPoint2::real(1.0, 0.0, 0.0, 0.0);
        let z = CPoint2::real(0.0, 0.0, 1.0, 0.0);
        assert_abs_diff_eq!(
            clinear_convexity_probe(&d, &w, &z).unwrap(),
            0.5,
            epsilon = 1e-15
        );
        assert!(matches!(
            clinear_convexity_probe(&d, &w, &w),
            Err(LabError::CoincidentPoints)
        ));
        assert!(clinear_convexity_probe(&d, &CPoint2::ZERO, &z).is_err());
    }

    #[test]
    fn ball_probe_tends_to_half_along_real_tangent() {
        let d = make_ball();
        let w = CPoint2::real(1.0, 0.0, 0.0, 0.0);
        for eps in [1e-2_f64, 1e-3, 1e-4] {
            let z = CPoint2::new(c((1.0 - eps * eps).sqrt(), 0.0), c(eps, 0.0));
            let q = clinear_convexity_probe(&d, &w, &z).unwrap();
            assert_abs_diff_eq!(q, 0.5, epsilon = 1e-4);
        }
    }

    #[test]
    fn ball_probe_is_unbounded_along_complex_normal() {
        let d = make_ball();
        let w = CPoint2::real(1.0, 0.0, 0.0, 0.0);
        let th: f64 = 1e-3;
        let z = CPoint2::new(c(th.cos(), th.sin()), c(0.0, 0.0));
        let q = clinear_convexity_probe(&d, &w, &z).unwrap();
        assert_abs_diff_eq!(q, 1.0 / (2.0 * (0.5 * th).sin()), epsilon = 1e-6);
    }

    #[test]
    fn d24_probe_vanishes_at_degenerate_circle() {
        let d = make_ellipsoid(2.0, 4.0).unwrap();
        let w = CPoint2::real(0.0, 0.0, 1.0, 0.0);
        let mut last = f64::INFINITY;
        for y in [1e-1, 1e-2, 1e-3] {
            let z = CPoint2::new(c(0.0, y), c((1.0 - y.powi(4)).sqrt(), 0.0));
            let q = clinear_convexity_probe(&d, &w, &z).unwrap();
            assert!(q < last);
            last = q;
        }
        assert!(last < 1e-5);
    }

    #[test]
    fn levi_determinant_examples() {
        let ball = make_ball();
        for p in [
            CPoint2::real(1.0, 0.0, 0.0, 0.0),
            CPoint2::real(0.5, -0.5, 0.5, 0.5),
        ] {
            assert_abs_diff_eq!(levi_determinant(&ball, &p).unwrap(), 1.0, epsilon = 1e-14);
        }
        let d24 = make_ellipsoid(2.0, 4.0).unwrap();
        assert_abs_diff_eq!(
            levi_determinant(&d24, &CPoint2::real(1.0, 0.0, 0.0, 0.0)).unwrap(),
            1.0,
            epsilon = 1e-14
        );
        let worm = make_worm(2.2, 1.0).unwrap();
        for h in worm.degenerate_hints() {
            assert!(levi_determinant(&worm, h).unwrap().abs() < 1e-12);
        }
    }
}
