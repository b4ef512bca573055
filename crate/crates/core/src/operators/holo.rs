use crate::cpoint::{CPoint2, C64};
use crate::error::{LabError, Result};
use crate::geometry::DomainSpec;

/// max_j |∂F/∂z̄ⱼ(z)| from centered differences with step `h`,
/// ∂/∂z̄ⱼ = ½(∂/∂xⱼ + i ∂/∂yⱼ). Every stencil point must be interior.
pub fn dbar_check<F>(d: &DomainSpec, f: F, z: &CPoint2, h: f64) -> Result<f64>
where
    F: Fn(&CPoint2) -> Result<C64>,
{
    if !(h > 0.0) {
        return Err(LabError::InvalidParameter(format!("step {h}")));
    }
    let base = z.to_real();
    let shifted = |k: usize, s: f64| {
        let mut x = base;
        x[k] += s;
        CPoint2::from_real(x)
    };
    let mut partial = [C64::new(0.0, 0.0); 4];
    for (k, slot) in partial.iter_mut().enumerate() {
        let (p, m) = (shifted(k, h), shifted(k, -h));
        for q in [&p, &m] {
            let rho = d.rho(q)?;
            if rho >= 0.0 {
                return Err(LabError::NotInterior { rho });
            }
        }
        *slot = (f(&p)? - f(&m)?) / (2.0 * h);
    }
    let i = C64::new(0.0, 1.0);
    let d1 = 0.5 * (partial[0] + i * partial[1]);
    let d2 = 0.5 * (partial[2] + i * partial[3]);
    Ok(d1.norm().max(d2.norm()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::make_ball;

    #[test]
    fn holomorphic_and_antiholomorphic_examples() {
        let d = make_ball();
        let z = CPoint2::real(0.2, -0.1, 0.3, 0.25);
        let hol = dbar_check(&d, |p| Ok(p.z1 * p.z2), &z, 1e-4).unwrap();
        assert!(hol <= 1e-8);
        let anti = dbar_check(&d, |p| Ok(p.z1.conj()), &z, 1e-4).unwrap();
        assert!((anti - 1.0).abs() <= 1e-8);
        let edge = CPoint2::real(0.99995, 0.0, 0.0, 0.0);
        assert!(dbar_check(&d, |p| Ok(p.z1), &edge, 1e-4).is_err());
    }
}
