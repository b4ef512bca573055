use super::{DefiningFunction, DomainKind, DomainSpec, SmoothnessTag};
use crate::cpoint::{c, CPoint2};
use crate::error::{LabError, Result};
use std::f64::consts::{FRAC_PI_2, PI};
use std::sync::Arc;

/// (|x|^r, d/dx, d²/dx²). At x = 0 the first derivative is the limit 0
/// (r > 1); the second derivative is infinite there for r < 2.
fn pow_abs(x: f64, r: f64) -> (f64, f64, f64) {
    let a = x.abs();
    if a == 0.0 {
        let d2 = if r == 2.0 {
            2.0
        } else if r > 2.0 {
            0.0
        } else {
            f64::INFINITY
        };
        return (0.0, 0.0, d2);
    }
    let v = a.powf(r);
    (v, r * v / a * x.signum(), r * (r - 1.0) * v / (a * a))
}

#[derive(Debug)]
struct Ball {
    radius: f64,
}

impl DefiningFunction for Ball {
    fn value(&self, p: &CPoint2) -> f64 {
        p.norm_sqr() - self.radius * self.radius
    }
    fn gradient_real(&self, p: &CPoint2) -> [f64; 4] {
        p.to_real().map(|x| 2.0 * x)
    }
    fn hessian_real(&self, _p: &CPoint2) -> [[f64; 4]; 4] {
        let mut h = [[0.0; 4]; 4];
        for (i, row) in h.iter_mut().enumerate() {
            row[i] = 2.0;
        }
        h
    }
}

/// |Re w₁|^r + |Im w₁|^q + |w₂|² − 1
#[derive(Debug)]
struct Ellipsoid {
    r: f64,
    q: f64,
}

impl DefiningFunction for Ellipsoid {
    fn value(&self, p: &CPoint2) -> f64 {
        pow_abs(p.z1.re, self.r).0 + pow_abs(p.z1.im, self.q).0 + p.z2.norm_sqr() - 1.0
    }
    fn gradient_real(&self, p: &CPoint2) -> [f64; 4] {
        [
            pow_abs(p.z1.re, self.r).1,
            pow_abs(p.z1.im, self.q).1,
            2.0 * p.z2.re,
            2.0 * p.z2.im,
        ]
    }
    fn hessian_real(&self, p: &CPoint2) -> [[f64; 4]; 4] {
        let mut h = [[0.0; 4]; 4];
        h[0][0] = pow_abs(p.z1.re, self.r).2;
        h[1][1] = pow_abs(p.z1.im, self.q).2;
        h[2][2] = 2.0;
        h[3][3] = 2.0;
        h
    }
}

/// Flat-bottomed bump φ(t) = μ·exp(−1/(|t|−a)²) for |t| > a, 0 otherwise,
/// returned with its first two derivatives.
pub(crate) fn worm_bump(t: f64, a: f64, mu: f64) -> (f64, f64, f64) {
    let s = t.abs() - a;
    // exp(-1/s^2) underflows to 0 long before this cutoff
    if s <= 0.02 {
        return (0.0, 0.0, 0.0);
    }
    let e = mu * (-1.0 / (s * s)).exp();
    let s3 = s * s * s;
    let d1 = e * 2.0 / s3 * t.signum();
    let d2 = e * (4.0 / (s3 * s3) - 6.0 / (s3 * s));
    (e, d1, d2)
}

/// ρ = |z₂ − i·e^{i h}|² − 1 + φ(h), h = log|z₁|².
#[derive(Debug)]
pub(crate) struct Worm {
    pub(crate) a: f64,
    pub(crate) mu: f64,
}

impl Worm {
    /// Half-width of the sampled t = log|z₁|² range. The bump is convex only
    /// for |t| − a < √(2/3); the sampled region stops before that and before
    /// φ reaches 3/4 so the z₂-circles keep a healthy radius.
    pub(crate) fn t_max(&self) -> f64 {
        let mut s_cut: f64 = 0.8;
        if self.mu > 0.75 {
            s_cut = s_cut.min(1.0 / (self.mu / 0.75).ln().sqrt());
        }
        self.a + s_cut
    }
}

impl DefiningFunction for Worm {
    fn value(&self, p: &CPoint2) -> f64 {
        let h = p.z1.norm_sqr().ln();
        let (x2, y2) = (p.z2.re, p.z2.im);
        x2 * x2 + y2 * y2 + 2.0 * x2 * h.sin() - 2.0 * y2 * h.cos()
            + worm_bump(h, self.a, self.mu).0
    }

    fn gradient_real(&self, p: &CPoint2) -> [f64; 4] {
        let (x1, y1, x2, y2) = (p.z1.re, p.z1.im, p.z2.re, p.z2.im);
        let r2 = x1 * x1 + y1 * y1;
        let h = r2.ln();
        let (sh, ch) = h.sin_cos();
        let g1 = 2.0 * x2 * ch + 2.0 * y2 * sh + worm_bump(h, self.a, self.mu).1;
        [
            g1 * 2.0 * x1 / r2,
            g1 * 2.0 * y1 / r2,
            2.0 * x2 + 2.0 * sh,
            2.0 * y2 - 2.0 * ch,
        ]
    }

    fn hessian_real(&self, p: &CPoint2) -> [[f64; 4]; 4] {
        let (x1, y1, x2, y2) = (p.z1.re, p.z1.im, p.z2.re, p.z2.im);
        let r2 = x1 * x1 + y1 * y1;
        let r4 = r2 * r2;
        let h = r2.ln();
        let (sh, ch) = h.sin_cos();
        let (_, b1, b2) = worm_bump(h, self.a, self.mu);
        let g1 = 2.0 * x2 * ch + 2.0 * y2 * sh + b1;
        let g2 = -2.0 * x2 * sh + 2.0 * y2 * ch + b2;
        let hx = 2.0 * x1 / r2;
        let hy = 2.0 * y1 / r2;
        let hxx = 2.0 * (y1 * y1 - x1 * x1) / r4;
        let hyy = 2.0 * (x1 * x1 - y1 * y1) / r4;
        let hxy = -4.0 * x1 * y1 / r4;

        let mut m = [[0.0; 4]; 4];
        m[0][0] = g2 * hx * hx + g1 * hxx;
        m[0][1] = g2 * hx * hy + g1 * hxy;
        m[1][1] = g2 * hy * hy + g1 * hyy;
        m[0][2] = 2.0 * ch * hx;
        m[0][3] = 2.0 * sh * hx;
        m[1][2] = 2.0 * ch * hy;
        m[1][3] = 2.0 * sh * hy;
        m[2][2] = 2.0;
        m[3][3] = 2.0;
        for i in 0..4 {
            for j in 0..i {
                m[i][j] = m[j][i];
            }
        }
        m
    }

    fn admits(&self, p: &CPoint2) -> Result<()> {
        if p.z1.norm_sqr() <= 1e-300 {
            return Err(LabError::OutsideDomain(
                "worm defining function is undefined at z1 = 0".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ModelKind {
    /// 2 Im z₂ > (Re z₁)²
    Parabolic,
    /// 2 Im z₂ > |Re z₁|^m
    Power(f64),
}

#[derive(Debug)]
struct ModelGraph {
    exponent: f64,
}

impl DefiningFunction for ModelGraph {
    fn value(&self, p: &CPoint2) -> f64 {
        pow_abs(p.z1.re, self.exponent).0 - 2.0 * p.z2.im
    }
    fn gradient_real(&self, p: &CPoint2) -> [f64; 4] {
        [pow_abs(p.z1.re, self.exponent).1, 0.0, 0.0, -2.0]
    }
    fn hessian_real(&self, p: &CPoint2) -> [[f64; 4]; 4] {
        let mut h = [[0.0; 4]; 4];
        h[0][0] = pow_abs(p.z1.re, self.exponent).2;
        h
    }
}

/// Half-width of the sampled range of t = log|z₁|² for a worm.
pub fn worm_sampled_half_width(beta: f64, mu_flat: f64) -> f64 {
    Worm {
        a: beta - FRAC_PI_2,
        mu: mu_flat,
    }
    .t_max()
}

pub fn make_ball() -> DomainSpec {
    make_ball_radius(1.0).expect("unit radius is valid")
}

pub fn make_ball_radius(radius: f64) -> Result<DomainSpec> {
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(LabError::InvalidParameter(format!("ball radius {radius}")));
    }
    let id = if radius == 1.0 {
        "ball".to_string()
    } else {
        format!("ball:radius={radius}")
    };
    Ok(DomainSpec::from_parts(
        id,
        DomainKind::Ball { radius },
        Arc::new(Ball { radius }),
        SmoothnessTag::CInfinity,
        Vec::new(),
        CPoint2::ZERO,
        true,
        true,
        true,
    ))
}

fn is_even_integer(x: f64) -> bool {
    x.fract() == 0.0 && (x as i64) % 2 == 0
}

pub fn make_ellipsoid(r: f64, q: f64) -> Result<DomainSpec> {
    if !(r > 1.0 && q > 1.0 && r.is_finite() && q.is_finite()) {
        return Err(LabError::InvalidParameter(format!(
            "ellipsoid exponents must exceed 1 (got r={r}, q={q})"
        )));
    }
    let smoothness = if is_even_integer(r) && is_even_integer(q) {
        SmoothnessTag::CInfinity
    } else if r >= 2.0 && q >= 2.0 {
        SmoothnessTag::C2
    } else {
        SmoothnessTag::C1Alpha(r.min(q) - 1.0)
    };
    // Strong C-linear convexity degenerates where the quartic (or
    // higher) direction is flat: the circle {w1 = 0, |w2| = 1}. C^2
    // regularity fails on the slice {Re w1 = 0} when r < 2.
    let mut hints = Vec::new();
    if q > 2.0 || r < 2.0 || r > 2.0 {
        for k in 0..8 {
            let th = 2.0 * PI * k as f64 / 8.0;
            hints.push(CPoint2::new(c(0.0, 0.0), c(th.cos(), th.sin())));
        }
    }
    if r < 2.0 {
        for y in [0.6_f64, -0.6] {
            let w2 = (1.0 - y.abs().powf(q)).sqrt();
            hints.push(CPoint2::new(c(0.0, y), c(w2, 0.0)));
        }
    }
    Ok(DomainSpec::from_parts(
        format!("ellipsoid:r={r},q={q}"),
        DomainKind::Ellipsoid { r, q },
        Arc::new(Ellipsoid { r, q }),
        smoothness,
        hints,
        CPoint2::ZERO,
        true,
        true,
        r <= 2.0 && q <= 2.0,
    ))
}

pub fn make_worm(beta: f64, mu_flat: f64) -> Result<DomainSpec> {
    if !(beta > FRAC_PI_2 && beta.is_finite()) {
        return Err(LabError::InvalidParameter(format!(
            "worm requires beta > pi/2 (got {beta})"
        )));
    }
    if !(mu_flat > 0.0 && mu_flat.is_finite()) {
        return Err(LabError::InvalidParameter(format!(
            "worm requires mu > 0 (got {mu_flat})"
        )));
    }
    let a = beta - FRAC_PI_2;
    // Weakly pseudoconvex annulus: z2 = 0 with |log|z1|^2| <= a.
    let mut hints = Vec::new();
    for t in [-a, -0.5 * a, 0.0, 0.5 * a, a] {
        for k in 0..4 {
            let alpha = FRAC_PI_2 * k as f64;
            let r = (0.5 * t).exp();
            hints.push(CPoint2::new(
                c(r * alpha.cos(), r * alpha.sin()),
                c(0.0, 0.0),
            ));
        }
    }
    Ok(DomainSpec::from_parts(
        format!("worm:beta={beta},mu={mu_flat}"),
        DomainKind::Worm { beta, mu: mu_flat },
        Arc::new(Worm { a, mu: mu_flat }),
        SmoothnessTag::CInfinity,
        hints,
        CPoint2::new(c(1.0, 0.0), c(0.0, 1.0)),
        true,
        false,
        false,
    ))
}

pub fn make_model_graph(kind: ModelKind) -> Result<DomainSpec> {
    let (exponent, id, smoothness) = match kind {
        ModelKind::Parabolic => (2.0, "model:parabolic".to_string(), SmoothnessTag::CInfinity),
        ModelKind::Power(m) => {
            if !(m > 1.0 && m < 2.0) {
                return Err(LabError::InvalidParameter(format!(
                    "power model requires 1 < m < 2 (got {m})"
                )));
            }
            (
                m,
                format!("model:power,m={m}"),
                SmoothnessTag::C1Alpha(m - 1.0),
            )
        }
    };
    Ok(DomainSpec::from_parts(
        id,
        DomainKind::Model(kind),
        Arc::new(ModelGraph { exponent }),
        smoothness,
        vec![CPoint2::ZERO],
        CPoint2::new(c(0.0, 0.0), c(0.0, 1.0)),
        false,
        false,
        false,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn ball_examples() {
        let d = make_ball();
        assert_eq!(d.rho(&CPoint2::ZERO).unwrap(), -1.0);
        let g = d.grad(&CPoint2::real(1.0, 0.0, 0.0, 0.0)).unwrap();
        assert_eq!(g, [c(1.0, 0.0), c(0.0, 0.0)]);
        let p = CPoint2::real(0.3, -0.2, 0.1, 0.7);
        let h = d.hess_mixed(&p).unwrap();
        assert_eq!(h, [[c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(1.0, 0.0)]]);
        assert!(d.degenerate_hints().is_empty());
        assert_eq!(d.smoothness(), SmoothnessTag::CInfinity);
    }

    #[test]
    fn ellipsoid_examples() {
        let d24 = make_ellipsoid(2.0, 4.0).unwrap();
        for t in [-1.3, -0.4, 0.0, 0.9] {
            let v = d24.rho(&CPoint2::real(0.0, t, 0.0, 0.0)).unwrap();
            assert_abs_diff_eq!(v, t.powi(4) - 1.0, epsilon = 1e-14);
        }
        let g = d24.grad(&CPoint2::real(1.0, 0.0, 0.0, 0.0)).unwrap();
        assert_abs_diff_eq!(g[0].re, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(g[0].im, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(g[1].norm(), 0.0, epsilon = 1e-15);
        assert_eq!(d24.smoothness(), SmoothnessTag::CInfinity);

        let d15 = make_ellipsoid(1.5, 2.0).unwrap();
        assert_eq!(d15.rho(&CPoint2::real(1.0, 0.0, 0.0, 0.0)).unwrap(), 0.0);
        assert_eq!(d15.smoothness(), SmoothnessTag::C1Alpha(0.5));
        // limit gradient on the axis Re w1 = 0
        let g = d15.grad(&CPoint2::real(0.0, 0.5, 0.5, 0.0)).unwrap();
        assert_eq!(g[0].re, 0.0);
        assert!(d15
            .degenerate_hints()
            .iter()
            .all(|h| h.z1.re == 0.0 && d15.is_on_boundary(h).unwrap()));
        assert!(d24
            .degenerate_hints()
            .iter()
            .all(|h| d24.is_on_boundary(h).unwrap()));
    }

    #[test]
    fn ellipsoid_rejects_exponents_at_most_one() {
        assert!(make_ellipsoid(1.0, 2.0).is_err());
        assert!(make_ellipsoid(2.0, 0.5).is_err());
    }

    #[test]
    fn worm_examples() {
        let d = make_worm(2.2, 1.0).unwrap();
        // h(1) = 0, k = 0 -> (1, 0) is a boundary point
        assert_abs_diff_eq!(
            d.rho(&CPoint2::real(1.0, 0.0, 0.0, 0.0)).unwrap(),
            0.0,
            epsilon = 1e-15
        );
        let a = 2.2 - FRAC_PI_2;
        for t in [-a, -0.3, 0.0, 0.2, a] {
            assert_eq!(worm_bump(t, a, 1.0).0, 0.0);
        }
        assert!(worm_bump(a + 0.5, a, 1.0).0 > 0.0);
        assert!(d.rho(&CPoint2::real(0.0, 0.0, 0.0, 0.0)).is_err());
        assert!(make_worm(1.5, 1.0).is_err());
        assert!(d
            .degenerate_hints()
            .iter()
            .all(|h| d.is_on_boundary(h).unwrap()));
        assert!(d.rho(&d.interior_ref()).unwrap() < 0.0);
    }

    #[test]
    fn model_examples() {
        let par = make_model_graph(ModelKind::Parabolic).unwrap();
        assert_eq!(par.rho(&CPoint2::real(1.0, 0.0, 0.0, 0.5)).unwrap(), 0.0);
        let g = par.grad(&CPoint2::real(0.3, 0.1, 0.2, 0.4)).unwrap();
        assert_eq!(g[1], c(0.0, 1.0));
        let pw = make_model_graph(ModelKind::Power(1.5)).unwrap();
        assert_eq!(pw.rho(&CPoint2::real(0.0, 0.0, 0.0, 1.0)).unwrap(), -2.0);
        assert!(make_model_graph(ModelKind::Power(2.0)).is_err());
        assert!(make_model_graph(ModelKind::Power(1.0)).is_err());
        assert!(!pw.is_bounded());
    }
}
