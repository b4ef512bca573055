use serde::{Deserialize, Serialize};

/// Rule along the non-periodic chart axes. Periodic axes always use the
/// equispaced trapezoid rule.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum QuadratureRule {
    #[default]
    Midpoint,
    GaussLegendre,
}

impl QuadratureRule {
    pub fn tag(self) -> u8 {
        match self {
            QuadratureRule::Midpoint => 0,
            QuadratureRule::GaussLegendre => 1,
        }
    }

    pub fn from_tag(t: u8) -> Option<Self> {
        match t {
            0 => Some(QuadratureRule::Midpoint),
            1 => Some(QuadratureRule::GaussLegendre),
            _ => None,
        }
    }
}

/// One-dimensional rule on an interval. Weights double as cell widths.
#[derive(Clone, Debug)]
pub struct AxisRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

/// Gauss-Legendre nodes and weights on [−1, 1] by Newton iteration on P_n.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = nf * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

impl AxisRule {
    /// Midpoint-type rule with `n` cells on [lo, hi], node at fraction
    /// `offset` of each cell.
    pub fn offset(lo: f64, hi: f64, n: usize, offset: f64) -> Self {
        let h = (hi - lo) / n as f64;
        AxisRule {
            nodes: (0..n).map(|k| lo + (k as f64 + offset) * h).collect(),
            weights: vec![h; n],
        }
    }

    pub fn gauss_legendre(lo: f64, hi: f64, n: usize) -> Self {
        let (x, w) = gauss_legendre(n);
        let (mid, half) = (0.5 * (lo + hi), 0.5 * (hi - lo));
        AxisRule {
            nodes: x.iter().map(|t| mid + half * t).collect(),
            weights: w.iter().map(|v| half * v).collect(),
        }
    }

    pub fn new(rule: QuadratureRule, lo: f64, hi: f64, n: usize) -> Self {
        match rule {
            QuadratureRule::Midpoint => Self::offset(lo, hi, n, 0.5),
            QuadratureRule::GaussLegendre => Self::gauss_legendre(lo, hi, n),
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        for n in [1, 2, 5, 8] {
            let r = AxisRule::gauss_legendre(0.0, 2.0, n);
            for deg in 0..2 * n {
                let s: f64 = r
                    .nodes
                    .iter()
                    .zip(&r.weights)
                    .map(|(x, w)| w * x.powi(deg as i32))
                    .sum();
                let exact = 2f64.powi(deg as i32 + 1) / (deg as f64 + 1.0);
                assert_abs_diff_eq!(s, exact, epsilon = 1e-12 * exact.max(1.0));
            }
        }
    }

    #[test]
    fn midpoint_is_second_order() {
        let f = |x: f64| x.sin();
        let err = |n| {
            let r = AxisRule::offset(0.0, 1.0, n, 0.5);
            let s: f64 = r.nodes.iter().zip(&r.weights).map(|(x, w)| w * f(*x)).sum();
            (s - (1.0 - 1f64.cos())).abs()
        };
        let order = (err(8) / err(16)).log2();
        assert!((order - 2.0).abs() < 0.05);
    }
}
