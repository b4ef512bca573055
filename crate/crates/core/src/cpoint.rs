//! Points and vectors of C², with the identification C² ≅ R⁴ given by
//! (x₁, y₁, x₂, y₂), wⱼ = xⱼ + i yⱼ.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::ops::{Add, Mul, Neg, Sub};

pub type C64 = Complex64;

pub const I: C64 = C64::new(0.0, 1.0);

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// A point (or tangent vector) of C².
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CPoint2 {
    pub z1: C64,
    pub z2: C64,
}

impl CPoint2 {
    pub const ZERO: CPoint2 = CPoint2 {
        z1: C64::new(0.0, 0.0),
        z2: C64::new(0.0, 0.0),
    };

    pub fn new(z1: C64, z2: C64) -> Self {
        Self { z1, z2 }
    }

    pub fn real(x1: f64, y1: f64, x2: f64, y2: f64) -> Self {
        Self::new(c(x1, y1), c(x2, y2))
    }

    pub fn from_real(v: [f64; 4]) -> Self {
        Self::real(v[0], v[1], v[2], v[3])
    }

    pub fn to_real(&self) -> [f64; 4] {
        [self.z1.re, self.z1.im, self.z2.re, self.z2.im]
    }

    pub fn get(&self, j: usize) -> C64 {
        match j {
            0 => self.z1,
            1 => self.z2,
            _ => panic!("CPoint2 index {j} out of range"),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.to_real().iter().all(|x| x.is_finite())
    }

    pub fn norm_sqr(&self) -> f64 {
        self.z1.norm_sqr() + self.z2.norm_sqr()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn dist(&self, other: &CPoint2) -> f64 {
        (*self - *other).norm()
    }

    /// Hermitian product ⟨a, b⟩ = a₁ b̄₁ + a₂ b̄₂.
    pub fn herm(&self, other: &CPoint2) -> C64 {
        self.z1 * other.z1.conj() + self.z2 * other.z2.conj()
    }

    /// Bilinear pairing Σ aⱼ bⱼ (no conjugation).
    pub fn pair(a: &[C64; 2], v: &CPoint2) -> C64 {
        a[0] * v.z1 + a[1] * v.z2
    }

    /// Real inner product in R⁴.
    pub fn dot_real(&self, other: &CPoint2) -> f64 {
        self.herm(other).re
    }

    pub fn scale_c(&self, s: C64) -> CPoint2 {
        CPoint2::new(self.z1 * s, self.z2 * s)
    }

    pub fn conj(&self) -> CPoint2 {
        CPoint2::new(self.z1.conj(), self.z2.conj())
    }
}

impl Add for CPoint2 {
    type Output = CPoint2;
    fn add(self, o: CPoint2) -> CPoint2 {
        CPoint2::new(self.z1 + o.z1, self.z2 + o.z2)
    }
}

impl Sub for CPoint2 {
    type Output = CPoint2;
    fn sub(self, o: CPoint2) -> CPoint2 {
        CPoint2::new(self.z1 - o.z1, self.z2 - o.z2)
    }
}

impl Neg for CPoint2 {
    type Output = CPoint2;
    fn neg(self) -> CPoint2 {
        CPoint2::new(-self.z1, -self.z2)
    }
}

impl Mul<f64> for CPoint2 {
    type Output = CPoint2;
    fn mul(self, s: f64) -> CPoint2 {
        CPoint2::new(self.z1 * s, self.z2 * s)
    }
}

impl Mul<CPoint2> for f64 {
    type Output = CPoint2;
    fn mul(self, p: CPoint2) -> CPoint2 {
        p * self
    }
}

/// Determinant of a real 3×3 matrix given by rows.
pub fn det3(m: [[f64; 3]; 3]) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

/// Determinant of a real 4×4 matrix given by rows (cofactor expansion).
pub fn det4(m: [[f64; 4]; 4]) -> f64 {
    let mut total = 0.0;
    for col in 0..4 {
        let mut minor = [[0.0; 3]; 3];
        for r in 1..4 {
            let mut k = 0;
            for cc in 0..4 {
                if cc != col {
                    minor[r - 1][k] = m[r][cc];
                    k += 1;
                }
            }
        }
        let sign = if col % 2 == 0 { 1.0 } else { -1.0 };
        total += sign * m[0][col] * det3(minor);
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn real_roundtrip_and_hermitian_product() {
        let p = CPoint2::real(1.0, 2.0, -3.0, 0.5);
        assert_eq!(CPoint2::from_real(p.to_real()), p);
        assert!((p.herm(&p).re - p.norm_sqr()).abs() < 1e-15);
        assert_eq!(p.herm(&p).im, 0.0);
    }

    #[test]
    fn det4_of_permutation_and_diagonal() {
        let d = [
            [2.0, 0.0, 0.0, 0.0],
            [0.0, 3.0, 0.0, 0.0],
            [0.0, 0.0, 5.0, 0.0],
            [0.0, 0.0, 0.0, 7.0],
        ];
        assert_eq!(det4(d), 210.0);
        let swap = [
            [0.0, 1.0, 0.0, 0.0],
            [1.0, 0.0, 0.0, 0.0],
            [0.0, 0.0, 1.0, 0.0],
            [0.0, 0.0, 0.0, 1.0],
        ];
        assert_eq!(det4(swap), -1.0);
    }
}
