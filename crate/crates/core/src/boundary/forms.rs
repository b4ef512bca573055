//! Complex-valued exterior algebra on R⁴ = C² in the real coframe
//! (dx₁, dy₁, dx₂, dy₂), enough to pull the 3-forms ∂ρ ∧ ∂̄∂ρ and
//! ∂ρ ∧ d_w(∂ρ) back to boundary tangent frames.

use crate::cpoint::{c, det3, CPoint2, C64};
use crate::geometry::ComplexDerivatives;
use std::ops::{Add, Mul};

const ZERO: C64 = C64::new(0.0, 0.0);

/// Index pairs (i < j) of the 2-form basis eᵢ ∧ eⱼ.
const PAIRS: [(usize, usize); 6] = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];

fn pair_index(i: usize, j: usize) -> usize {
    PAIRS.iter().position(|&p| p == (i, j)).expect("i < j < 4")
}

/// Triples (i < j < k) of the 3-form basis, listed by the omitted index.
const TRIPLES: [(usize, usize, usize); 4] = [(1, 2, 3), (0, 2, 3), (0, 1, 3), (0, 1, 2)];

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OneForm(pub [C64; 4]);

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TwoForm(pub [C64; 6]);

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ThreeForm(pub [C64; 4]);

impl OneForm {
    pub fn eval(&self, v: &CPoint2) -> C64 {
        let x = v.to_real();
        (0..4).map(|i| self.0[i] * x[i]).sum()
    }

    pub fn wedge(&self, b: &OneForm) -> TwoForm {
        let mut out = [ZERO; 6];
        for (n, &(i, j)) in PAIRS.iter().enumerate() {
            out[n] = self.0[i] * b.0[j] - self.0[j] * b.0[i];
        }
        TwoForm(out)
    }

    pub fn wedge2(&self, b: &TwoForm) -> ThreeForm {
        let a = &self.0;
        let mut out = [ZERO; 4];
        for (n, &(i, j, k)) in TRIPLES.iter().enumerate() {
            out[n] = a[i] * b.0[pair_index(j, k)] - a[j] * b.0[pair_index(i, k)]
                + a[k] * b.0[pair_index(i, j)];
        }
        ThreeForm(out)
    }
}

impl Add for TwoForm {
    type Output = TwoForm;
    fn add(self, o: TwoForm) -> TwoForm {
        TwoForm(std::array::from_fn(|n| self.0[n] + o.0[n]))
    }
}

impl Mul<C64> for OneForm {
    type Output = OneForm;
    fn mul(self, s: C64) -> OneForm {
        OneForm(self.0.map(|x| x * s))
    }
}

impl Add for OneForm {
    type Output = OneForm;
    fn add(self, o: OneForm) -> OneForm {
        OneForm(std::array::from_fn(|n| self.0[n] + o.0[n]))
    }
}

impl Mul<C64> for TwoForm {
    type Output = TwoForm;
    fn mul(self, s: C64) -> TwoForm {
        TwoForm(self.0.map(|x| x * s))
    }
}

impl TwoForm {
    pub const ZERO: TwoForm = TwoForm([ZERO; 6]);

    pub fn eval(&self, s: &CPoint2, t: &CPoint2) -> C64 {
        let (a, b) = (s.to_real(), t.to_real());
        PAIRS
            .iter()
            .enumerate()
            .map(|(n, &(i, j))| self.0[n] * (a[i] * b[j] - a[j] * b[i]))
            .sum()
    }
}

impl ThreeForm {
    /// Value on an ordered real frame (t₁, t₂, t₃).
    pub fn eval(&self, frame: &[CPoint2; 3]) -> C64 {
        let rows = frame.map(|t| t.to_real());
        TRIPLES
            .iter()
            .enumerate()
            .map(|(n, &(i, j, k))| {
                let m = rows.map(|r| [r[i], r[j], r[k]]);
                self.0[n] * det3(m)
            })
            .sum()
    }
}

/// dwⱼ = dxⱼ + i dyⱼ
pub fn dw(j: usize) -> OneForm {
    let mut a = [ZERO; 4];
    a[2 * j] = c(1.0, 0.0);
    a[2 * j + 1] = c(0.0, 1.0);
    OneForm(a)
}

/// dw̄ⱼ = dxⱼ − i dyⱼ
pub fn dwbar(j: usize) -> OneForm {
    let mut a = [ZERO; 4];
    a[2 * j] = c(1.0, 0.0);
    a[2 * j + 1] = c(0.0, -1.0);
    OneForm(a)
}

/// ∂ρ = Σ ρ_{wⱼ} dwⱼ
pub fn del_rho(der: &ComplexDerivatives) -> OneForm {
    dw(0) * der.grad[0] + dw(1) * der.grad[1]
}

/// ∂̄∂ρ = Σ ρ_{wⱼw̄ₖ} dw̄ₖ ∧ dwⱼ
pub fn dbar_del_rho(der: &ComplexDerivatives) -> TwoForm {
    let mut out = TwoForm::ZERO;
    for j in 0..2 {
        for k in 0..2 {
            out = out + dwbar(k).wedge(&dw(j)) * der.levi[j][k];
        }
    }
    out
}

/// ∂∂ρ = Σ ρ_{wⱼwₖ} dwₖ ∧ dwⱼ (identically zero by symmetry; kept so the
/// kernel numerator is the literal d_w of ∂ρ).
pub fn del_del_rho(der: &ComplexDerivatives) -> TwoForm {
    let mut out = TwoForm::ZERO;
    for j in 0..2 {
        for k in 0..2 {
            out = out + dw(k).wedge(&dw(j)) * der.holo[j][k];
        }
    }
    out
}

/// ∂ρ ∧ ∂̄∂ρ
pub fn leray_levi_form(der: &ComplexDerivatives) -> ThreeForm {
    del_rho(der).wedge2(&dbar_del_rho(der))
}

/// ∂ρ ∧ d_w(∂ρ)
pub fn cauchy_leray_form(der: &ComplexDerivatives) -> ThreeForm {
    del_rho(der).wedge2(&(dbar_del_rho(der) + del_del_rho(der)))
}
