use super::function::BoundaryFunction;
use super::matrix::{MeasureTag, OperatorMatrix};
use crate::boundary::BoundaryMesh;
use crate::cpoint::C64;
use crate::error::{LabError, Result};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

/// A linear map given by its action and the action of its conjugate
/// transpose (plain Euclidean, no weights).
pub trait LinOp: Sync {
    fn rows(&self) -> usize;
    fn cols(&self) -> usize;
    fn apply(&self, x: &[C64]) -> Vec<C64>;
    fn apply_h(&self, y: &[C64]) -> Vec<C64>;
}

impl LinOp for DMatrix<C64> {
    fn rows(&self) -> usize {
        self.nrows()
    }
    fn cols(&self) -> usize {
        self.ncols()
    }
    fn apply(&self, x: &[C64]) -> Vec<C64> {
        (self * DVector::from_column_slice(x)).as_slice().to_vec()
    }
    fn apply_h(&self, y: &[C64]) -> Vec<C64> {
        self.ad_mul(&DVector::from_column_slice(y))
            .as_slice()
            .to_vec()
    }
}

/// Operator defined by closures.
pub struct FnOp<F, G> {
    pub rows: usize,
    pub cols: usize,
    pub f: F,
    pub fh: G,
}

impl<F, G> LinOp for FnOp<F, G>
where
    F: Fn(&[C64]) -> Vec<C64> + Sync,
    G: Fn(&[C64]) -> Vec<C64> + Sync,
{
    fn rows(&self) -> usize {
        self.rows
    }
    fn cols(&self) -> usize {
        self.cols
    }
    fn apply(&self, x: &[C64]) -> Vec<C64> {
        (self.f)(x)
    }
    fn apply_h(&self, y: &[C64]) -> Vec<C64> {
        (self.fh)(y)
    }
}

fn norm2(x: &[C64]) -> f64 {
    x.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
}

fn random_vector(n: usize, rng: &mut ChaCha8Rng) -> Vec<C64> {
    (0..n)
        .map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect()
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct NormEstimate {
    /// ‖B x‖/‖x‖ for the final iterate: a certified lower bound.
    pub lower: f64,
    /// Certified upper bound √(‖B‖₁‖B‖_∞) when the matrix is explicit.
    pub upper: Option<f64>,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Clone, Copy, Debug)]
pub struct PowerOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub seed: u64,
}

impl Default for PowerOptions {
    fn default() -> Self {
        Self {
            tol: 1e-9,
            max_iter: 500,
            seed: 0x5eed,
        }
    }
}

/// Largest singular value by power iteration on BᴴB.
pub fn spectral_norm(op: &dyn LinOp, opts: PowerOptions) -> NormEstimate {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut x = random_vector(op.cols(), &mut rng);
    let nx = norm2(&x);
    x.iter_mut().for_each(|v| *v /= nx);
    let mut sigma = 0.0;
    let mut best: f64 = 0.0;
    for it in 1..=opts.max_iter {
        let y = op.apply(&x);
        let s = norm2(&y);
        best = best.max(s);
        if s == 0.0 {
            return NormEstimate {
                lower: 0.0,
                upper: None,
                iterations: it,
                converged: true,
            };
        }
        let z = op.apply_h(&y);
        let nz = norm2(&z);
        if (s - sigma).abs() <= opts.tol * s {
            return NormEstimate {
                lower: best,
                upper: None,
                iterations: it,
                converged: true,
            };
        }
        sigma = s;
        x = z.into_iter().map(|v| v / nz).collect();
    }
    NormEstimate {
        lower: best,
        upper: None,
        iterations: opts.max_iter,
        converged: false,
    }
}

/// Like [`spectral_norm`] but fails when the iteration cap is reached.
pub fn spectral_norm_strict(op: &dyn LinOp, opts: PowerOptions) -> Result<NormEstimate> {
    let e = spectral_norm(op, opts);
    if !e.converged {
        return Err(LabError::NonConvergence {
            iterations: e.iterations,
            estimate: e.lower,
        });
    }
    Ok(e)
}

fn mask_indices(mask: Option<&[bool]>, n: usize) -> Result<Vec<usize>> {
    let idx: Vec<usize> = match mask {
        Some(m) => {
            if m.len() != n {
                return Err(LabError::DimensionMismatch {
                    expected: n,
                    got: m.len(),
                });
            }
            (0..n).filter(|&i| m[i]).collect()
        }
        None => (0..n).collect(),
    };
    if idx.is_empty() {
        return Err(LabError::EmptyMask);
    }
    Ok(idx)
}

/// W_out^{1/p} M[out, in] W_in^{-1/p}: the matrix whose ℓᵖ norm equals the
/// Lᵖ(μ) norm of the masked operator.
pub fn weighted_submatrix(
    m: &OperatorMatrix,
    p: f64,
    input: Option<&[bool]>,
    output: Option<&[bool]>,
) -> Result<DMatrix<C64>> {
    let n = m.dim();
    let ins = mask_indices(input, n)?;
    let outs = mask_indices(output, n)?;
    let w = &m.weights;
    if let Some(&j) = ins.iter().find(|&&j| !(w[j] > 0.0)) {
        return Err(LabError::InvalidParameter(format!(
            "input node {j} has zero weight"
        )));
    }
    Ok(DMatrix::from_fn(outs.len(), ins.len(), |a, b| {
        let (i, j) = (outs[a], ins[b]);
        m.matrix[(i, j)] * (w[i].powf(1.0 / p) / w[j].powf(1.0 / p))
    }))
}

/// Spectral norm of M in L²(μ) (μ from the tag), with optional masks.
pub fn spectral_norm_weighted(
    m: &OperatorMatrix,
    input: Option<&[bool]>,
    output: Option<&[bool]>,
    opts: PowerOptions,
) -> Result<NormEstimate> {
    let b = weighted_submatrix(m, 2.0, input, output)?;
    let mut e = spectral_norm(&b, opts);
    let one = (0..b.ncols())
        .map(|j| b.column(j).iter().map(|v| v.norm()).sum::<f64>())
        .fold(0.0, f64::max);
    let inf = (0..b.nrows())
        .map(|i| b.row(i).iter().map(|v| v.norm()).sum::<f64>())
        .fold(0.0, f64::max);
    e.upper = Some((one * inf).sqrt());
    Ok(e)
}

/// (Σ_{mask} |f|ᵖ·w)^{1/p}
pub fn lp_norm_weighted(
    values: &[C64],
    weights: &[f64],
    p: f64,
    mask: Option<&[bool]>,
) -> Result<f64> {
    if !(p >= 1.0) || !p.is_finite() {
        return Err(LabError::InvalidParameter(format!("p = {p}")));
    }
    if weights.len() != values.len() {
        return Err(LabError::DimensionMismatch {
            expected: values.len(),
            got: weights.len(),
        });
    }
    let idx = mask_indices(mask, values.len())?;
    let s: f64 = idx
        .iter()
        .map(|&i| values[i].norm().powf(p) * weights[i])
        .sum();
    Ok(s.powf(1.0 / p))
}

pub fn lp_norm(
    f: &BoundaryFunction,
    mesh: &BoundaryMesh,
    p: f64,
    tag: MeasureTag,
    mask: Option<&[bool]>,
) -> Result<f64> {
    lp_norm_weighted(&f.values, tag.weights(mesh), p, mask)
}

#[derive(Clone, Debug)]
pub struct CandidateOptions {
    /// Named starting functions on the input nodes (full length; values off
    /// the input mask are ignored).
    pub candidates: Vec<(String, Vec<C64>)>,
    pub random_fields: usize,
    pub ascent_steps: usize,
    pub seed: u64,
    pub power: PowerOptions,
}

impl Default for CandidateOptions {
    fn default() -> Self {
        Self {
            candidates: Vec::new(),
            random_fields: 4,
            ascent_steps: 30,
            seed: 0x0b0e,
            power: PowerOptions::default(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct OpNormBound {
    pub p: f64,
    /// Certified lower bound on ‖M‖_{Lᵖ(in) → Lᵖ(out)}.
    pub lower: f64,
    /// Upper bound, available for p = 2 only.
    pub upper: Option<f64>,
    /// Name of the candidate that attained the bound.
    pub attained_by: String,
    pub evaluations: usize,
}

fn lp(x: &[C64], p: f64) -> f64 {
    x.iter()
        .map(|v| v.norm().powf(p))
        .sum::<f64>()
        .powf(1.0 / p)
}

/// ψ(y) = y·|y|^{r−2}
fn duality_map(y: &[C64], r: f64) -> Vec<C64> {
    y.iter()
        .map(|v| {
            let a = v.norm();
            if a == 0.0 {
                C64::new(0.0, 0.0)
            } else {
                v * a.powf(r - 2.0)
            }
        })
        .collect()
}

/// Lower bound on the Lᵖ operator norm of `B` (already weighted, acting
/// ℓᵖ → ℓᵖ) by evaluating the ratio on candidates and refining each with
/// Boyd's nonlinear power iteration.
pub fn opnorm_p_weighted(
    b: &dyn LinOp,
    p: f64,
    starts: Vec<(String, Vec<C64>)>,
    ascent_steps: usize,
) -> Result<OpNormBound> {
    if !(p > 1.0) || !p.is_finite() {
        return Err(LabError::InvalidParameter(format!(
            "candidate route needs 1 < p < inf (p = {p})"
        )));
    }
    let q = p / (p - 1.0);
    let mut best = (0.0, String::from("none"));
    let mut evaluations = 0;
    for (name, x0) in starts {
        let mut x = x0;
        for step in 0..=ascent_steps {
            let nx = lp(&x, p);
            if !(nx > 0.0) || !nx.is_finite() {
                break;
            }
            let y = b.apply(&x);
            let ratio = lp(&y, p) / nx;
            evaluations += 1;
            if ratio > best.0 {
                best = (
                    ratio,
                    if step == 0 {
                        name.clone()
                    } else {
                        format!("{name}+ascent{step}")
                    },
                );
            }
            if step == ascent_steps {
                break;
            }
            let z = b.apply_h(&duality_map(&y, p));
            x = duality_map(&z, q);
        }
    }
    Ok(OpNormBound {
        p,
        lower: best.0,
        upper: None,
        attained_by: best.1,
        evaluations,
    })
}

/// Masked Lᵖ operator norm of M. p = 2 uses power iteration (two-sided);
/// other p return a lower bound from candidate maximization.
pub fn opnorm_p(
    m: &OperatorMatrix,
    p: f64,
    input: Option<&[bool]>,
    output: Option<&[bool]>,
    opts: &CandidateOptions,
) -> Result<OpNormBound> {
    if p == 2.0 {
        let e = spectral_norm_weighted(m, input, output, opts.power)?;
        return Ok(OpNormBound {
            p,
            lower: e.lower,
            upper: e.upper,
            attained_by: "power-iteration".into(),
            evaluations: e.iterations,
        });
    }
    let b = weighted_submatrix(m, p, input, output)?;
    let ins = mask_indices(input, m.dim())?;
    let mut starts: Vec<(String, Vec<C64>)> = opts
        .candidates
        .iter()
        .map(|(name, f)| {
            let g = ins
                .iter()
                .map(|&j| f[j] * m.weights[j].powf(1.0 / p))
                .collect();
            (name.clone(), g)
        })
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    for k in 0..opts.random_fields {
        starts.push((format!("random{k}"), random_vector(ins.len(), &mut rng)));
    }
    opnorm_p_weighted(&b, p, starts, opts.ascent_steps)
}
