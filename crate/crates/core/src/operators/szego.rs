use super::matrix::{ks_skew, MeasureTag, OperatorMatrix};
use super::norms::{spectral_norm, spectral_norm_weighted, FnOp, NormEstimate, PowerOptions};
use crate::boundary::BoundaryMesh;
use crate::cpoint::C64;
use crate::error::{LabError, Result};
use nalgebra::{DMatrix, DVector};
use serde::Serialize;

/// Monomials z₁ᵃz₂ᵇ with a + b ≤ degree sampled at the mesh nodes.
#[derive(Clone, Debug)]
pub struct HolomorphicBasis {
    pub degree: u32,
    pub exponents: Vec<(u32, u32)>,
    /// nodes × basis functions
    pub values: DMatrix<C64>,
}

impl HolomorphicBasis {
    pub fn new(mesh: &BoundaryMesh, degree: u32) -> Self {
        let exponents: Vec<(u32, u32)> = (0..=degree)
            .flat_map(|total| (0..=total).rev().map(move |a| (a, total - a)))
            .collect();
        let values = DMatrix::from_fn(mesh.len(), exponents.len(), |i, k| {
            let (a, b) = exponents[k];
            mesh.nodes[i].z1.powu(a) * mesh.nodes[i].z2.powu(b)
        });
        Self {
            degree,
            exponents,
            values,
        }
    }

    /// Gram matrix Bᴴ W B.
    pub fn gram(&self, weights: &[f64]) -> DMatrix<C64> {
        let wb = DMatrix::from_fn(self.values.nrows(), self.values.ncols(), |i, k| {
            self.values[(i, k)] * weights[i]
        });
        self.values.ad_mul(&wb)
    }

    /// Eigenvalue condition number of the Gram matrix.
    pub fn condition(&self, weights: &[f64]) -> f64 {
        let ev = self.gram(weights).symmetric_eigenvalues();
        let max = ev.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let min = ev.iter().copied().fold(f64::INFINITY, f64::min);
        if min <= 0.0 {
            f64::INFINITY
        } else {
            max / min
        }
    }

    /// Coefficients of the weighted least-squares projection of `f`.
    pub fn coefficients(&self, weights: &[f64], f: &[C64]) -> Result<Vec<C64>> {
        let rhs = self.values.ad_mul(&DVector::from_iterator(
            f.len(),
            f.iter().zip(weights).map(|(v, w)| v * *w),
        ));
        let chol = self
            .gram(weights)
            .cholesky()
            .ok_or(LabError::RankDeficient {
                condition: f64::INFINITY,
            })?;
        Ok(chol.solve(&rhs).as_slice().to_vec())
    }
}

#[derive(Clone, Debug)]
pub struct DirectProjection {
    pub projector: OperatorMatrix,
    pub degree: u32,
    pub requested_degree: u32,
    pub condition: f64,
}

/// Orthogonal projector onto the sampled polynomials of degree ≤ `degree`
/// in L²(μ). The degree is lowered while the Gram condition number exceeds
/// `max_condition`.
pub fn szego_direct(
    mesh: &BoundaryMesh,
    tag: MeasureTag,
    degree: u32,
    max_condition: f64,
) -> Result<DirectProjection> {
    let weights = tag.weights(mesh);
    let mut deg = degree;
    loop {
        let basis = HolomorphicBasis::new(mesh, deg);
        let gram = basis.gram(weights);
        let eig = gram.clone().symmetric_eigen();
        let max = eig
            .eigenvalues
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max);
        let min = eig
            .eigenvalues
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min);
        let condition = if min > 0.0 { max / min } else { f64::INFINITY };
        if condition <= max_condition {
            // W-orthonormal columns Q = B V Λ^{-1/2}; P = Q Qᴴ W
            let k = basis.exponents.len();
            let scale = DMatrix::from_fn(k, k, |i, j| {
                eig.eigenvectors[(i, j)] / eig.eigenvalues[j].sqrt()
            });
            let q = &basis.values * scale;
            let qw = DMatrix::from_fn(q.nrows(), q.ncols(), |i, j| q[(i, j)] * weights[i]);
            let p = &q * qw.adjoint();
            return Ok(DirectProjection {
                projector: OperatorMatrix {
                    label: format!("S_direct(deg {deg})"),
                    domain_id: mesh.domain_id.clone(),
                    tag,
                    policy: None,
                    weights: weights.to_vec(),
                    matrix: p,
                },
                degree: deg,
                requested_degree: degree,
                condition,
            });
        }
        if deg == 0 {
            return Err(LabError::RankDeficient { condition });
        }
        log::warn!("Gram condition {condition:.3e} at degree {deg}; lowering the degree");
        deg -= 1;
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct NeumannDiagnostic {
    pub terms: usize,
    /// ‖S − Σ_{k<terms} C Aᵏ‖ in L²(μ).
    pub residual: f64,
}

#[derive(Clone, Debug)]
pub struct KsProjection {
    pub s: OperatorMatrix,
    pub a_norm: NormEstimate,
    /// Bound on the L²(μ) condition number of I − A: 1 + ‖A‖.
    pub condition_bound: f64,
    pub neumann: Option<NeumannDiagnostic>,
}

fn weighted_norm_of(
    weights: &[f64],
    apply: impl Fn(&[C64]) -> Vec<C64> + Sync,
    apply_h: impl Fn(&[C64]) -> Vec<C64> + Sync,
    opts: PowerOptions,
) -> NormEstimate {
    let n = weights.len();
    let sq: Vec<f64> = weights.iter().map(|w| w.sqrt()).collect();
    let op = FnOp {
        rows: n,
        cols: n,
        f: |x: &[C64]| {
            let u: Vec<C64> = x.iter().zip(&sq).map(|(v, s)| v / *s).collect();
            apply(&u).iter().zip(&sq).map(|(v, s)| v * *s).collect()
        },
        fh: |y: &[C64]| {
            let u: Vec<C64> = y.iter().zip(&sq).map(|(v, s)| v * *s).collect();
            apply_h(&u).iter().zip(&sq).map(|(v, s)| v / *s).collect()
        },
    };
    spectral_norm(&op, opts)
}

fn matvec(m: &DMatrix<C64>, x: &[C64]) -> Vec<C64> {
    (m * DVector::from_column_slice(x)).as_slice().to_vec()
}

fn matvec_h(m: &DMatrix<C64>, x: &[C64]) -> Vec<C64> {
    m.ad_mul(&DVector::from_column_slice(x)).as_slice().to_vec()
}

/// ‖X‖ in L²(μ) for an explicit matrix with the weights of `like`.
pub fn weighted_norm(like: &OperatorMatrix, m: &DMatrix<C64>, opts: PowerOptions) -> NormEstimate {
    weighted_norm_of(&like.weights, |x| matvec(m, x), |y| matvec_h(m, y), opts)
}

/// ‖S² − S‖ in L²(μ) without forming S².
pub fn idempotence_defect(s: &OperatorMatrix, opts: PowerOptions) -> NormEstimate {
    let m = &s.matrix;
    weighted_norm_of(
        &s.weights,
        |x| {
            let y = matvec(m, x);
            matvec(m, &y).iter().zip(&y).map(|(a, b)| a - b).collect()
        },
        |x| {
            let y = matvec_h(m, x);
            matvec_h(m, &y).iter().zip(&y).map(|(a, b)| a - b).collect()
        },
        opts,
    )
}

/// ‖S† − S‖ in L²(μ).
pub fn self_adjointness_defect(s: &OperatorMatrix, opts: PowerOptions) -> Result<NormEstimate> {
    let d = s.adjoint()?.sub(s)?;
    spectral_norm_weighted(&d, None, None, opts)
}

/// S = C(I − A)⁻¹ with A = C† − C, by a dense LU solve. With
/// `neumann_terms = Some(k)` the truncated series Σ_{j<k} C Aʲ is compared
/// against S.
pub fn szego_ks(
    c: &OperatorMatrix,
    neumann_terms: Option<usize>,
    opts: PowerOptions,
) -> Result<KsProjection> {
    let a = ks_skew(c)?;
    let a_norm = spectral_norm_weighted(&a, None, None, opts)?;
    if a_norm.lower >= 1.0 {
        log::warn!(
            "‖A‖ = {:.3e} ≥ 1: Neumann series diverges; direct solve only",
            a_norm.lower
        );
    }
    let n = c.dim();
    let b = DMatrix::<C64>::identity(n, n) - &a.matrix;
    // S (I − A) = C  ⇔  (I − A)ᵀ Sᵀ = Cᵀ
    let lu = b.transpose().lu();
    let st = lu
        .solve(&c.matrix.transpose())
        .ok_or_else(|| LabError::Solve("I - A is singular".into()))?;
    if st.iter().any(|v| !v.is_finite()) {
        return Err(LabError::Solve("non-finite entries in (I - A)^-1".into()));
    }
    let s = c.derived(format!("S_ks[{}]", c.label), st.transpose());
    let neumann = neumann_terms.map(|k| {
        let am = &a.matrix;
        let cm = &c.matrix;
        let series = |x: &[C64]| {
            let mut acc = vec![C64::new(0.0, 0.0); x.len()];
            let mut v = x.to_vec();
            for _ in 0..k {
                acc.iter_mut()
                    .zip(matvec(cm, &v))
                    .for_each(|(a, b)| *a += b);
                v = matvec(am, &v);
            }
            acc
        };
        let series_h = |y: &[C64]| {
            let mut acc = vec![C64::new(0.0, 0.0); y.len()];
            let mut v = matvec_h(cm, y);
            for _ in 0..k {
                acc.iter_mut().zip(&v).for_each(|(a, b)| *a += b);
                v = matvec_h(am, &v);
            }
            acc
        };
        let sm = &s.matrix;
        let est = weighted_norm_of(
            &c.weights,
            |x| {
                matvec(sm, x)
                    .iter()
                    .zip(series(x))
                    .map(|(a, b)| a - b)
                    .collect()
            },
            |y| {
                matvec_h(sm, y)
                    .iter()
                    .zip(series_h(y))
                    .map(|(a, b)| a - b)
                    .collect()
            },
            opts,
        );
        NeumannDiagnostic {
            terms: k,
            residual: est.lower,
        }
    });
    Ok(KsProjection {
        s,
        a_norm,
        condition_bound: 1.0 + a_norm.lower,
        neumann,
    })
}
