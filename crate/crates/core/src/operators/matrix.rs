use super::kernels::KernelKind;
use crate::boundary::BoundaryMesh;
use crate::cpoint::C64;
use crate::error::{LabError, Result};
use crate::exec::Exec;
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::path::Path;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MeasureTag {
    Sigma,
    LerayLevi,
}

impl MeasureTag {
    pub fn weights(self, mesh: &BoundaryMesh) -> &[f64] {
        match self {
            MeasureTag::Sigma => &mesh.sigma_weights,
            MeasureTag::LerayLevi => &mesh.lambda_weights,
        }
    }

    fn tag(self) -> u8 {
        match self {
            MeasureTag::Sigma => 0,
            MeasureTag::LerayLevi => 1,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DiagonalPolicy {
    /// Kernel evaluated at the node itself; the diagonal entry is dropped.
    ZeroDiagonal,
    /// Row i is evaluated at zᵢ − ε·n(zᵢ), ε = factor × local cell diameter.
    EpsilonShift { factor: f64 },
}

impl Default for DiagonalPolicy {
    fn default() -> Self {
        DiagonalPolicy::EpsilonShift { factor: 0.5 }
    }
}

/// Default node cap for dense assembly (4096² complex entries ≈ 270 MB).
pub const DEFAULT_NODE_CAP: usize = 4096;

/// Dense Nyström matrix: rows are output nodes, columns input nodes, entries
/// kernel × input weight. The measure tag fixes the inner product
/// ⟨f, g⟩ = Σ f·conj(g)·weight used by adjoints and norms.
#[derive(Clone, Debug)]
pub struct OperatorMatrix {
    pub label: String,
    pub domain_id: String,
    pub tag: MeasureTag,
    /// None for matrices not built from a kernel (projections, products).
    pub policy: Option<DiagonalPolicy>,
    pub weights: Vec<f64>,
    pub matrix: DMatrix<C64>,
}

/// Evaluation point for row `i` under `policy`.
pub fn row_point(mesh: &BoundaryMesh, i: usize, policy: DiagonalPolicy) -> crate::cpoint::CPoint2 {
    match policy {
        DiagonalPolicy::ZeroDiagonal => mesh.nodes[i],
        DiagonalPolicy::EpsilonShift { factor } => {
            let eps = factor * mesh.cell_diameters[i];
            let n = mesh.normals[i];
            let p = mesh.nodes[i].to_real();
            crate::cpoint::CPoint2::from_real(std::array::from_fn(|k| p[k] - eps * n[k]))
        }
    }
}

pub fn assemble(
    kernel: KernelKind,
    mesh: &BoundaryMesh,
    tag: MeasureTag,
    policy: DiagonalPolicy,
    node_cap: usize,
    exec: Exec,
) -> Result<OperatorMatrix> {
    let n = mesh.len();
    if n > node_cap {
        return Err(LabError::MemoryGuard {
            nodes: n,
            cap: node_cap,
        });
    }
    if let DiagonalPolicy::EpsilonShift { factor } = policy {
        if !(factor > 0.0 && factor.is_finite()) {
            return Err(LabError::InvalidParameter(format!(
                "epsilon factor {factor}"
            )));
        }
    }
    let mut rows = vec![C64::new(0.0, 0.0); n * n];
    let failure = std::sync::Mutex::new(None);
    exec.fill_rows(&mut rows, n, |i, row| {
        let z = row_point(mesh, i, policy);
        for (j, e) in row.iter_mut().enumerate() {
            if policy == DiagonalPolicy::ZeroDiagonal && i == j {
                continue;
            }
            match kernel.weighted(mesh, j, &z) {
                Ok(v) => *e = v,
                Err(err) => {
                    failure.lock().expect("poisoned").get_or_insert((i, err));
                }
            }
        }
    });
    if let Some((_, err)) = failure.into_inner().expect("poisoned") {
        return Err(err);
    }
    Ok(OperatorMatrix {
        label: format!("{kernel:?}"),
        domain_id: mesh.domain_id.clone(),
        tag,
        policy: Some(policy),
        weights: tag.weights(mesh).to_vec(),
        matrix: DMatrix::from_row_slice(n, n, &rows),
    })
}

impl OperatorMatrix {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn apply(&self, x: &[C64]) -> Vec<C64> {
        let v = DVector::from_column_slice(x);
        (&self.matrix * v).as_slice().to_vec()
    }

    /// Weighted inner product Σ f·conj(g)·w.
    pub fn inner(&self, f: &[C64], g: &[C64]) -> C64 {
        f.iter()
            .zip(g)
            .zip(&self.weights)
            .map(|((a, b), w)| a * b.conj() * *w)
            .sum()
    }

    fn with_matrix(&self, label: String, matrix: DMatrix<C64>) -> OperatorMatrix {
        OperatorMatrix {
            label,
            domain_id: self.domain_id.clone(),
            tag: self.tag,
            policy: self.policy,
            weights: self.weights.clone(),
            matrix,
        }
    }

    /// Adjoint in the tagged inner product: M† = W⁻¹ Mᴴ W.
    pub fn adjoint(&self) -> Result<OperatorMatrix> {
        if let Some(w) = self.weights.iter().find(|w| !(**w > 0.0)) {
            return Err(LabError::InvalidParameter(format!(
                "adjoint needs positive weights (found {w})"
            )));
        }
        let n = self.dim();
        let w = &self.weights;
        let m = DMatrix::from_fn(n, n, |i, j| self.matrix[(j, i)].conj() * (w[j] / w[i]));
        Ok(self.with_matrix(format!("{}^adj", self.label), m))
    }

    pub fn sub(&self, other: &OperatorMatrix) -> Result<OperatorMatrix> {
        if other.dim() != self.dim() {
            return Err(LabError::DimensionMismatch {
                expected: self.dim(),
                got: other.dim(),
            });
        }
        Ok(self.with_matrix(
            format!("{} - {}", self.label, other.label),
            &self.matrix - &other.matrix,
        ))
    }

    pub fn mul(&self, other: &OperatorMatrix) -> Result<OperatorMatrix> {
        if other.dim() != self.dim() {
            return Err(LabError::DimensionMismatch {
                expected: self.dim(),
                got: other.dim(),
            });
        }
        Ok(self.with_matrix(
            format!("{} * {}", self.label, other.label),
            &self.matrix * &other.matrix,
        ))
    }

    /// Same tag and weights, new entries.
    pub fn derived(&self, label: impl Into<String>, matrix: DMatrix<C64>) -> OperatorMatrix {
        self.with_matrix(label.into(), matrix)
    }

    pub fn identity_like(&self) -> OperatorMatrix {
        let mut m = self.with_matrix("I".into(), DMatrix::identity(self.dim(), self.dim()));
        m.policy = None;
        m
    }

    /// Writes the documented binary layout: magic "CLLABMAT", format u32,
    /// dimension u64, measure tag u8, policy u8 (0 zero-diagonal,
    /// 1 epsilon-shift, 2 none) with factor f64, label (u32 length + UTF-8),
    /// weights n×f64, entries row-major n²×(re f64, im f64), SHA-256 trailer.
    pub fn write_binary(&self, path: &Path) -> Result<()> {
        let n = self.dim();
        let mut buf = Vec::with_capacity(16 * n * n + 8 * n + 64);
        buf.extend_from_slice(MATRIX_MAGIC);
        buf.extend_from_slice(&1u32.to_le_bytes());
        buf.extend_from_slice(&(n as u64).to_le_bytes());
        buf.push(self.tag.tag());
        let (p, factor) = match self.policy {
            Some(DiagonalPolicy::ZeroDiagonal) => (0u8, 0.0),
            Some(DiagonalPolicy::EpsilonShift { factor }) => (1u8, factor),
            None => (2u8, 0.0),
        };
        buf.push(p);
        buf.extend_from_slice(&factor.to_le_bytes());
        buf.extend_from_slice(&(self.label.len() as u32).to_le_bytes());
        buf.extend_from_slice(self.label.as_bytes());
        for w in &self.weights {
            buf.extend_from_slice(&w.to_le_bytes());
        }
        for i in 0..n {
            for j in 0..n {
                let e = self.matrix[(i, j)];
                buf.extend_from_slice(&e.re.to_le_bytes());
                buf.extend_from_slice(&e.im.to_le_bytes());
            }
        }
        let digest = Sha256::digest(&buf);
        buf.extend_from_slice(&digest);
        std::fs::write(path, buf)?;
        Ok(())
    }

    pub fn read_binary(path: &Path, domain_id: &str) -> Result<OperatorMatrix> {
        let buf = std::fs::read(path)?;
        let bad = |m: &str| LabError::CacheFormat(format!("matrix file: {m}"));
        if buf.len() < 8 + 4 + 8 + 2 + 8 + 4 + 32 {
            return Err(bad("too short"));
        }
        let (body, trailer) = buf.split_at(buf.len() - 32);
        if Sha256::digest(body).as_slice() != trailer {
            return Err(bad("checksum mismatch"));
        }
        if &body[..8] != MATRIX_MAGIC {
            return Err(bad("bad magic"));
        }
        let mut pos = 8;
        let mut take = |k: usize| -> Result<&[u8]> {
            let s = body.get(pos..pos + k).ok_or_else(|| bad("truncated"))?;
            pos += k;
            Ok(s)
        };
        let le64 = |s: &[u8]| u64::from_le_bytes(s.try_into().expect("8 bytes"));
        let lef = |s: &[u8]| f64::from_le_bytes(s.try_into().expect("8 bytes"));
        if u32::from_le_bytes(take(4)?.try_into().expect("4 bytes")) != 1 {
            return Err(bad("unsupported version"));
        }
        let n = le64(take(8)?) as usize;
        if n.checked_mul(n)
            .and_then(|x| x.checked_mul(16))
            .is_none_or(|b| b > body.len())
        {
            return Err(bad("dimension inconsistent with file size"));
        }
        let tag = match take(1)?[0] {
            0 => MeasureTag::Sigma,
            1 => MeasureTag::LerayLevi,
            _ => return Err(bad("unknown measure tag")),
        };
        let p = take(1)?[0];
        let factor = lef(take(8)?);
        let policy = match p {
            0 => Some(DiagonalPolicy::ZeroDiagonal),
            1 => Some(DiagonalPolicy::EpsilonShift { factor }),
            2 => None,
            _ => return Err(bad("unknown policy")),
        };
        let len = u32::from_le_bytes(take(4)?.try_into().expect("4 bytes")) as usize;
        let label = String::from_utf8(take(len)?.to_vec()).map_err(|_| bad("label"))?;
        let mut weights = Vec::with_capacity(n);
        for _ in 0..n {
            weights.push(lef(take(8)?));
        }
        let mut data = Vec::with_capacity(n * n);
        for _ in 0..n * n {
            let re = lef(take(8)?);
            let im = lef(take(8)?);
            data.push(C64::new(re, im));
        }
        Ok(OperatorMatrix {
            label,
            domain_id: domain_id.to_string(),
            tag,
            policy,
            weights,
            matrix: DMatrix::from_row_slice(n, n, &data),
        })
    }

    /// CSV with columns row, col, re, im; refused above `max_nodes`.
    pub fn write_csv(&self, path: &Path, max_nodes: usize) -> Result<()> {
        let n = self.dim();
        if n > max_nodes {
            return Err(LabError::MemoryGuard {
                nodes: n,
                cap: max_nodes,
            });
        }
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["row", "col", "re", "im"])?;
        for i in 0..n {
            for j in 0..n {
                let e = self.matrix[(i, j)];
                w.write_record([
                    i.to_string(),
                    j.to_string(),
                    format!("{:.16e}", e.re),
                    format!("{:.16e}", e.im),
                ])?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

const MATRIX_MAGIC: &[u8; 8] = b"CLLABMAT";

/// A = C† − C, skew-adjoint in the tagged inner product.
pub fn ks_skew(c: &OperatorMatrix) -> Result<OperatorMatrix> {
    let mut a = c.adjoint()?.sub(c)?;
    a.label = format!("A[{}]", c.label);
    Ok(a)
}
