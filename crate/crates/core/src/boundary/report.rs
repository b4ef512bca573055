use super::cache::mesh_checksum;
use super::mesh::{BoundaryMesh, LEVI_SCALE};
use crate::error::{LabError, Result};
use crate::geometry::{levi_determinant, DomainSpec};
use serde::Serialize;

/// |φ| at or below this is treated as a Levi-degenerate node.
pub const DEGENERATE_PHI: f64 = 1e-9;

/// Per-node comparison of the λ-density with |φ|·Σ-density.
#[derive(Clone, Debug, Serialize)]
pub struct DensityRatioReport {
    pub domain: String,
    pub nodes: usize,
    /// 2·|(2πi)^{-4}| = 1/(8π⁴), the exact value of the ratio.
    pub expected_ratio: f64,
    pub ratio_min: f64,
    pub ratio_max: f64,
    pub ratio_median: f64,
    /// max/min over nodes with |φ| above the degeneracy threshold.
    pub spread: f64,
    pub phi_min: f64,
    pub phi_max: f64,
    /// Nodes with |φ| ≤ 1e-9, excluded from the ratio.
    pub degenerate_nodes: usize,
    /// Largest λ-density / Σ-density over degenerate nodes.
    pub degenerate_lambda_over_sigma: f64,
}

pub fn density_ratio_report(d: &DomainSpec, mesh: &BoundaryMesh) -> Result<DensityRatioReport> {
    if d.id() != mesh.domain_id {
        return Err(LabError::InvalidParameter(format!(
            "mesh of `{}` used with domain `{}`",
            mesh.domain_id,
            d.id()
        )));
    }
    let mut ratios = Vec::with_capacity(mesh.len());
    let (mut phi_min, mut phi_max) = (f64::INFINITY, f64::NEG_INFINITY);
    let mut degenerate = 0;
    let mut degenerate_ratio: f64 = 0.0;
    for i in 0..mesh.len() {
        let phi = levi_determinant(d, &mesh.nodes[i])?;
        phi_min = phi_min.min(phi);
        phi_max = phi_max.max(phi);
        if phi.abs() <= DEGENERATE_PHI {
            degenerate += 1;
            degenerate_ratio = degenerate_ratio.max(mesh.lambda_weights[i] / mesh.sigma_weights[i]);
        } else {
            ratios.push(mesh.lambda_weights[i] / (phi.abs() * mesh.sigma_weights[i]));
        }
    }
    ratios.sort_by(f64::total_cmp);
    let (min, max) = match (ratios.first(), ratios.last()) {
        (Some(&a), Some(&b)) => (a, b),
        _ => (f64::NAN, f64::NAN),
    };
    let median = if ratios.is_empty() {
        f64::NAN
    } else {
        ratios[ratios.len() / 2]
    };
    Ok(DensityRatioReport {
        domain: d.id().to_string(),
        nodes: mesh.len(),
        expected_ratio: 2.0 * LEVI_SCALE,
        ratio_min: min,
        ratio_max: max,
        ratio_median: median,
        spread: max / min,
        phi_min,
        phi_max,
        degenerate_nodes: degenerate,
        degenerate_lambda_over_sigma: degenerate_ratio,
    })
}

/// Summary emitted by the `mesh` subcommand.
#[derive(Clone, Debug, Serialize)]
pub struct MeshDiagnostics {
    pub domain: String,
    pub resolution: usize,
    pub quadrature: String,
    pub chart_counts: Vec<[usize; 3]>,
    pub nodes: usize,
    pub total_sigma: f64,
    pub total_lambda: f64,
    pub total_cl_weight: [f64; 2],
    pub min_sigma_weight: f64,
    pub min_lambda_weight: f64,
    pub max_abs_rho: f64,
    pub max_cell_diameter: f64,
    pub normalization_faults: usize,
    pub covers_boundary: bool,
    pub checksum: String,
}

pub fn mesh_diagnostics(d: &DomainSpec, mesh: &BoundaryMesh) -> Result<MeshDiagnostics> {
    let mut max_rho: f64 = 0.0;
    for p in &mesh.nodes {
        max_rho = max_rho.max(d.rho(p)?.abs());
    }
    let cl = mesh.total_cl();
    Ok(MeshDiagnostics {
        domain: mesh.domain_id.clone(),
        resolution: mesh.resolution,
        quadrature: format!("{:?}", mesh.quadrature),
        chart_counts: mesh.per_chart_counts(),
        nodes: mesh.len(),
        total_sigma: mesh.total_sigma(),
        total_lambda: mesh.total_lambda(),
        total_cl_weight: [cl.re, cl.im],
        min_sigma_weight: mesh
            .sigma_weights
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min),
        min_lambda_weight: mesh
            .lambda_weights
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min),
        max_abs_rho: max_rho,
        max_cell_diameter: mesh.max_cell_diameter(),
        normalization_faults: mesh.normalization_faults,
        covers_boundary: mesh.covers_boundary(),
        checksum: mesh_checksum(mesh),
    })
}
