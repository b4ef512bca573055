use super::report::{orders, ExperimentReport, Table};
use super::{ExperimentConfig, RunContext};
use crate::boundary::{density_ratio_report, mesh_diagnostics};
use crate::error::Result;
use crate::geometry::{parse_domain_id, DomainKind};
use std::f64::consts::PI;

/// Mesh diagnostics for every configured domain and resolution, plus the
/// surface-measure oracle on balls: total Σ against 2π²R³ and the constancy
/// of dλ/dΣ.
pub fn run_measures(cfg: &ExperimentConfig, ctx: &RunContext) -> Result<ExperimentReport> {
    let mut report = ExperimentReport::new(cfg);
    let tol = &cfg.tolerances;
    let mut diag = Table::new(
        "meshes",
        &[
            "domain",
            "resolution",
            "nodes",
            "total_sigma",
            "total_lambda",
            "cl_weight_re",
            "cl_weight_im",
            "max_abs_rho",
            "max_cell_diameter",
            "normalization_faults",
            "covers_boundary",
        ],
    );
    let mut ratios = Table::new(
        "density_ratio",
        &[
            "domain",
            "resolution",
            "expected",
            "min",
            "max",
            "median",
            "spread",
            "degenerate_nodes",
        ],
    );
    let mut sigma = Table::new(
        "ball_sigma",
        &[
            "domain",
            "resolution",
            "total_sigma",
            "exact",
            "relative_error",
            "order",
        ],
    );
    for id in &cfg.domains {
        let d = parse_domain_id(id)?;
        let mut errs = Vec::new();
        for &n in &cfg.resolutions {
            let mesh = ctx.mesh(&d, n, cfg, &mut report)?;
            let m = mesh_diagnostics(&d, &mesh)?;
            diag.push(vec![
                id.as_str().into(),
                n.into(),
                m.nodes.into(),
                m.total_sigma.into(),
                m.total_lambda.into(),
                m.total_cl_weight[0].into(),
                m.total_cl_weight[1].into(),
                m.max_abs_rho.into(),
                m.max_cell_diameter.into(),
                m.normalization_faults.into(),
                m.covers_boundary.into(),
            ]);
            if d.is_bounded() {
                let r = density_ratio_report(&d, &mesh)?;
                ratios.push(vec![
                    id.as_str().into(),
                    n.into(),
                    r.expected_ratio.into(),
                    r.ratio_min.into(),
                    r.ratio_max.into(),
                    r.ratio_median.into(),
                    r.spread.into(),
                    r.degenerate_nodes.into(),
                ]);
                if let DomainKind::Ball { .. } = d.kind() {
                    let dev = (r.ratio_max / r.expected_ratio - 1.0)
                        .abs()
                        .max((r.ratio_min / r.expected_ratio - 1.0).abs());
                    report.assert(
                        format!("measure.density-ratio.{id}.n{n}"),
                        "dλ/dΣ is the constant 1/(8π⁴) on the ball",
                        dev <= tol.density_ratio,
                        format!(
                            "max relative deviation {dev:.3e} (tolerance {:.1e})",
                            tol.density_ratio
                        ),
                    );
                }
            }
            if let DomainKind::Ball { radius } = d.kind() {
                let exact = 2.0 * PI * PI * radius.powi(3);
                errs.push(((m.total_sigma - exact) / exact).abs());
                sigma.push(vec![
                    id.as_str().into(),
                    n.into(),
                    m.total_sigma.into(),
                    exact.into(),
                    errs[errs.len() - 1].into(),
                    f64::NAN.into(),
                ]);
            }
        }
        if !errs.is_empty() {
            let ords = orders(&cfg.resolutions, &errs);
            let first = sigma.rows.len() - errs.len();
            for (k, o) in ords.iter().enumerate() {
                sigma.rows[first + k + 1][5] = (*o).into();
            }
            let last = errs[errs.len() - 1];
            report.assert(
                format!("measure.sigma-total.{id}"),
                "total Σ of the ball converges to 2π²R³",
                last <= tol.sigma_total,
                format!(
                    "relative error {last:.3e} at the finest level (tolerance {:.1e})",
                    tol.sigma_total
                ),
            );
            if cfg.resolutions.len() >= 2 {
                let min = ords.iter().copied().fold(f64::INFINITY, f64::min);
                report.assert(
                    format!("measure.sigma-order.{id}"),
                    "total Σ of the ball converges to 2π²R³",
                    min >= tol.min_order,
                    format!("orders {ords:.3?} (minimum required {})", tol.min_order),
                );
            }
        }
    }
    report.tables.push(diag);
    report.tables.push(ratios);
    if !sigma.rows.is_empty() {
        report.tables.push(sigma);
    }
    Ok(report)
}
