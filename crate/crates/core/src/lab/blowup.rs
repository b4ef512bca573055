use super::bump::{concentration_ratio, far_set_ratio, transform_on_test_set, BumpFamily};
use super::report::{sci_list, ExperimentReport, Table};
use super::{ExperimentConfig, RunContext};
use crate::cpoint::CPoint2;
use crate::error::{LabError, Result};
use crate::geometry::{parse_domain_id, DomainSpec};
use crate::operators::MeasureTag;
use std::collections::BTreeMap;
use std::time::Instant;

fn measure_name(tag: MeasureTag) -> &'static str {
    match tag {
        MeasureTag::Sigma => "sigma",
        MeasureTag::LerayLevi => "leray-levi",
    }
}

/// Bump center: the first degenerate hint on the circle {z₁ = 0}, else (0, 1).
fn center_of(d: &DomainSpec) -> CPoint2 {
    d.degenerate_hints()
        .iter()
        .find(|h| h.z1.norm() < 1e-12)
        .copied()
        .unwrap_or(CPoint2::real(0.0, 0.0, 1.0, 0.0))
}

type Series = BTreeMap<(String, usize), Vec<f64>>;

struct Tables {
    ratios: Table,
    far: Table,
}

/// R(δ) for every (measure, p) on one domain; returns the series keyed by
/// (measure, index of p).
fn domain_series(
    id: &str,
    center: CPoint2,
    cfg: &ExperimentConfig,
    ctx: &RunContext,
    report: &mut ExperimentReport,
    tables: &mut Tables,
) -> Result<Series> {
    let d = parse_domain_id(id)?;
    d.require_on_boundary(&center)?;
    let family = BumpFamily::new(&d, center, cfg.deltas.clone(), cfg.masks.clone())?;
    let global = ctx.mesh(&d, cfg.masks.far_resolution, cfg, report)?;
    let far: Vec<usize> = (0..global.len())
        .filter(|&i| global.nodes[i].dist(&center) >= cfg.masks.far_distance)
        .collect();
    if far.is_empty() {
        return Err(LabError::EmptyMask);
    }
    let mut series = Series::new();
    for &delta in &family.deltas {
        let t = Instant::now();
        let level = match family.level(&d, delta, ctx.exec) {
            Ok(l) => l,
            Err(LabError::InvalidParameter(msg)) => {
                log::warn!("{id}: skipping level {delta}: {msg}");
                continue;
            }
            Err(e) => return Err(e),
        };
        let (cf, refined) = transform_on_test_set(&d, &family, &level, ctx.exec)?;
        for &tag in &cfg.measures {
            for (k, &p) in cfg.p_values.iter().enumerate() {
                let r = concentration_ratio(&level, &cf, p, tag);
                series
                    .entry((measure_name(tag).to_string(), k))
                    .or_default()
                    .push(r);
                tables.ratios.push(vec![
                    id.into(),
                    measure_name(tag).into(),
                    p.into(),
                    delta.into(),
                    r.into(),
                    level.support_nodes.into(),
                    level.test_set.len().into(),
                    level.gap.into(),
                    refined.into(),
                ]);
                let fr = far_set_ratio(&level, &global, &far, p, tag, ctx.exec)?;
                tables.far.push(vec![
                    id.into(),
                    measure_name(tag).into(),
                    p.into(),
                    delta.into(),
                    fr.into(),
                    far.len().into(),
                ]);
            }
        }
        report.time(
            format!("blowup {id} delta={delta}"),
            t.elapsed().as_secs_f64(),
        );
    }
    Ok(series)
}

/// Concentrating bump families at a degenerate boundary point: the ratio
/// R(δ) = ‖C f_δ‖_{Lᵖ(S)} / ‖f_δ‖_{Lᵖ} on the counterexample domains against
/// the identical protocol on the control domain.
pub fn run_blowup(cfg: &ExperimentConfig, ctx: &RunContext) -> Result<ExperimentReport> {
    let mut report = ExperimentReport::new(cfg);
    let tol = cfg.tolerances.clone();
    let mut tables = Tables {
        ratios: Table::new(
            "ratios",
            &[
                "domain",
                "measure",
                "p",
                "delta",
                "ratio",
                "support_nodes",
                "test_nodes",
                "gap",
                "refined_cells",
            ],
        ),
        far: Table::new(
            "far_set_ratios",
            &["domain", "measure", "p", "delta", "ratio", "far_nodes"],
        ),
    };
    let mut center = None;
    for id in &cfg.domains {
        let d = parse_domain_id(id)?;
        let c = center_of(&d);
        center.get_or_insert(c);
        let series = domain_series(id, c, cfg, ctx, &mut report, &mut tables)?;
        for ((m, k), r) in &series {
            let p = cfg.p_values[*k];
            let label = format!("{id}.{m}.p{p}");
            report.assert(
                format!("blowup.increasing.{label}"),
                "R(δ) strictly increases on the counterexample domains",
                r.len() >= 3 && r.windows(2).all(|w| w[1] > w[0]),
                format!("R {}", sci_list(r)),
            );
            let growth = r[r.len() - 1] / r[0];
            report.scalar(format!("blowup.growth.{label}"), growth);
            report.assert(
                format!("blowup.growth.{label}"),
                "R(δ) grows by the calibrated factor from the first to the last level",
                growth >= tol.blowup_growth_min,
                format!("growth {growth:.4} (threshold {})", tol.blowup_growth_min),
            );
        }
    }
    if let Some(id) = &cfg.control {
        let c = center.unwrap_or(CPoint2::real(0.0, 0.0, 1.0, 0.0));
        let series = domain_series(id, c, cfg, ctx, &mut report, &mut tables)?;
        for ((m, k), r) in &series {
            let p = cfg.p_values[*k];
            let lo = r.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = r.iter().copied().fold(0.0, f64::max);
            let label = format!("{id}.{m}.p{p}");
            report.scalar(format!("blowup.variation.{label}"), hi / lo);
            report.assert(
                format!("blowup.control.{label}"),
                "R(δ) on the control domain varies by at most the allowed factor",
                hi / lo <= tol.blowup_control_max,
                format!("max/min {:.4} (bound {})", hi / lo, tol.blowup_control_max),
            );
        }
    }
    report.tables.extend([tables.ratios, tables.far]);
    Ok(report)
}
