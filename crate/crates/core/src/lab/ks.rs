use super::report::{sci_list, ExperimentReport, Table};
use super::{ExperimentConfig, RunContext};
use crate::error::{LabError, Result};
use crate::geometry::parse_domain_id;
use crate::operators::{
    assemble, idempotence_defect, self_adjointness_defect, szego_direct, szego_ks, weighted_norm,
    KernelKind, MeasureTag, PowerOptions,
};
use std::time::Instant;

/// Largest Gram condition number accepted by the basis projection.
const MAX_GRAM_CONDITION: f64 = 1e10;
const NEUMANN_TERMS: usize = 4;

fn power_options(seed: u64) -> PowerOptions {
    PowerOptions {
        tol: 1e-6,
        max_iter: 200,
        seed,
    }
}

/// Kerzman-Stein construction S = C(I − A)⁻¹ on each configured domain
/// across resolutions: size of A, comparison with the basis projection,
/// projection residuals, and the gap between the Σ- and λ-adjoint variants.
pub fn run_kerzman_stein(cfg: &ExperimentConfig, ctx: &RunContext) -> Result<ExperimentReport> {
    let mut report = ExperimentReport::new(cfg);
    let tol = cfg.tolerances.clone();
    let opts = power_options(cfg.seed);
    let mut tab = Table::new(
        "kerzman_stein",
        &[
            "domain",
            "resolution",
            "nodes",
            "a_norm",
            "a_norm_upper",
            "c_norm",
            "s_minus_direct",
            "direct_degree",
            "idempotence",
            "self_adjointness",
            "neumann_residual",
            "lambda_gap",
        ],
    );
    for id in &cfg.domains {
        let d = parse_domain_id(id)?;
        let mut a_norms = Vec::new();
        let mut last = None;
        for &n in &cfg.resolutions {
            let mesh = ctx.mesh(&d, n, cfg, &mut report)?;
            let t = Instant::now();
            let c = assemble(
                KernelKind::CauchyLeray,
                &mesh,
                MeasureTag::Sigma,
                cfg.diagonal,
                cfg.node_cap,
                ctx.exec,
            )?;
            let ks = szego_ks(&c, Some(NEUMANN_TERMS), opts)?;
            let c_norm = weighted_norm(&c, &c.matrix, opts).lower;
            let direct = szego_direct(
                &mesh,
                MeasureTag::Sigma,
                cfg.szego_degree,
                MAX_GRAM_CONDITION,
            )?;
            let diff = ks.s.matrix.clone() - &direct.projector.matrix;
            let gap_direct = weighted_norm(&ks.s, &diff, opts).lower;
            let idem = idempotence_defect(&ks.s, opts).lower;
            let sa = self_adjointness_defect(&ks.s, opts)?.lower;

            let cl = assemble(
                KernelKind::CauchyLeray,
                &mesh,
                MeasureTag::LerayLevi,
                cfg.diagonal,
                cfg.node_cap,
                ctx.exec,
            )?;
            let ks_l = szego_ks(&cl, None, opts)?;
            let lambda_gap =
                weighted_norm(&ks.s, &(ks.s.matrix.clone() - &ks_l.s.matrix), opts).lower;
            report.time(
                format!("kerzman-stein {id}@n{n}"),
                t.elapsed().as_secs_f64(),
            );

            a_norms.push(ks.a_norm.lower);
            let neumann = ks.neumann.as_ref().map_or(f64::NAN, |r| r.residual);
            tab.push(vec![
                id.as_str().into(),
                n.into(),
                mesh.len().into(),
                ks.a_norm.lower.into(),
                ks.a_norm.upper.unwrap_or(f64::NAN).into(),
                c_norm.into(),
                gap_direct.into(),
                direct.degree.into(),
                idem.into(),
                sa.into(),
                neumann.into(),
                lambda_gap.into(),
            ]);
            last = Some((gap_direct, idem, sa));
        }
        let (gap_direct, idem, sa) = last.ok_or(LabError::EmptyMask)?;
        let max_a = a_norms.iter().copied().fold(0.0, f64::max);
        report.assert(
            format!("ks.a-small.{id}"),
            "the Kerzman-Stein operator A = C† − C is small",
            max_a < tol.ks_a_max,
            format!("‖A‖ {} (bound {})", sci_list(&a_norms), tol.ks_a_max),
        );
        report.assert(
            format!("ks.a-monotone.{id}"),
            "‖A‖ does not increase under refinement",
            a_norms
                .windows(2)
                .all(|w| w[1] <= w[0] + tol.ks_monotone_slack),
            format!(
                "‖A‖ {} (slack {:.1e})",
                sci_list(&a_norms),
                tol.ks_monotone_slack
            ),
        );
        report.assert(
            format!("ks.direct.{id}"),
            "S from the Kerzman-Stein identity matches the basis projection",
            gap_direct <= tol.ks_projection,
            format!(
                "‖S_ks − S_direct‖ {gap_direct:.3e} (tolerance {:.1e})",
                tol.ks_projection
            ),
        );
        report.assert(
            format!("ks.idempotent.{id}"),
            "S from the Kerzman-Stein identity is a projection",
            idem <= tol.ks_projection,
            format!("‖S² − S‖ {idem:.3e} (tolerance {:.1e})", tol.ks_projection),
        );
        report.assert(
            format!("ks.self-adjoint.{id}"),
            "S from the Kerzman-Stein identity is self-adjoint",
            sa <= tol.ks_projection,
            format!("‖S† − S‖ {sa:.3e} (tolerance {:.1e})", tol.ks_projection),
        );
    }
    report.tables.push(tab);
    Ok(report)
}
