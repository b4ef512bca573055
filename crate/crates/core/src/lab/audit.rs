use super::report::{Cell, ExperimentReport, Table};
use super::{ExperimentConfig, RunContext};
use crate::boundary::{density_ratio_report, sample_boundary_points};
use crate::cpoint::{c, CPoint2, C64};
use crate::error::{LabError, Result};
use crate::geometry::{
    clinear_convexity_probe, derivative_audit, levi_determinant, parse_domain_id, DomainKind,
    DomainSpec,
};
use std::f64::consts::{FRAC_PI_2, PI};
use std::time::Instant;

/// Finite-difference steps of the derivative audit.
const AUDIT_STEPS: [f64; 2] = [1e-3, 5e-4];
/// Points closer than this to {Re z₁ = 0} are skipped on ellipsoids with
/// r < 2, where the Hessian of |Re z₁|^r is unbounded.
const AXIS_EXCLUSION: f64 = 0.05;
/// Inward offset of the off-boundary audit points.
const NORMAL_OFFSET: f64 = 0.05;
/// Boundary samples entering the pair search of the convexity probe.
const PAIR_SAMPLES: usize = 96;

fn near_singular_axis(d: &DomainSpec, p: &CPoint2) -> bool {
    matches!(d.kind(), DomainKind::Ellipsoid { r, .. } if r < 2.0) && p.z1.re.abs() < AXIS_EXCLUSION
}

/// Boundary samples and their inward normal offsets, at least `count` in
/// total.
fn audit_points(
    d: &DomainSpec,
    count: usize,
    seed: u64,
    model_radius: f64,
) -> Result<Vec<CPoint2>> {
    let mut out = Vec::with_capacity(count + 1);
    let mut round = 0;
    while out.len() < count {
        if round > 16 {
            return Err(LabError::EmptyMask);
        }
        let samples = sample_boundary_points(d, count, seed.wrapping_add(round), model_radius)?;
        round += 1;
        for p in samples {
            let g = d.grad_real(&p)?;
            let n = g.iter().map(|x| x * x).sum::<f64>().sqrt();
            let x = p.to_real();
            let q = CPoint2::from_real(std::array::from_fn(|k| x[k] - NORMAL_OFFSET * g[k] / n));
            for pt in [p, q] {
                if out.len() < count
                    && !near_singular_axis(d, &pt)
                    && d.function().admits(&pt).is_ok()
                {
                    out.push(pt);
                }
            }
        }
    }
    Ok(out)
}

struct PairInfimum {
    value: f64,
    w: CPoint2,
    z: CPoint2,
}

fn pair_infimum(d: &DomainSpec, pts: &[CPoint2]) -> Result<PairInfimum> {
    let mut best = PairInfimum {
        value: f64::INFINITY,
        w: CPoint2::ZERO,
        z: CPoint2::ZERO,
    };
    for (i, w) in pts.iter().enumerate() {
        for z in &pts[i + 1..] {
            for (a, b) in [(w, z), (z, w)] {
                if a.dist(b) < 1e-12 {
                    continue;
                }
                let v = clinear_convexity_probe(d, a, b)?;
                if v < best.value {
                    best = PairInfimum {
                        value: v,
                        w: *a,
                        z: *b,
                    };
                }
            }
        }
    }
    Ok(best)
}

/// Points z(y) = (i y, √(1 − y^q)) approaching w = (0, 1) along Im z₁ on an
/// ellipsoid with exponent q on Im z₁.
fn degenerate_sequence(q: f64) -> Vec<(f64, CPoint2)> {
    (1..=10)
        .map(|k| {
            let y = 0.5f64.powi(k);
            (y, CPoint2::new(c(0.0, y), c((1.0 - y.powf(q)).sqrt(), 0.0)))
        })
        .collect()
}

fn point_text(p: &CPoint2) -> Cell {
    let x = p.to_real();
    format!("({:.6}, {:.6}, {:.6}, {:.6})", x[0], x[1], x[2], x[3]).into()
}

/// Annulus {z₂ = 0, |log|z₁|²| ≤ β − π/2} of the worm.
fn worm_annulus(beta: f64) -> Vec<CPoint2> {
    let a = beta - FRAC_PI_2;
    let mut pts = Vec::new();
    for i in 0..=8 {
        let t = -a + 2.0 * a * i as f64 / 8.0;
        for j in 0..8 {
            let alpha = 2.0 * PI * j as f64 / 8.0;
            pts.push(CPoint2::new(
                C64::from_polar((0.5 * t).exp(), alpha),
                c(0.0, 0.0),
            ));
        }
    }
    pts
}

/// Derivative audit, strong C-linear convexity probe, Levi determinant and
/// density-ratio report for every configured domain, and the resulting
/// hypothesis matrix.
pub fn run_geometry_audit(cfg: &ExperimentConfig, ctx: &RunContext) -> Result<ExperimentReport> {
    let mut report = ExperimentReport::new(cfg);
    let tol = cfg.tolerances.clone();
    let mut fd = Table::new(
        "derivative_audit",
        &[
            "domain",
            "points",
            "grad_error_coarse",
            "grad_error_fine",
            "grad_order",
            "hess_error_coarse",
            "hess_error_fine",
            "hess_order",
            "grad_pass",
            "hess_pass",
        ],
    );
    let mut probe = Table::new("clinear_probe", &["domain", "samples", "infimum", "w", "z"]);
    let mut seq = Table::new("degenerate_sequence", &["domain", "y", "probe"]);
    let mut levi = Table::new(
        "levi_determinant",
        &["domain", "set", "points", "min", "max"],
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
    let mut matrix = Table::new(
        "hypothesis_matrix",
        &[
            "domain",
            "smoothness",
            "catalog_strongly_clinear_convex",
            "probe_infimum",
            "strongly_clinear_convex",
            "levi_min",
            "pseudoconvex",
            "weakly_pseudoconvex_set",
        ],
    );
    let mut fd_time = 0.0;
    for id in &cfg.domains {
        let d = parse_domain_id(id)?;
        let t = Instant::now();
        let pts = audit_points(&d, cfg.audit_points, cfg.seed, cfg.model_radius)?;
        let a = derivative_audit(&d, &pts, AUDIT_STEPS, ctx.exec)?;
        fd_time += t.elapsed().as_secs_f64();
        fd.push(vec![
            id.as_str().into(),
            a.points.into(),
            a.grad_errors[0].into(),
            a.grad_errors[1].into(),
            a.grad_order.into(),
            a.hess_mixed_errors[0].max(a.hess_holo_errors[0]).into(),
            a.hess_mixed_errors[1].max(a.hess_holo_errors[1]).into(),
            a.hess_order.into(),
            a.grad_pass.into(),
            a.hess_pass.into(),
        ]);
        report.assert(
            format!("audit.derivatives.{id}"),
            "analytic derivatives agree with finite differences",
            a.grad_pass && a.hess_pass && a.points >= 100,
            format!(
                "{} points; gradient order {:.3} (floor {}), Hessian order {:.3} (floor {})",
                a.points, a.grad_order, a.grad_at_floor, a.hess_order, a.hess_at_floor
            ),
        );

        let bpts = sample_boundary_points(&d, PAIR_SAMPLES, cfg.seed ^ 0x9e37, cfg.model_radius)?;
        let mut inf = pair_infimum(&d, &bpts)?;
        probe.push(vec![
            id.as_str().into(),
            bpts.len().into(),
            inf.value.into(),
            point_text(&inf.w),
            point_text(&inf.z),
        ]);
        if let DomainKind::Ellipsoid { q, .. } = d.kind() {
            if d.degenerate_hints()
                .iter()
                .any(|h| h.dist(&CPoint2::real(0.0, 0.0, 1.0, 0.0)) < 1e-12)
            {
                let w = CPoint2::real(0.0, 0.0, 1.0, 0.0);
                for (y, z) in degenerate_sequence(q) {
                    let v = clinear_convexity_probe(&d, &w, &z)?;
                    seq.push(vec![id.as_str().into(), y.into(), v.into()]);
                    if v < inf.value {
                        inf = PairInfimum { value: v, w, z };
                    }
                }
            }
        }

        let mut phi = bpts
            .iter()
            .map(|p| levi_determinant(&d, p))
            .collect::<Result<Vec<_>>>()?;
        let mut weak_set = false;
        if let DomainKind::Worm { beta, .. } = d.kind() {
            let ann = worm_annulus(beta);
            let vals = ann
                .iter()
                .map(|p| levi_determinant(&d, p))
                .collect::<Result<Vec<_>>>()?;
            let (lo, hi) = min_max(&vals);
            levi.push(vec![
                id.as_str().into(),
                "annulus".into(),
                ann.len().into(),
                lo.into(),
                hi.into(),
            ]);
            let mesh = ctx.mesh(&d, cfg.resolutions[0], cfg, &mut report)?;
            let nodes = mesh
                .nodes
                .iter()
                .map(|p| levi_determinant(&d, p))
                .collect::<Result<Vec<_>>>()?;
            phi.extend(nodes);
            let (glo, _) = min_max(&phi);
            weak_set = hi.abs().max(lo.abs()) <= tol.levi_annulus;
            report.assert(
                format!("audit.worm-levi.{id}"),
                "the worm is pseudoconvex and weakly pseudoconvex along the annulus",
                weak_set && glo >= tol.levi_global,
                format!(
                    "annulus |φ| ≤ {:.3e}; global minimum {glo:.3e}",
                    hi.abs().max(lo.abs())
                ),
            );
        }
        let (lo, hi) = min_max(&phi);
        levi.push(vec![
            id.as_str().into(),
            "sampled".into(),
            phi.len().into(),
            lo.into(),
            hi.into(),
        ]);
        if !weak_set {
            weak_set = lo.abs() <= tol.levi_annulus;
        }

        if d.is_bounded() {
            let mesh = ctx.mesh(&d, cfg.resolutions[0], cfg, &mut report)?;
            let r = density_ratio_report(&d, &mesh)?;
            ratios.push(vec![
                id.as_str().into(),
                cfg.resolutions[0].into(),
                r.expected_ratio.into(),
                r.ratio_min.into(),
                r.ratio_max.into(),
                r.ratio_median.into(),
                r.spread.into(),
                r.degenerate_nodes.into(),
            ]);
        }

        let convex = inf.value > tol.clinear_positive;
        matrix.push(vec![
            id.as_str().into(),
            d.smoothness().to_string().into(),
            d.claims_strong_clinear_convexity().into(),
            inf.value.into(),
            convex.into(),
            lo.into(),
            (lo >= tol.levi_global).into(),
            weak_set.into(),
        ]);
        match d.kind() {
            DomainKind::Ball { .. } => report.assert(
                format!("audit.clinear.{id}"),
                "the ball is strongly C-linearly convex",
                convex,
                format!(
                    "probe infimum {:.4e} (threshold {})",
                    inf.value, tol.clinear_positive
                ),
            ),
            DomainKind::Ellipsoid { r, q } if r < 2.0 && q == 2.0 => report.assert(
                format!("audit.clinear.{id}"),
                "D_{m,2} with 1 < m < 2 is strongly C-linearly convex",
                convex,
                format!(
                    "probe infimum {:.4e} (threshold {})",
                    inf.value, tol.clinear_positive
                ),
            ),
            DomainKind::Ellipsoid { r, q } if r == 2.0 && q == 4.0 => report.assert(
                format!("audit.clinear.{id}"),
                "D_{2,4} is not strongly C-linearly convex",
                inf.value < tol.clinear_degenerate,
                format!(
                    "infimum {:.4e} along the recorded sequence (threshold {})",
                    inf.value, tol.clinear_degenerate
                ),
            ),
            _ => {}
        }
    }
    report.time("derivative audit", fd_time);
    report.tables.extend([fd, probe, seq, levi, ratios, matrix]);
    Ok(report)
}

fn min_max(v: &[f64]) -> (f64, f64) {
    v.iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| {
            (lo.min(x), hi.max(x))
        })
}
