use super::report::{orders, sci_list, ExperimentReport, Table};
use super::{ExperimentConfig, RunContext};
use crate::boundary::BoundaryMesh;
use crate::cpoint::{CPoint2, C64};
use crate::error::{LabError, Result};
use crate::geometry::{parse_domain_id, DomainSpec};
use crate::operators::{apply_interior, dbar_check, monomial, BoundaryFunction, KernelKind};
use crate::Exec;

/// Required distance from an interior probe to the boundary.
pub const PROBE_CLEARANCE: f64 = 0.3;
/// Number of interior probes per domain.
pub const PROBE_COUNT: usize = 5;

const CANDIDATES: [[f64; 4]; 9] = [
    [0.0, 0.0, 0.0, 0.0],
    [0.3, 0.1, 0.2, -0.1],
    [-0.2, 0.3, 0.1, 0.2],
    [0.1, -0.2, -0.3, 0.1],
    [0.0, 0.2, 0.2, 0.3],
    [0.15, 0.15, -0.15, -0.15],
    [-0.1, -0.1, 0.3, 0.0],
    [0.2, 0.0, 0.0, 0.2],
    [0.0, -0.25, 0.0, -0.25],
];

/// The first [`PROBE_COUNT`] fixed candidates whose distance to the mesh
/// nodes is at least `PROBE_CLEARANCE` plus half a cell diameter, so that the
/// true distance to bD is at least the clearance.
pub fn interior_probes(d: &DomainSpec, mesh: &BoundaryMesh) -> Result<Vec<CPoint2>> {
    let margin = PROBE_CLEARANCE + 0.5 * mesh.max_cell_diameter();
    let mut out = Vec::new();
    for x in CANDIDATES {
        let z = CPoint2::from_real(x);
        if d.rho(&z)? >= 0.0 {
            continue;
        }
        let dist = mesh
            .nodes
            .iter()
            .map(|w| w.dist(&z))
            .fold(f64::INFINITY, f64::min);
        if dist >= margin {
            out.push(z);
        }
        if out.len() == PROBE_COUNT {
            return Ok(out);
        }
    }
    Err(LabError::InvalidParameter(format!(
        "only {} interior probes with clearance {PROBE_CLEARANCE} on {}",
        out.len(),
        d.id()
    )))
}

fn monomials() -> Vec<(u32, u32)> {
    (0..=3u32)
        .flat_map(|a| (0..=3 - a).map(move |b| (a, b)))
        .collect()
}

fn transform(
    kernel: KernelKind,
    d: &DomainSpec,
    mesh: &BoundaryMesh,
    f: &BoundaryFunction,
    z: &CPoint2,
    exec: Exec,
) -> Result<C64> {
    Ok(apply_interior(kernel, d, mesh, f, z, exec)?.value)
}

/// Cauchy-Leray reproduction of monomials of degree ≤ 3 at interior probes
/// under refinement, and the holomorphy contrast between Cauchy-Leray and
/// Bochner-Martinelli outputs of conj(z₁) at the finest level.
pub fn run_reproducing(cfg: &ExperimentConfig, ctx: &RunContext) -> Result<ExperimentReport> {
    let mut report = ExperimentReport::new(cfg);
    let tol = cfg.tolerances.clone();
    let mut per_mono = Table::new(
        "monomial_errors",
        &["domain", "resolution", "a", "b", "max_error"],
    );
    let mut errors = Table::new(
        "errors",
        &["domain", "resolution", "nodes", "max_error", "order"],
    );
    let mut probes_tab = Table::new("probes", &["domain", "x1", "y1", "x2", "y2", "rho"]);
    let mut contrast = Table::new(
        "holomorphy_contrast",
        &[
            "domain",
            "resolution",
            "probe",
            "cl_dbar",
            "bm_dbar",
            "bm_value_re",
            "bm_value_im",
        ],
    );
    for id in &cfg.domains {
        let d = parse_domain_id(id)?;
        let mut meshes = Vec::new();
        for &n in &cfg.resolutions {
            meshes.push(ctx.mesh(&d, n, cfg, &mut report)?);
        }
        let finest = meshes.last().ok_or(LabError::EmptyMask)?;
        let probes = interior_probes(&d, finest)?;
        for z in &probes {
            let x = z.to_real();
            probes_tab.push(vec![
                id.as_str().into(),
                x[0].into(),
                x[1].into(),
                x[2].into(),
                x[3].into(),
                d.rho(z)?.into(),
            ]);
        }

        let mut errs = Vec::new();
        for (mesh, &n) in meshes.iter().zip(&cfg.resolutions) {
            let mut worst = 0.0f64;
            for (a, b) in monomials() {
                let f = BoundaryFunction::from_fn(mesh, monomial(a, b))?;
                let mut e = 0.0f64;
                for z in &probes {
                    let v = transform(KernelKind::CauchyLeray, &d, mesh, &f, z, ctx.exec)?;
                    e = e.max((v - monomial(a, b)(z)).norm());
                }
                per_mono.push(vec![
                    id.as_str().into(),
                    n.into(),
                    a.into(),
                    b.into(),
                    e.into(),
                ]);
                worst = worst.max(e);
            }
            errs.push(worst);
            errors.push(vec![
                id.as_str().into(),
                n.into(),
                mesh.len().into(),
                worst.into(),
                f64::NAN.into(),
            ]);
        }
        let ords = orders(&cfg.resolutions, &errs);
        let first = errors.rows.len() - errs.len();
        for (k, o) in ords.iter().enumerate() {
            errors.rows[first + k + 1][4] = (*o).into();
        }
        let last = errs[errs.len() - 1];
        report.scalar(format!("reproduce.final_error.{id}"), last);
        let decreasing = errs.windows(2).all(|w| w[1] < w[0]);
        report.assert(
            format!("reproduce.decreasing.{id}"),
            "the Cauchy-Leray error on monomials decreases under refinement",
            decreasing && errs.len() >= 3,
            format!("max errors {}", sci_list(&errs)),
        );
        let min_order = ords.iter().copied().fold(f64::INFINITY, f64::min);
        report.assert(
            format!("reproduce.order.{id}"),
            "the Cauchy-Leray error on monomials converges with order at least one",
            min_order >= tol.min_order,
            format!("orders {ords:.3?} (minimum required {})", tol.min_order),
        );
        if d.id() == "ball" {
            report.assert(
                format!("reproduce.final.{id}"),
                "the finest-level error on the ball is within tolerance",
                last <= tol.reproduce_final,
                format!(
                    "final error {last:.3e} (tolerance {:.1e})",
                    tol.reproduce_final
                ),
            );
        }

        // Cauchy-Leray outputs are holomorphic in z for any input; the
        // Bochner-Martinelli output of an antiholomorphic input is not.
        let n = cfg.resolutions[cfg.resolutions.len() - 1];
        let f = BoundaryFunction::from_fn(finest, |p| p.z1.conj())?;
        let (mut cl_max, mut bm_min) = (0.0f64, f64::INFINITY);
        for (k, z) in probes.iter().enumerate() {
            let cl = dbar_check(
                &d,
                |p| transform(KernelKind::CauchyLeray, &d, finest, &f, p, ctx.exec),
                z,
                tol.dbar_step,
            )?;
            let bm = dbar_check(
                &d,
                |p| transform(KernelKind::BochnerMartinelli, &d, finest, &f, p, ctx.exec),
                z,
                tol.dbar_step,
            )?;
            let v = transform(KernelKind::BochnerMartinelli, &d, finest, &f, z, ctx.exec)?;
            contrast.push(vec![
                id.as_str().into(),
                n.into(),
                k.into(),
                cl.into(),
                bm.into(),
                v.re.into(),
                v.im.into(),
            ]);
            cl_max = cl_max.max(cl);
            bm_min = bm_min.min(bm);
        }
        report.assert(
            format!("holomorphy.cauchy-leray.{id}"),
            "Cauchy-Leray outputs pass the dbar check",
            cl_max <= tol.dbar_holomorphic,
            format!(
                "max |dbar| {cl_max:.3e} (tolerance {:.1e})",
                tol.dbar_holomorphic
            ),
        );
        report.assert(
            format!("holomorphy.bochner-martinelli.{id}"),
            "the Bochner-Martinelli output of conj(z1) fails the dbar check",
            bm_min >= tol.dbar_contrast,
            format!(
                "min |dbar| {bm_min:.3e} (threshold {:.1e})",
                tol.dbar_contrast
            ),
        );
    }
    report
        .tables
        .extend([errors, per_mono, probes_tab, contrast]);
    Ok(report)
}
