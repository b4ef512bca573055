//! Experiment configuration, runners and deterministic report emission.

mod audit;
mod blowup;
mod bump;
mod config;
mod emit;
mod ks;
mod measures;
mod report;
mod reproduce;

pub use audit::run_geometry_audit;
pub use blowup::run_blowup;
pub use bump::{
    anisotropy_exponents, bump_profile, concentration_ratio, far_set_ratio, transform_on_test_set,
    BumpFamily, BumpLevel,
};
pub use config::{
    ExperimentConfig, ExperimentKind, MaskConfig, OutputConfig, Quadrature, Tolerances,
};
pub use emit::{
    emit, format_float, read_table_csv, report_json, table_csv_string, to_json_string,
    write_table_csv,
};
pub use ks::run_kerzman_stein;
pub use measures::run_measures;
pub use report::{orders, Assertion, Cell, ExperimentReport, Table};
pub use reproduce::{interior_probes, run_reproducing};

use crate::boundary::cache::{load_or_build, mesh_checksum};
use crate::boundary::{BoundaryMesh, MeshOptions};
use crate::error::Result;
use crate::exec::Exec;
use crate::geometry::DomainSpec;
use std::path::PathBuf;
use std::time::Instant;

/// Environment variable naming the mesh cache directory.
pub const CACHE_DIR_VAR: &str = "CLLAB_CACHE_DIR";

/// Shared state of a run: execution policy and mesh cache location.
#[derive(Clone, Debug, Default)]
pub struct RunContext {
    pub exec: Exec,
    pub cache_dir: Option<PathBuf>,
}

impl RunContext {
    pub fn new(exec: Exec, cache_dir: Option<PathBuf>) -> Self {
        Self { exec, cache_dir }
    }

    /// Cache directory taken from `CLLAB_CACHE_DIR` when set.
    pub fn from_env(exec: Exec) -> Self {
        Self::new(exec, std::env::var_os(CACHE_DIR_VAR).map(PathBuf::from))
    }

    /// Builds (or loads) a mesh and records its checksum in the report.
    pub(crate) fn mesh(
        &self,
        d: &DomainSpec,
        resolution: usize,
        cfg: &ExperimentConfig,
        report: &mut ExperimentReport,
    ) -> Result<BoundaryMesh> {
        let mut opts = MeshOptions::new(resolution);
        opts.quadrature = cfg.quadrature.into();
        opts.model_radius = cfg.model_radius;
        let t = Instant::now();
        let mesh = load_or_build(d, &opts, self.exec, self.cache_dir.as_deref())?;
        let label = format!("{}@n{}", d.id(), resolution);
        report.time(format!("mesh {label}"), t.elapsed().as_secs_f64());
        report.mesh_checksums.insert(label, mesh_checksum(&mesh));
        Ok(mesh)
    }
}

/// Runs the experiment named in `cfg.experiment`.
pub fn run(cfg: &ExperimentConfig, ctx: &RunContext) -> Result<ExperimentReport> {
    cfg.validate()?;
    let t = Instant::now();
    let mut report = match cfg.experiment {
        ExperimentKind::Mesh => run_measures(cfg, ctx),
        ExperimentKind::Audit => run_geometry_audit(cfg, ctx),
        ExperimentKind::Reproduce => run_reproducing(cfg, ctx),
        ExperimentKind::Blowup => run_blowup(cfg, ctx),
        ExperimentKind::Ks => run_kerzman_stein(cfg, ctx),
    }?;
    report.time("total", t.elapsed().as_secs_f64());
    Ok(report)
}
