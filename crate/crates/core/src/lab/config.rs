use crate::boundary::QuadratureRule;
use crate::error::{LabError, Result};
use crate::geometry::parse_domain_id;
use crate::operators::{DiagonalPolicy, MeasureTag};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::path::{Path, PathBuf};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Mesh,
    Audit,
    Reproduce,
    Blowup,
    Ks,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 5] = [
        ExperimentKind::Mesh,
        ExperimentKind::Audit,
        ExperimentKind::Reproduce,
        ExperimentKind::Blowup,
        ExperimentKind::Ks,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Mesh => "mesh",
            ExperimentKind::Audit => "audit",
            ExperimentKind::Reproduce => "reproduce",
            ExperimentKind::Blowup => "blowup",
            ExperimentKind::Ks => "ks",
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Quadrature {
    Midpoint,
    GaussLegendre,
}

impl From<Quadrature> for QuadratureRule {
    fn from(q: Quadrature) -> Self {
        match q {
            Quadrature::Midpoint => QuadratureRule::Midpoint,
            Quadrature::GaussLegendre => QuadratureRule::GaussLegendre,
        }
    }
}

/// Bump and test-set geometry for the concentration experiment, in the
/// scaled chart coordinates of the bump.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MaskConfig {
    /// Bump support is the scaled ball of this radius.
    pub support_radius: f64,
    /// Test set: scaled radius ≥ this (must exceed `support_radius`).
    pub test_inner_radius: f64,
    /// Test patch half width (scaled cube).
    pub test_half_width: f64,
    /// Nodes per axis on the support patch and on the test patch.
    pub support_nodes: usize,
    pub test_nodes: usize,
    /// Prefactors of the three axis scales (Re T, Im T, iν).
    pub axis_prefactors: [f64; 3],
    /// Adaptive refinement of support cells close to a test point.
    pub refine_ratio: f64,
    pub refine_depth: u32,
    /// Fixed far set of the global mesh: Euclidean distance from the bump
    /// center at least this.
    pub far_distance: f64,
    /// Resolution of the global mesh carrying the fixed far set.
    pub far_resolution: usize,
}

impl Default for MaskConfig {
    fn default() -> Self {
        Self {
            support_radius: 1.0,
            test_inner_radius: 2.0,
            test_half_width: 3.0,
            support_nodes: 16,
            test_nodes: 16,
            axis_prefactors: [1.0, 0.5, 1.0],
            refine_ratio: 1.0,
            refine_depth: 4,
            far_distance: 0.5,
            far_resolution: 6,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    pub reproduce_final: f64,
    pub min_order: f64,
    pub ks_a_max: f64,
    /// Absolute slack in "‖A‖ non-increasing".
    pub ks_monotone_slack: f64,
    pub ks_projection: f64,
    /// Required last/first growth of R on the counterexamples.
    pub blowup_growth_min: f64,
    /// Allowed max/min variation of R on the control domain.
    pub blowup_control_max: f64,
    pub dbar_holomorphic: f64,
    pub dbar_contrast: f64,
    pub dbar_step: f64,
    pub sigma_total: f64,
    pub density_ratio: f64,
    pub clinear_positive: f64,
    pub clinear_degenerate: f64,
    pub levi_annulus: f64,
    pub levi_global: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            reproduce_final: 1e-3,
            min_order: 1.0,
            ks_a_max: 0.5,
            ks_monotone_slack: 1e-12,
            ks_projection: 1e-3,
            blowup_growth_min: 1.05,
            blowup_control_max: 2.0,
            dbar_holomorphic: 1e-4,
            dbar_contrast: 1e-2,
            dbar_step: 1e-4,
            sigma_total: 1e-3,
            density_ratio: 1e-6,
            clinear_positive: 0.05,
            clinear_degenerate: 1e-3,
            levi_annulus: 1e-6,
            levi_global: -1e-8,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    /// Directory for report files; the command line may override it.
    pub dir: Option<PathBuf>,
    pub json: bool,
    pub csv: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            dir: None,
            json: true,
            csv: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub domains: Vec<String>,
    /// Control domain of the concentration experiment.
    #[serde(default)]
    pub control: Option<String>,
    pub resolutions: Vec<usize>,
    #[serde(default = "default_p_values")]
    pub p_values: Vec<f64>,
    #[serde(default = "default_deltas")]
    pub deltas: Vec<f64>,
    #[serde(default)]
    pub masks: MaskConfig,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub diagonal: DiagonalPolicy,
    #[serde(default = "default_measures")]
    pub measures: Vec<MeasureTag>,
    #[serde(default = "default_quadrature")]
    pub quadrature: Quadrature,
    #[serde(default = "default_model_radius")]
    pub model_radius: f64,
    #[serde(default = "default_audit_points")]
    pub audit_points: usize,
    #[serde(default = "default_degree")]
    pub szego_degree: u32,
    #[serde(default = "default_node_cap")]
    pub node_cap: usize,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default)]
    pub seed: u64,
}

fn default_p_values() -> Vec<f64> {
    vec![1.5, 2.0, 4.0]
}

fn default_deltas() -> Vec<f64> {
    vec![0.16, 0.08, 0.04, 0.02]
}

fn default_measures() -> Vec<MeasureTag> {
    vec![MeasureTag::Sigma, MeasureTag::LerayLevi]
}

fn default_quadrature() -> Quadrature {
    Quadrature::Midpoint
}

fn default_model_radius() -> f64 {
    4.0
}

fn default_audit_points() -> usize {
    128
}

fn default_degree() -> u32 {
    8
}

fn default_node_cap() -> usize {
    crate::operators::DEFAULT_NODE_CAP
}

impl ExperimentConfig {
    /// The default configuration of each experiment.
    pub fn default_for(kind: ExperimentKind) -> Self {
        let (domains, control, resolutions): (Vec<&str>, Option<&str>, Vec<usize>) = match kind {
            ExperimentKind::Mesh => (vec!["ball"], None, vec![4, 8, 16]),
            ExperimentKind::Audit => (crate::geometry::CATALOG_IDS.to_vec(), None, vec![4]),
            ExperimentKind::Reproduce => {
                (vec!["ball", "ellipsoid:r=1.5,q=2"], None, vec![4, 8, 16])
            }
            ExperimentKind::Blowup => (
                vec!["ellipsoid:r=2,q=4", "ellipsoid:r=1.5,q=2"],
                Some("ball"),
                vec![1],
            ),
            ExperimentKind::Ks => (vec!["ball"], None, vec![1, 2, 3]),
        };
        Self {
            experiment: kind,
            domains: domains.into_iter().map(String::from).collect(),
            control: control.map(String::from),
            resolutions,
            p_values: default_p_values(),
            deltas: default_deltas(),
            masks: MaskConfig::default(),
            tolerances: Tolerances::default(),
            diagonal: DiagonalPolicy::default(),
            measures: default_measures(),
            quadrature: default_quadrature(),
            model_radius: default_model_radius(),
            audit_points: default_audit_points(),
            szego_degree: default_degree(),
            node_cap: default_node_cap(),
            output: OutputConfig::default(),
            seed: 0,
        }
    }

    pub fn from_toml_str(s: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(s).map_err(|e| LabError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| LabError::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(LabError::Config(m));
        if self.domains.is_empty() {
            return bad("domains must be nonempty".into());
        }
        for id in self.domains.iter().chain(self.control.iter()) {
            parse_domain_id(id)?;
        }
        if self.resolutions.is_empty() || self.resolutions.contains(&0) {
            return bad(format!(
                "resolutions must be nonempty and positive: {:?}",
                self.resolutions
            ));
        }
        if self.p_values.is_empty() || self.p_values.iter().any(|p| !(*p >= 1.0 && p.is_finite())) {
            return bad(format!(
                "p values must be nonempty and in [1, inf): {:?}",
                self.p_values
            ));
        }
        if self.deltas.is_empty() || self.deltas.iter().any(|d| !(*d > 0.0)) {
            return bad(format!(
                "deltas must be nonempty and positive: {:?}",
                self.deltas
            ));
        }
        if self.deltas.windows(2).any(|w| w[1] >= w[0]) {
            return bad(format!(
                "deltas must be strictly decreasing: {:?}",
                self.deltas
            ));
        }
        if self.measures.is_empty() {
            return bad("measures must be nonempty".into());
        }
        let m = &self.masks;
        if !(m.support_radius > 0.0 && m.test_inner_radius > m.support_radius) {
            return bad(format!(
                "test set radius {} must exceed the support radius {}",
                m.test_inner_radius, m.support_radius
            ));
        }
        if m.test_half_width < m.test_inner_radius || m.support_nodes == 0 || m.test_nodes == 0 {
            return bad(
                "test patch must contain the test radius and node counts must be positive".into(),
            );
        }
        if m.axis_prefactors.iter().any(|a| !(*a > 0.0)) {
            return bad(format!(
                "axis prefactors must be positive: {:?}",
                m.axis_prefactors
            ));
        }
        if !(self.model_radius > 0.0) {
            return bad(format!("model radius {}", self.model_radius));
        }
        if self.audit_points == 0 {
            return bad("audit points must be positive".into());
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate_and_roundtrip_through_toml() {
        for kind in ExperimentKind::ALL {
            let cfg = ExperimentConfig::default_for(kind);
            cfg.validate().unwrap();
            let back = ExperimentConfig::from_toml_str(&cfg.to_toml_string().unwrap()).unwrap();
            assert_eq!(back, cfg);
        }
    }

    #[test]
    fn minimal_file_takes_defaults() {
        let cfg = ExperimentConfig::from_toml_str(
            r#"
            experiment = "reproduce"
            domains = ["ball"]
            resolutions = [2, 4]
            "#,
        )
        .unwrap();
        assert_eq!(cfg.p_values, vec![1.5, 2.0, 4.0]);
        assert_eq!(cfg.tolerances, Tolerances::default());
    }

    #[test]
    fn rejects_bad_lists_and_unknown_keys() {
        let base = "experiment = \"blowup\"\ndomains = [\"ball\"]\nresolutions = [1]\n";
        assert!(ExperimentConfig::from_toml_str(&format!("{base}deltas = [0.1, 0.2]\n")).is_err());
        assert!(ExperimentConfig::from_toml_str(&format!("{base}deltas = []\n")).is_err());
        assert!(ExperimentConfig::from_toml_str(&format!("{base}colour = 3\n")).is_err());
        assert!(ExperimentConfig::from_toml_str(
            "experiment = \"ks\"\ndomains = []\nresolutions = [1]\n"
        )
        .is_err());
        assert!(ExperimentConfig::from_toml_str(
            "experiment = \"ks\"\ndomains = [\"torus\"]\nresolutions = [1]\n"
        )
        .is_err());
    }
}
