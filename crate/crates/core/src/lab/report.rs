use super::config::ExperimentConfig;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// One table cell. Serialized untagged, so JSON carries plain numbers and
/// strings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Cell {
    Int(i64),
    Num(f64),
    Text(String),
    Flag(bool),
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<u32> for Cell {
    fn from(v: u32) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Flag(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: impl Into<String>, columns: &[&str]) -> Self {
        Self {
            name: name.into(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(
            row.len(),
            self.columns.len(),
            "row width of table {}",
            self.name
        );
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }
}

/// A pass/fail flag tied to a named invariant of the lab.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Assertion {
    pub name: String,
    pub invariant: String,
    pub passed: bool,
    pub detail: String,
}

/// Deterministic result of one experiment. Wall-clock times are kept out of
/// the serialized report so that reruns are byte-identical.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub experiment: String,
    pub config: ExperimentConfig,
    /// Mesh label → SHA-256 of its cache encoding.
    pub mesh_checksums: BTreeMap<String, String>,
    pub scalars: BTreeMap<String, f64>,
    pub tables: Vec<Table>,
    pub assertions: Vec<Assertion>,
    pub passed: bool,
    #[serde(skip)]
    pub timings: BTreeMap<String, f64>,
}

impl ExperimentReport {
    pub fn new(config: &ExperimentConfig) -> Self {
        Self {
            experiment: config.experiment.name().to_string(),
            config: config.clone(),
            mesh_checksums: BTreeMap::new(),
            scalars: BTreeMap::new(),
            tables: Vec::new(),
            assertions: Vec::new(),
            passed: true,
            timings: BTreeMap::new(),
        }
    }

    pub fn assert(
        &mut self,
        name: impl Into<String>,
        invariant: &str,
        passed: bool,
        detail: impl Into<String>,
    ) {
        let (name, detail) = (name.into(), detail.into());
        if passed {
            log::info!("pass {name}: {detail}");
        } else {
            log::warn!("FAIL {name}: {detail}");
        }
        self.passed &= passed;
        self.assertions.push(Assertion {
            name,
            invariant: invariant.to_string(),
            passed,
            detail,
        });
    }

    pub fn scalar(&mut self, name: impl Into<String>, value: f64) {
        self.scalars.insert(name.into(), value);
    }

    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }

    pub fn assertion(&self, name: &str) -> Option<&Assertion> {
        self.assertions.iter().find(|a| a.name == name)
    }

    /// Assertions whose name starts with `prefix`; true when all pass and at
    /// least one exists.
    pub fn all_pass(&self, prefix: &str) -> bool {
        let mut any = false;
        for a in self
            .assertions
            .iter()
            .filter(|a| a.name.starts_with(prefix))
        {
            any = true;
            if !a.passed {
                return false;
            }
        }
        any
    }

    pub fn time(&mut self, name: impl Into<String>, seconds: f64) {
        self.timings.insert(name.into(), seconds);
    }
}

/// Empirical convergence orders log(eₖ/eₖ₊₁)/log(hₖ/hₖ₊₁) for successive
/// levels with mesh widths proportional to 1/resolution.
pub fn orders(resolutions: &[usize], errors: &[f64]) -> Vec<f64> {
    resolutions
        .windows(2)
        .zip(errors.windows(2))
        .map(|(r, e)| (e[0] / e[1]).ln() / (r[1] as f64 / r[0] as f64).ln())
        .collect()
}

pub(crate) fn sci_list(v: &[f64]) -> String {
    let items: Vec<String> = v.iter().map(|x| format!("{x:.3e}")).collect();
    format!("[{}]", items.join(", "))
}
