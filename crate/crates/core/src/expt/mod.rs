//! Named experiments that reproduce worked examples end to end and grade
//! themselves, plus the kernel sweep used for genericity scans.

mod catalog;
pub mod fixtures;
mod sweep;

pub use sweep::{grid_points, sweep_kernel, GridAxis, SweepRow, SweepTable};

use std::fmt;
use std::time::Instant;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::quad::QuadratureConfig;

/// How a metric is graded.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Check {
    /// `value < limit`
    Below { limit: f64 },
    /// `value > limit`
    Above { limit: f64 },
    /// `|value − target| ≤ tol`
    Within { target: f64, tol: f64 },
    /// `value == target`, for counts and flags (1 = true).
    Equals { target: f64 },
}

impl Check {
    pub fn passes(&self, value: f64) -> bool {
        match *self {
            Self::Below { limit } => value < limit,
            Self::Above { limit } => value > limit,
            Self::Within { target, tol } => (value - target).abs() <= tol,
            Self::Equals { target } => value == target,
        }
    }

    /// The tolerance or threshold that decides the check.
    pub fn tolerance(&self) -> f64 {
        match *self {
            Self::Below { limit } | Self::Above { limit } => limit,
            Self::Within { tol, .. } => tol,
            Self::Equals { .. } => 0.0,
        }
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Self::Below { limit } => write!(f, "< {limit:e}"),
            Self::Above { limit } => write!(f, "> {limit:e}"),
            Self::Within { target, tol } => write!(f, "= {target} ± {tol:e}"),
            Self::Equals { target } => write!(f, "== {target}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Metric {
    pub name: String,
    pub value: f64,
    pub check: Check,
    pub tolerance_used: f64,
    pub pass: bool,
}

impl Metric {
    pub fn new(name: impl Into<String>, value: f64, check: Check) -> Self {
        Self {
            name: name.into(),
            value,
            pass: check.passes(value),
            tolerance_used: check.tolerance(),
            check,
        }
    }

    pub fn flag(name: impl Into<String>, ok: bool) -> Self {
        Self::new(name, if ok { 1.0 } else { 0.0 }, Check::Equals { target: 1.0 })
    }
}

/// Row-oriented numeric output.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self { columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentResult {
    pub name: String,
    pub metrics: Vec<Metric>,
    pub pass: bool,
    pub runtime_seconds: f64,
    pub table: Option<Table>,
    /// Set when a numeric error aborted the experiment.
    pub diagnostic: Option<String>,
}

impl ExperimentResult {
    /// The first metric that failed, if any.
    pub fn first_failure(&self) -> Option<&Metric> {
        self.metrics.iter().find(|m| !m.pass)
    }

    pub fn metric(&self, name: &str) -> Option<&Metric> {
        self.metrics.iter().find(|m| m.name == name)
    }
}

/// Settings that replace an experiment's defaults.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct Overrides {
    pub quadrature: Option<QuadratureConfig>,
    /// Probe RNG seed.
    pub seed: Option<u64>,
}

impl Overrides {
    fn quadrature_or(&self, default: QuadratureConfig) -> QuadratureConfig {
        self.quadrature.unwrap_or(default)
    }
}

type Runner = fn(&Overrides) -> Result<(Vec<Metric>, Option<Table>)>;

pub struct CatalogEntry {
    pub name: &'static str,
    pub summary: &'static str,
    run: Runner,
}

impl fmt::Debug for CatalogEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CatalogEntry").field("name", &self.name).finish()
    }
}

pub fn catalog() -> &'static [CatalogEntry] {
    catalog::ENTRIES
}

/// Runs a catalog experiment. Only an unknown name is an error; numeric
/// failures inside the experiment yield `pass = false` and a diagnostic.
pub fn run_experiment(name: &str, overrides: &Overrides) -> Result<ExperimentResult> {
    let entry = catalog()
        .iter()
        .find(|e| e.name == name)
        .ok_or_else(|| Error::UnknownExperiment(name.to_string()))?;
    if let Some(q) = &overrides.quadrature {
        q.validate()?;
    }
    let start = Instant::now();
    let outcome = (entry.run)(overrides);
    let runtime_seconds = start.elapsed().as_secs_f64();
    let (metrics, table, diagnostic) = match outcome {
        Ok((metrics, table)) => (metrics, table, None),
        Err(e) => (vec![Metric::flag("completed", false)], None, Some(e.to_string())),
    };
    Ok(ExperimentResult {
        name: name.to_string(),
        pass: !metrics.is_empty() && metrics.iter().all(|m| m.pass),
        metrics,
        runtime_seconds,
        table,
        diagnostic,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_name() {
        assert_eq!(
            run_experiment("no-such-name", &Overrides::default()),
            Err(Error::UnknownExperiment("no-such-name".into()))
        );
    }

    #[test]
    fn checks() {
        assert!(Check::Below { limit: 1.0 }.passes(0.5));
        assert!(!Check::Below { limit: 1.0 }.passes(1.0));
        assert!(Check::Within { target: 0.5, tol: 1e-6 }.passes(0.5 + 5e-7));
        assert!(!Check::Above { limit: 0.0 }.passes(f64::NAN));
        assert!(!Check::Below { limit: 1.0 }.passes(f64::NAN));
        assert!(Metric::flag("x", true).pass);
    }

    #[test]
    fn catalog_names_are_unique() {
        let mut names: Vec<_> = catalog().iter().map(|e| e.name).collect();
        names.sort();
        names.dedup();
        assert_eq!(names.len(), catalog().len());
        assert_eq!(names.len(), 12);
    }

    #[test]
    fn thresholds_experiment_passes() {
        let r = run_experiment("thresholds", &Overrides::default()).unwrap();
        assert!(r.pass, "{r:?}");
    }

    #[test]
    fn bad_override_is_rejected() {
        let q = QuadratureConfig { rel_tol: -1.0, ..QuadratureConfig::default() };
        let o = Overrides { quadrature: Some(q), seed: None };
        assert!(run_experiment("cauchy-fisher", &o).is_err());
    }
}
