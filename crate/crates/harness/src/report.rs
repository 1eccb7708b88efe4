//! The JSON report every experiment emits.

use std::collections::BTreeMap;

use prfslab_core::stats::Estimate;
use serde::{Deserialize, Serialize};
use serde_json::Value;

/// Version stamped into every report.
pub const ARTIFACT_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    #[serde(rename = "<=")]
    AtMost,
    #[serde(rename = ">=")]
    AtLeast,
}

/// One declared threshold and whether the measured value met it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub passed: bool,
    pub value: f64,
    pub threshold: f64,
    pub relation: Relation,
}

impl Check {
    pub fn new(value: f64, relation: Relation, threshold: f64) -> Self {
        let passed = match relation {
            Relation::AtMost => value <= threshold,
            Relation::AtLeast => value >= threshold,
        };
        Self {
            passed,
            value,
            threshold,
            relation,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentReport {
    pub experiment: String,
    /// Parameters as the experiment read them, defaults filled in.
    pub params: Value,
    pub estimates: BTreeMap<String, Estimate>,
    /// Raw per-instance values, for external plotting.
    pub series: BTreeMap<String, Vec<f64>>,
    pub pass_fail: BTreeMap<String, Check>,
    pub notes: Vec<String>,
    pub seed: u64,
    /// `None` when timing is disabled.
    pub wall_time_ms: Option<u64>,
    pub artifact_version: String,
}

impl ExperimentReport {
    /// True when every declared threshold passed.
    pub fn passed(&self) -> bool {
        self.pass_fail.values().all(|c| c.passed)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports always serialize");
        s.push('\n');
        s
    }
}

/// What an experiment fills in; the runner adds the bookkeeping fields.
#[derive(Debug, Default)]
pub struct Findings {
    pub estimates: BTreeMap<String, Estimate>,
    pub series: BTreeMap<String, Vec<f64>>,
    pub pass_fail: BTreeMap<String, Check>,
    pub notes: Vec<String>,
}

impl Findings {
    pub fn estimate(&mut self, name: &str, e: Estimate) {
        self.estimates.insert(name.to_owned(), e);
    }

    pub fn exact(&mut self, name: &str, value: f64) {
        self.estimate(name, Estimate::exact(value));
    }

    pub fn series(&mut self, name: &str, values: Vec<f64>) {
        self.series.insert(name.to_owned(), values);
    }

    pub fn at_most(&mut self, name: &str, value: f64, threshold: f64) {
        self.pass_fail
            .insert(name.to_owned(), Check::new(value, Relation::AtMost, threshold));
    }

    pub fn at_least(&mut self, name: &str, value: f64, threshold: f64) {
        self.pass_fail
            .insert(name.to_owned(), Check::new(value, Relation::AtLeast, threshold));
    }

    pub fn note(&mut self, text: impl Into<String>) {
        self.notes.push(text.into());
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn checks_compare_inclusively() {
        assert!(Check::new(1.0, Relation::AtMost, 1.0).passed);
        assert!(!Check::new(1.1, Relation::AtMost, 1.0).passed);
        assert!(Check::new(0.95, Relation::AtLeast, 0.95).passed);
        assert!(!Check::new(f64::NAN, Relation::AtLeast, 0.0).passed);
    }

    #[test]
    fn relation_serializes_as_symbol() {
        assert_eq!(serde_json::to_string(&Relation::AtMost).unwrap(), "\"<=\"");
    }
}
