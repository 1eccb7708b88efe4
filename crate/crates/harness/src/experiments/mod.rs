//! The named experiments and the dispatcher that runs them.

use std::time::Instant;

use prfslab_core::keyset::Keyset;
use prfslab_core::rng::{seed_derive, LabRng};
use serde_json::Value;

use crate::config::ExperimentConfig;
use crate::error::{HarnessError, Result};
use crate::report::{ExperimentReport, Findings, ARTIFACT_VERSION};

mod apps;
mod commitment;
mod states;

pub use apps::{CpaDistinguisher, ForgerKind};
pub use commitment::StrategyParams;

/// Reads its parameters, records its findings and returns the parameter
/// echo.
type Experiment = fn(Value, &mut LabRng, &mut Findings) -> Result<Value>;

const REGISTRY: [(&str, Experiment); 14] = [
    ("haar-stats", states::haar_stats),
    ("prefix-concentration", states::prefix_concentration),
    ("prs-game", states::prs_game),
    ("prfs-eval", states::prfs_eval),
    ("orthogonality", states::orthogonality),
    ("self-test", states::self_test),
    ("otp-roundtrip", apps::otp_roundtrip),
    ("otp-security", apps::otp_security),
    ("commit-run", commitment::commit_run),
    ("binding", commitment::binding),
    ("hiding", commitment::hiding),
    ("povm-closeness", commitment::povm_closeness),
    ("cpa-game", apps::cpa_game),
    ("mac-forgery", apps::mac_forgery),
];

/// Names accepted by [`run`].
pub fn experiment_names() -> impl Iterator<Item = &'static str> {
    REGISTRY.iter().map(|(name, _)| *name)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunOptions {
    /// Record `wall_time_ms`. Reports are byte-identical across reruns only
    /// with timing off.
    pub timing: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self { timing: true }
    }
}

/// Runs the configured experiment. Randomness comes from a single stream
/// derived from the seed and the experiment name; experiments fan it out
/// into per-trial streams, so results do not depend on the thread count.
pub fn run(config: &ExperimentConfig, opts: RunOptions) -> Result<ExperimentReport> {
    let experiment = REGISTRY
        .iter()
        .find(|(name, _)| *name == config.experiment)
        .map(|(_, f)| *f)
        .ok_or_else(|| HarnessError::UnknownExperiment(config.experiment.clone()))?;
    let start = Instant::now();
    let mut rng = seed_derive(config.seed, 0, &config.experiment);
    let mut findings = Findings::default();
    let params = experiment(config.params.clone(), &mut rng, &mut findings)?;
    let elapsed = start.elapsed().as_millis() as u64;
    Ok(ExperimentReport {
        experiment: config.experiment.clone(),
        params,
        estimates: findings.estimates,
        series: findings.series,
        pass_fail: findings.pass_fail,
        notes: findings.notes,
        seed: config.seed,
        wall_time_ms: opts.timing.then_some(elapsed),
        artifact_version: ARTIFACT_VERSION.to_owned(),
    })
}

fn positive(name: &str, value: u64) -> Result<()> {
    if value == 0 {
        return Err(HarnessError::params(format!("{name} must be positive")));
    }
    Ok(())
}

fn enumerate() -> Keyset {
    Keyset::Enumerate
}

fn echo<T: serde::Serialize>(value: &T) -> Value {
    serde_json::to_value(value).expect("parameter blocks always serialize")
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn registry_names_are_unique() {
        let mut names: Vec<_> = experiment_names().collect();
        names.sort_unstable();
        names.dedup();
        assert_eq!(names.len(), REGISTRY.len());
    }

    #[test]
    fn unknown_experiment_has_its_own_code() {
        let err = run(&ExperimentConfig::new("nope", json!({}), 0), RunOptions::default()).unwrap_err();
        assert_eq!(err.exit_code(), 4);
    }

    #[test]
    fn zero_trials_is_rejected_before_any_report() {
        let cfg = ExperimentConfig::new("haar-stats", json!({"m": 2, "trials": 0}), 0);
        assert_eq!(run(&cfg, RunOptions::default()).unwrap_err().exit_code(), 5);
    }

    #[test]
    fn unknown_param_keys_are_rejected() {
        for (name, params) in [
            ("haar-stats", json!({"m": 2, "trails": 10})),
            ("orthogonality", json!({"lambda": 2, "d": 1, "n": 2, "slak": 0.1})),
            ("binding", json!({"lambda": 2, "d": 1, "n": 2, "strategy": {"kind": "honest", "bit": false, "x": 1}})),
        ] {
            let err = run(&ExperimentConfig::new(name, params, 0), RunOptions::default()).unwrap_err();
            assert_eq!(err.exit_code(), 5, "{name}: {err}");
        }
    }
}
