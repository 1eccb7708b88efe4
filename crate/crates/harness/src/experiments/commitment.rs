//! Commitment completeness, binding, hiding and extractor statistics.

use std::fmt;
use std::str::FromStr;

use prfslab_core::commitproto::{
    binding_experiment, commit, hiding_report, povm_closeness_stats, reveal_verify, CommitmentParams,
    CommitterStrategy, ExtractorBasis, PauliMode,
};
use prfslab_core::keyset::Keyset;
use prfslab_core::prfsgen::PrfsScheme;
use prfslab_core::prsgen::PrsKey;
use prfslab_core::rng::{par_trials, LabRng};
use prfslab_core::stats::Estimate;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{echo, enumerate};
use crate::config::{merge_echo, parse_params, SchemeParams};
use crate::error::Result;
use crate::report::Findings;

/// Per-instance identities are checked to this tolerance.
const IDENTITY_TOL: f64 = 1e-9;

/// Committer strategies reachable from a config. Keys are given by index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum StrategyParams {
    Honest { bit: bool },
    KeySuperposition { k1: u64, k2: u64, bit: bool },
}

impl StrategyParams {
    pub fn build(&self, scheme: &PrfsScheme) -> Result<CommitterStrategy> {
        Ok(match *self {
            StrategyParams::Honest { bit } => CommitterStrategy::Honest { bit },
            StrategyParams::KeySuperposition { k1, k2, bit } => CommitterStrategy::KeySuperposition {
                k1: PrsKey::from_index(k1, scheme.key_bits())?,
                k2: PrsKey::from_index(k2, scheme.key_bits())?,
                bit,
            },
        })
    }
}

fn parse_bit(s: &str) -> std::result::Result<bool, String> {
    match s {
        "0" => Ok(false),
        "1" => Ok(true),
        _ => Err(format!("'{s}' is not a bit")),
    }
}

/// `honest:<b>` or `sup:<k1>,<k2>,<b>`.
impl FromStr for StrategyParams {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        if let Some(b) = s.strip_prefix("honest:") {
            return Ok(StrategyParams::Honest { bit: parse_bit(b)? });
        }
        if let Some(rest) = s.strip_prefix("sup:") {
            let parts: Vec<&str> = rest.split(',').collect();
            if let [k1, k2, b] = parts.as_slice() {
                let key = |k: &str| k.parse::<u64>().map_err(|e| format!("key index '{k}': {e}"));
                return Ok(StrategyParams::KeySuperposition {
                    k1: key(k1)?,
                    k2: key(k2)?,
                    bit: parse_bit(b)?,
                });
            }
        }
        Err(format!("unknown strategy '{s}' (honest:<b>, sup:<k1>,<k2>,<b>)"))
    }
}

impl fmt::Display for StrategyParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StrategyParams::Honest { bit } => write!(f, "honest:{}", *bit as u8),
            StrategyParams::KeySuperposition { k1, k2, bit } => write!(f, "sup:{k1},{k2},{}", *bit as u8),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct CommitRun {
    keyset: Keyset,
    paulis: PauliMode,
    min_completeness: f64,
    /// Also open every commitment to the other bit.
    wrong_bit: bool,
}

impl Default for CommitRun {
    fn default() -> Self {
        Self {
            keyset: enumerate(),
            paulis: PauliMode::Sample { count: 100 },
            min_completeness: 0.95,
            wrong_bit: true,
        }
    }
}

pub(super) fn commit_run(params: Value, rng: &mut LabRng, out: &mut Findings) -> Result<Value> {
    let (sp, rest) = SchemeParams::split(params)?;
    let p: CommitRun = parse_params(rest)?;
    let scheme = sp.build()?;
    let cp = CommitmentParams::from_scheme(&scheme)?;
    let keys = p.keyset.keys(scheme.key_bits())?;
    let paulis = p.paulis.paulis(cp.m, rng)?;
    let per = par_trials((keys.len() * paulis.len()) as u64, |i| {
        let (key, pauli) = (&keys[i as usize / paulis.len()], &paulis[i as usize % paulis.len()]);
        let mut right = [0.0; 2];
        let mut wrong = [0.0; 2];
        for b in [false, true] {
            let c = commit(&cp, &scheme, key, b, pauli)?;
            right[b as usize] = reveal_verify(&cp, &scheme, pauli, &c, key, b)?.p_accept;
            if p.wrong_bit {
                wrong[b as usize] = reveal_verify(&cp, &scheme, pauli, &c, key, !b)?.p_accept;
            }
        }
        Ok((right, wrong))
    })?;
    let right: Vec<f64> = per.iter().flat_map(|(r, _)| *r).collect();
    let completeness = Estimate::mean(&right);
    out.estimate("completeness", completeness);
    if p.wrong_bit {
        let wrong: Vec<f64> = per.iter().flat_map(|(_, w)| *w).collect();
        out.estimate("wrong_bit_accept", Estimate::mean(&wrong));
    }
    out.at_least("completeness", completeness.value, p.min_completeness);
    Ok(merge_echo(&sp, echo(&p)))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct Binding {
    strategy: StrategyParams,
    /// Keyspace spanned by the extractor.
    keyset: Keyset,
    paulis: PauliMode,
}

impl Default for Binding {
    fn default() -> Self {
        Self {
            strategy: StrategyParams::Honest { bit: false },
            keyset: enumerate(),
            paulis: PauliMode::Enumerate,
        }
    }
}

pub(super) fn binding(params: Value, rng: &mut LabRng, out: &mut Findings) -> Result<Value> {
    let (sp, rest) = SchemeParams::split(params)?;
    let p: Binding = parse_params(rest)?;
    let scheme = sp.build()?;
    let keys = p.keyset.keys(scheme.key_bits())?;
    let strategy = p.strategy.build(&scheme)?;
    let r = binding_experiment(&scheme, &strategy, &keys, &p.paulis, rng)?;
    for (name, v) in [
        ("td_real_ideal", r.td_real_ideal),
        ("mu", r.mu),
        ("chain_bound", r.chain_bound),
        ("proof_bound", r.proof_bound),
        ("mu_bound", r.mu_bound),
        ("mean_p", r.mean_p),
        ("asymptotic_bound", r.asymptotic_bound),
        ("span_rank", r.span_rank as f64),
        ("paulis", r.paulis as f64),
    ] {
        out.exact(name, v);
    }
    out.series("real_weights", r.real_weights.to_vec());
    out.series("ideal_weights", r.ideal_weights.to_vec());
    let real: f64 = r.real_weights.iter().sum();
    let ideal: f64 = r.ideal_weights.iter().sum();
    out.at_most("real_weight_defect", (real - 1.0).abs(), IDENTITY_TOL);
    out.at_most("ideal_weight_defect", (ideal - 1.0).abs(), IDENTITY_TOL);
    out.at_most("td_minus_chain_bound", r.td_real_ideal - r.chain_bound, IDENTITY_TOL);
    out.at_most("chain_minus_proof_bound", r.chain_bound - r.proof_bound, IDENTITY_TOL);
    out.at_most("max_absorption_defect", r.max_absorption_defect, IDENTITY_TOL);
    out.at_most("max_ideal_accept_defect", r.max_ideal_accept_defect, IDENTITY_TOL);
    if let StrategyParams::Honest { .. } = p.strategy {
        if matches!(p.paulis, PauliMode::Enumerate) {
            out.at_most("mu", r.mu, r.mu_bound + IDENTITY_TOL);
        } else {
            out.note("mu is compared with 2^(λ-m) only under full enumeration of challenges");
        }
    }
    if r.binding_regime && r.asymptotic_bound < 1.0 {
        out.at_most("td_asymptotic", r.td_real_ideal, r.asymptotic_bound);
    } else {
        out.note(format!(
            "asymptotic bound 8·2^(-(m-4λ)/3) + 2·2^(-(m-λ)) = {:.4} is not asserted (m >= 7λ: {})",
            r.asymptotic_bound, r.binding_regime
        ));
    }
    Ok(merge_echo(&sp, echo(&p)))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct Hiding {
    keyset: Keyset,
    paulis: PauliMode,
    #[serde(skip_serializing_if = "Option::is_none")]
    max_mean: Option<f64>,
}

impl Default for Hiding {
    fn default() -> Self {
        Self {
            keyset: enumerate(),
            paulis: PauliMode::Sample { count: 16 },
            max_mean: None,
        }
    }
}

pub(super) fn hiding(params: Value, rng: &mut LabRng, out: &mut Findings) -> Result<Value> {
    let (sp, rest) = SchemeParams::split(params)?;
    let p: Hiding = parse_params(rest)?;
    let scheme = sp.build()?;
    let keys = p.keyset.keys(scheme.key_bits())?;
    let r = hiding_report(&scheme, &keys, &p.paulis, rng)?;
    let mean = Estimate::mean(&r.per_pauli);
    out.estimate("hiding_distance", mean);
    out.series("per_pauli", r.per_pauli);
    if let Some(max) = p.max_mean {
        out.at_most("hiding_distance", mean.value, max);
    }
    Ok(merge_echo(&sp, echo(&p)))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct PovmCloseness {
    keyset: Keyset,
    paulis: PauliMode,
    /// Check completeness, positivity and `Π1 = P Π0 P†` on every challenge.
    check_defects: bool,
}

impl Default for PovmCloseness {
    fn default() -> Self {
        Self {
            keyset: enumerate(),
            paulis: PauliMode::Sample { count: 200 },
            check_defects: true,
        }
    }
}

pub(super) fn povm_closeness(params: Value, rng: &mut LabRng, out: &mut Findings) -> Result<Value> {
    let (sp, rest) = SchemeParams::split(params)?;
    let p: PovmCloseness = parse_params(rest)?;
    let scheme = sp.build()?;
    let cp = CommitmentParams::from_scheme(&scheme)?;
    let keys = p.keyset.keys(scheme.key_bits())?;
    let paulis = p.paulis.paulis(cp.m, rng)?;
    let r = povm_closeness_stats(&scheme, &keys, &PauliMode::Explicit { paulis: paulis.clone() }, rng)?;
    out.estimate("p", Estimate::mean(&r.p_values));
    out.estimate("overlap_trace", Estimate::mean(&r.overlap_traces));
    out.exact("max_p", r.max_p);
    out.exact("span_rank", r.span_rank as f64);
    out.exact("predicted_mean_overlap_trace", r.predicted_mean_overlap_trace);
    out.exact("overlap_trace_bound", r.overlap_trace_bound);
    out.exact("max_bound_excess", r.max_bound_excess);
    out.exact("lemma_threshold", r.lemma_threshold);
    out.exact("lemma_probability_bound", r.lemma_probability_bound);
    out.exact("exceed_fraction", r.exceed_fraction);
    out.series("p_values", r.p_values.clone());
    out.series("overlap_traces", r.overlap_traces.clone());
    out.at_most("max_bound_excess", r.max_bound_excess, IDENTITY_TOL);
    if matches!(p.paulis, PauliMode::Enumerate) {
        out.at_most(
            "mean_overlap_trace_deviation",
            (r.mean_overlap_trace - r.predicted_mean_overlap_trace).abs(),
            IDENTITY_TOL,
        );
    }
    if p.check_defects {
        let basis = ExtractorBasis::build(&cp, &scheme, &keys)?;
        let defects = par_trials(paulis.len() as u64, |i| basis.povm(&paulis[i as usize])?.defect())?;
        out.at_most(
            "max_povm_defect",
            defects.iter().copied().fold(0.0, f64::max),
            IDENTITY_TOL,
        );
    }
    if r.lemma_vacuous {
        out.note(format!(
            "Pr[p >= {:.4}] <= {:.4} is vacuous at m = {}, λ = {}",
            r.lemma_threshold, r.lemma_probability_bound, cp.m, cp.lambda
        ));
    } else {
        out.at_most("exceed_fraction", r.exceed_fraction, r.lemma_probability_bound);
    }
    Ok(merge_echo(&sp, echo(&p)))
}
