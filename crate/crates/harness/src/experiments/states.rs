//! Haar statistics, generator games and the generator-level checks.

use prfslab_core::games::{constant, swap_test_on};
use prfslab_core::haarlab;
use prfslab_core::keyset::Keyset;
use prfslab_core::prfsgen::{orthogonality_stats, AbortableState};
use prfslab_core::prsgen::PrsKey;
use prfslab_core::qcore::{trace_distance, DensityMatrix};
use prfslab_core::rng::{par_trials, LabRng, SeedTree};
use prfslab_core::stats::Estimate;
use prfslab_core::tester::self_test_stats;
use rand::Rng;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{echo, enumerate, positive};
use crate::config::{merge_echo, parse_params, BaseKind, SchemeParams};
use crate::error::{HarnessError, Result};
use crate::report::Findings;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct HaarStats {
    m: usize,
    trials: u64,
    max_td: f64,
}

impl Default for HaarStats {
    fn default() -> Self {
        Self {
            m: 2,
            trials: 10_000,
            max_td: 0.05,
        }
    }
}

pub(super) fn haar_stats(params: Value, rng: &mut LabRng, out: &mut Findings) -> Result<Value> {
    let p: HaarStats = parse_params(params)?;
    positive("trials", p.trials)?;
    let mean = haarlab::haar_mean_state(p.m, p.trials, rng)?;
    let td = trace_distance(&mean, &DensityMatrix::maximally_mixed(p.m)?)?;
    let with_trials = |value| Estimate {
        value,
        std_error: 0.0,
        trials: p.trials,
    };
    out.estimate("mean_state_td", with_trials(td));
    out.estimate("basis_overlap", with_trials(mean.matrix()[(0, 0)].re));
    out.exact("basis_overlap_expected", (-(p.m as f64)).exp2());
    out.at_most("mean_state_td", td, p.max_td);
    Ok(echo(&p))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct PrefixConcentration {
    d: usize,
    n: usize,
    delta: f64,
    trials: u64,
    max_exceed: f64,
    /// A second output size; the larger of the two must not exceed more
    /// often, within three combined standard errors.
    #[serde(skip_serializing_if = "Option::is_none")]
    compare_n: Option<usize>,
}

impl Default for PrefixConcentration {
    fn default() -> Self {
        Self {
            d: 2,
            n: 8,
            delta: 0.125,
            trials: 1000,
            max_exceed: 0.01,
            compare_n: None,
        }
    }
}

fn exceed_estimate(r: &haarlab::ConcentrationReport) -> Estimate {
    Estimate {
        value: r.exceed_fraction,
        std_error: r.exceed_std_error,
        trials: r.trials,
    }
}

pub(super) fn prefix_concentration(params: Value, rng: &mut LabRng, out: &mut Findings) -> Result<Value> {
    let p: PrefixConcentration = parse_params(params)?;
    positive("trials", p.trials)?;
    let main = haarlab::prefix_concentration(p.d, p.n, p.delta, p.trials, rng)?;
    out.estimate("exceed_fraction", exceed_estimate(&main));
    out.estimate(
        "mean_max_deviation",
        Estimate {
            value: main.empirical_mean,
            std_error: 0.0,
            trials: main.trials,
        },
    );
    out.at_most("exceed_fraction", main.exceed_fraction, p.max_exceed);
    if let Some(cn) = p.compare_n {
        if cn == p.n {
            return Err(HarnessError::params("compare_n must differ from n"));
        }
        let other = haarlab::prefix_concentration(p.d, cn, p.delta, p.trials, rng)?;
        out.estimate("exceed_fraction_compare", exceed_estimate(&other));
        let (large, small) = if cn > p.n { (&other, &main) } else { (&main, &other) };
        let slack = 3.0 * (large.exceed_std_error.powi(2) + small.exceed_std_error.powi(2)).sqrt();
        out.at_most(
            "larger_n_exceeds_less",
            large.exceed_fraction - small.exceed_fraction,
            slack,
        );
    }
    Ok(echo(&p))
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum PrsDistinguisher {
    ConstantZero,
    ConstantOne,
    /// SWAP test on the first two copies.
    Swap,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct PrsGame {
    base: BaseKind,
    n: usize,
    lambda: usize,
    t: usize,
    trials: u64,
    distinguisher: PrsDistinguisher,
    #[serde(skip_serializing_if = "Option::is_none")]
    max_advantage: Option<f64>,
}

impl Default for PrsGame {
    fn default() -> Self {
        Self {
            base: BaseKind::IdealHaar,
            n: 3,
            lambda: 8,
            t: 2,
            trials: 2000,
            distinguisher: PrsDistinguisher::Swap,
            max_advantage: None,
        }
    }
}

fn frequency(p: f64, trials: u64) -> Estimate {
    Estimate::frequency((p * trials as f64).round() as u64, trials)
}

pub(super) fn prs_game(params: Value, rng: &mut LabRng, out: &mut Findings) -> Result<Value> {
    let p: PrsGame = parse_params(params)?;
    positive("trials", p.trials)?;
    let spec = p.base.spec(p.n, p.lambda)?;
    let adv = match p.distinguisher {
        PrsDistinguisher::ConstantZero => prfslab_core::prsgen::prs_game(&spec, p.t, constant(false), p.trials, rng)?,
        PrsDistinguisher::ConstantOne => prfslab_core::prsgen::prs_game(&spec, p.t, constant(true), p.trials, rng)?,
        PrsDistinguisher::Swap => {
            if p.t < 2 {
                return Err(HarnessError::params("the swap distinguisher needs t >= 2"));
            }
            prfslab_core::prsgen::prs_game(&spec, p.t, swap_test_on(0, 1), p.trials, rng)?
        }
    };
    out.estimate(
        "advantage",
        Estimate {
            value: adv.value,
            std_error: adv.std_error,
            trials: adv.trials,
        },
    );
    out.estimate("real_accept", frequency(adv.real_accept, adv.trials));
    out.estimate("ideal_accept", frequency(adv.ideal_accept, adv.trials));
    if let Some(max) = p.max_advantage {
        out.at_most("advantage", adv.value, max);
    }
    Ok(echo(&p))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct PrfsEval {
    pairs: u64,
    runs: u64,
    sigma: f64,
}

impl Default for PrfsEval {
    fn default() -> Self {
        Self {
            pairs: 10,
            runs: 5000,
            sigma: 3.0,
        }
    }
}

/// True when `state` densifies to something of the recognizable-abort form
/// from which `(η, ψ)` is recovered.
fn has_abort_form(state: &AbortableState) -> bool {
    match AbortableState::from_density(&state.densify(), 1e-9) {
        Some(back) => (back.eta() - state.eta()).abs() <= 1e-9,
        None => false,
    }
}

pub(super) fn prfs_eval(params: Value, rng: &mut LabRng, out: &mut Findings) -> Result<Value> {
    let (sp, rest) = SchemeParams::split(params)?;
    let p: PrfsEval = parse_params(rest)?;
    positive("pairs", p.pairs)?;
    positive("runs", p.runs)?;
    let scheme = sp.build()?;
    let seeds = SeedTree::from_rng(rng, "prfs-eval");
    let (mut etas, mut freqs) = (Vec::new(), Vec::new());
    let (mut disagreements, mut malformed) = (0u64, 0u64);
    for i in 0..p.pairs {
        let key = PrsKey::random(scheme.key_bits(), rng)?;
        let x = rng.random_range(0..1u64 << scheme.input_bits());
        let exact = scheme.eval(&key, x)?;
        let pair_seeds = seeds.child(&format!("pair-{i}"));
        let samples = par_trials(p.runs, |j| scheme.eval_sampled(&key, x, &mut pair_seeds.stream(j)))?;
        let mut successes = 0u64;
        for s in &samples {
            match s {
                Some(psi) => {
                    successes += 1;
                    if !has_abort_form(&AbortableState::success(psi.clone())) {
                        malformed += 1;
                    }
                }
                None => {
                    if !has_abort_form(&AbortableState::aborted(scheme.output_qubits())?) {
                        malformed += 1;
                    }
                }
            }
        }
        if !has_abort_form(&exact) {
            malformed += 1;
        }
        let freq = Estimate::frequency(successes, p.runs);
        // the error of the exact η, so that η close to 1 is not judged
        // against a zero plug-in error
        let eta = exact.eta();
        let se = (eta * (1.0 - eta) / p.runs as f64).sqrt();
        if (freq.value - eta).abs() > p.sigma * se + 1e-12 {
            disagreements += 1;
        }
        etas.push(exact.eta());
        freqs.push(freq.value);
    }
    out.estimate("mean_eta", Estimate::mean(&etas));
    out.estimate("mean_success_frequency", Estimate::mean(&freqs));
    out.series("eta", etas);
    out.series("success_frequency", freqs);
    out.at_most("pairs_outside_sigma", disagreements as f64, 0.0);
    out.at_most("outputs_without_abort_form", malformed as f64, 0.0);
    Ok(merge_echo(&sp, echo(&p)))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct PairStats {
    x: u64,
    y: u64,
    keyset: Keyset,
    /// Allowed excess over `2^{-n}` for cross terms.
    slack: f64,
    min_match: f64,
}

impl Default for PairStats {
    fn default() -> Self {
        Self {
            x: 0,
            y: 1,
            keyset: enumerate(),
            slack: 0.03,
            min_match: 0.95,
        }
    }
}

pub(super) fn orthogonality(params: Value, _rng: &mut LabRng, out: &mut Findings) -> Result<Value> {
    let (sp, rest) = SchemeParams::split(params)?;
    let p: PairStats = parse_params(rest)?;
    let scheme = sp.build()?;
    let keys = p.keyset.keys(scheme.key_bits())?;
    let s = orthogonality_stats(&scheme, p.x, p.y, &keys)?;
    let reference = (-(sp.n as f64)).exp2();
    out.exact("mean_cross", s.mean_cross);
    out.exact("mean_purity", s.mean_purity);
    out.exact("mean_eta", s.mean_eta);
    out.exact("haar_cross_reference", reference);
    out.at_most("mean_cross", s.mean_cross, reference + p.slack);
    Ok(merge_echo(&sp, echo(&p)))
}

pub(super) fn self_test(params: Value, _rng: &mut LabRng, out: &mut Findings) -> Result<Value> {
    let (sp, rest) = SchemeParams::split(params)?;
    let p: PairStats = parse_params(rest)?;
    let scheme = sp.build()?;
    let keys = p.keyset.keys(scheme.key_bits())?;
    let s = self_test_stats(&scheme, p.x, p.y, &keys)?;
    out.exact("accept_match", s.accept_match);
    out.exact("accept_mismatch", s.accept_mismatch);
    out.at_least("accept_match", s.accept_match, p.min_match);
    out.at_most("accept_mismatch", s.accept_mismatch, (-(sp.n as f64)).exp2() + p.slack);
    Ok(merge_echo(&sp, echo(&p)))
}
