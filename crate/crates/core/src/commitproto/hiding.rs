//! Hiding distance of key-averaged commitments and the closeness statistics
//! of `Π0` and `Π1`.

use nalgebra::DMatrix;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::extractor::ExtractorBasis;
use super::{commit_ensemble, CommitmentParams, PauliMode};
use crate::prfsgen::PrfsScheme;
use crate::prsgen::PrsKey;
use crate::qcore::{add_outer, check_qubits, trace_distance, DensityMatrix, PauliString};
use crate::keyset::MAX_ENUMERATED_KEY_BITS;
use crate::{LabError, Result, C64};

fn averaged_commitment(
    params: &CommitmentParams,
    scheme: &PrfsScheme,
    keys: &[PrsKey],
    b: bool,
    p: &PauliString,
) -> Result<DensityMatrix> {
    let dim = 1usize << params.commitment_qubits();
    let mut mat = DMatrix::<C64>::zeros(dim, dim);
    for k in keys {
        for (w, v) in commit_ensemble(params, scheme, k, b, p)? {
            add_outer(&mut mat, w / keys.len() as f64, v.amps());
        }
    }
    Ok(DensityMatrix::from_raw(mat))
}

/// `TD(E_k commit(k, 0, P), E_k commit(k, 1, P))`.
pub fn hiding_distance(params: &CommitmentParams, scheme: &PrfsScheme, keys: &[PrsKey], p: &PauliString) -> Result<f64> {
    if keys.is_empty() {
        return Err(LabError::arg("empty keyspace"));
    }
    if keys.len() > 1 << MAX_ENUMERATED_KEY_BITS {
        return Err(LabError::EnumerationLimit {
            what: "hiding keyspace",
            bits: params.lambda,
            limit: MAX_ENUMERATED_KEY_BITS,
        });
    }
    check_qubits(params.commitment_qubits())?;
    let c0 = averaged_commitment(params, scheme, keys, false, p)?;
    let c1 = averaged_commitment(params, scheme, keys, true, p)?;
    trace_distance(&c0, &c1)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HidingReport {
    pub per_pauli: Vec<f64>,
    pub mean: f64,
    pub keys: usize,
}

/// [`hiding_distance`] for every challenge of `mode`.
pub fn hiding_report<R: Rng + ?Sized>(
    scheme: &PrfsScheme,
    keys: &[PrsKey],
    mode: &PauliMode,
    rng: &mut R,
) -> Result<HidingReport> {
    let params = CommitmentParams::from_scheme(scheme)?;
    let paulis = mode.paulis(params.m, rng)?;
    let per_pauli = crate::rng::par_trials(paulis.len() as u64, |i| {
        hiding_distance(&params, scheme, keys, &paulis[i as usize])
    })?;
    let mean = per_pauli.iter().sum::<f64>() / per_pauli.len() as f64;
    Ok(HidingReport {
        per_pauli,
        mean,
        keys: keys.len(),
    })
}

/// Distribution of `p` and `Tr(Π0 Π1)` over challenges.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PovmClosenessReport {
    pub samples: usize,
    /// `dim T0`.
    pub span_rank: usize,
    pub p_values: Vec<f64>,
    pub overlap_traces: Vec<f64>,
    pub mean_p: f64,
    pub max_p: f64,
    pub mean_overlap_trace: f64,
    /// `dim(T0)² 2^{-m}`, the Pauli average of `Tr(Π0 Π1)`.
    pub predicted_mean_overlap_trace: f64,
    /// `2^{2λ - m}`.
    pub overlap_trace_bound: f64,
    /// Largest `p - 1 - 3 √Tr(Π0 Π1)`; at most zero when the per-instance
    /// bound holds.
    pub max_bound_excess: f64,
    /// `1 + 3 · 2^{-(m - 4λ)/3}`.
    pub lemma_threshold: f64,
    /// `2^{-(m - 4λ)/3}`; vacuous when at least one.
    pub lemma_probability_bound: f64,
    /// Fraction of samples with `p >= lemma_threshold`.
    pub exceed_fraction: f64,
    pub lemma_vacuous: bool,
}

pub fn povm_closeness_stats<R: Rng + ?Sized>(
    scheme: &PrfsScheme,
    keys: &[PrsKey],
    mode: &PauliMode,
    rng: &mut R,
) -> Result<PovmClosenessReport> {
    let params = CommitmentParams::from_scheme(scheme)?;
    let basis = ExtractorBasis::build(&params, scheme, keys)?;
    let paulis = mode.paulis(params.m, rng)?;
    let pairs = crate::rng::par_trials(paulis.len() as u64, |i| {
        let e = basis.povm(&paulis[i as usize])?;
        Ok((e.p(), e.overlap_trace()))
    })?;
    let count = pairs.len() as f64;
    let (p_values, overlap_traces): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
    let (threshold, prob) = params.closeness_bound();
    let r = basis.rank() as f64;
    let m = params.m as f64;
    Ok(PovmClosenessReport {
        samples: p_values.len(),
        span_rank: basis.rank(),
        mean_p: p_values.iter().sum::<f64>() / count,
        max_p: p_values.iter().copied().fold(f64::MIN, f64::max),
        mean_overlap_trace: overlap_traces.iter().sum::<f64>() / count,
        predicted_mean_overlap_trace: r * r * (-m).exp2(),
        overlap_trace_bound: (2.0 * params.lambda as f64 - m).exp2(),
        max_bound_excess: p_values
            .iter()
            .zip(&overlap_traces)
            .map(|(p, t)| p - 1.0 - 3.0 * t.sqrt())
            .fold(f64::MIN, f64::max),
        lemma_threshold: threshold,
        lemma_probability_bound: prob,
        exceed_fraction: p_values.iter().filter(|&&p| p >= threshold).count() as f64 / count,
        lemma_vacuous: prob >= 1.0,
        p_values,
        overlap_traces,
    })
}
