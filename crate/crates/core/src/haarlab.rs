//! Haar-random states and unitaries, and concentration experiments on them.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::qcore::{branch_decompose, check_qubits, trace_distance, DensityMatrix, StateVector};
use crate::rng::{par_trials, SeedTree};
use crate::{LabError, Result, C64};

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// A Haar-random pure state: normalized complex Gaussian vector.
pub fn haar_state<R: Rng + ?Sized>(num_qubits: usize, rng: &mut R) -> Result<StateVector> {
    check_qubits(num_qubits)?;
    let amps: Vec<C64> = (0..1usize << num_qubits).map(|_| gaussian(rng)).collect();
    StateVector::normalized(amps)
}

/// A Haar-random `dim x dim` unitary: QR of a Ginibre matrix with the
/// phases of `R`'s diagonal moved into `Q`.
pub fn haar_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Result<DMatrix<C64>> {
    if dim == 0 {
        return Err(LabError::arg("unitary dimension must be positive"));
    }
    check_qubits(dim.next_power_of_two().trailing_zeros() as usize)?;
    let g = DMatrix::from_fn(dim, dim, |_, _| gaussian(rng));
    let qr = g.qr();
    let (mut q, r) = qr.unpack();
    for j in 0..dim {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { C64::new(1.0, 0.0) };
        for i in 0..dim {
            q[(i, j)] *= phase;
        }
    }
    Ok(q)
}

/// Outcome of a concentration or post-selection experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationReport {
    /// Dimension of the sampled Haar states.
    pub dim: usize,
    pub delta: f64,
    pub trials: u64,
    /// Fraction of samples whose statistic reached `delta`.
    pub exceed_fraction: f64,
    /// Binomial standard error of `exceed_fraction`.
    pub exceed_std_error: f64,
    /// Mean of the per-sample statistic.
    pub empirical_mean: f64,
    /// Trace distance of the empirical mean residual state to `I / 2^n`,
    /// for post-selection experiments.
    pub mean_state_td: Option<f64>,
}

fn check_trials(trials: u64) -> Result<()> {
    if trials == 0 {
        return Err(LabError::arg("trials must be positive"));
    }
    Ok(())
}

/// Samples Haar states on `d + n` qubits and records how often the prefix
/// distribution strays from uniform: the statistic per sample is
/// `max_x |p_x - 2^-d|`, and a sample exceeds when it is `>= delta`.
pub fn prefix_concentration<R: Rng + ?Sized>(
    d: usize,
    n: usize,
    delta: f64,
    trials: u64,
    rng: &mut R,
) -> Result<ConcentrationReport> {
    check_qubits(d + n)?;
    check_trials(trials)?;
    if !(delta > 0.0) {
        return Err(LabError::arg("delta must be positive"));
    }
    let seeds = SeedTree::from_rng(rng, "prefix-concentration");
    let uniform = (-(d as f64)).exp2();
    let stats = par_trials(trials, |i| {
        let psi = haar_state(d + n, &mut seeds.stream(i))?;
        let branches = branch_decompose(&psi, d)?;
        let mut worst = if branches.len() < 1 << d { uniform } else { 0.0 };
        for b in &branches {
            worst = worst.max((b.probability - uniform).abs());
        }
        Ok(worst)
    })?;
    let exceed = stats.iter().filter(|&&s| s >= delta).count() as u64;
    let p = exceed as f64 / trials as f64;
    Ok(ConcentrationReport {
        dim: 1 << (d + n),
        delta,
        trials,
        exceed_fraction: p,
        exceed_std_error: (p * (1.0 - p) / trials as f64).sqrt(),
        empirical_mean: stats.iter().sum::<f64>() / trials as f64,
        mean_state_td: None,
    })
}

/// Unweighted mean of the residual states left after post-selecting the
/// prefix `x` of `trials` Haar states on `d + n` qubits, together with the
/// mean post-selection probability.
pub fn postselect_mean_state<R: Rng + ?Sized>(
    d: usize,
    n: usize,
    x: u64,
    trials: u64,
    rng: &mut R,
) -> Result<(DensityMatrix, f64)> {
    check_qubits(d + n)?;
    check_trials(trials)?;
    if x >> d != 0 {
        return Err(LabError::arg(format!("prefix {x} does not fit in {d} bits")));
    }
    let seeds = SeedTree::from_rng(rng, "postselect");
    let dim = 1usize << n;
    let block = (x as usize) * dim;
    let samples = par_trials(trials, |i| {
        let psi = haar_state(d + n, &mut seeds.stream(i))?;
        let chunk = &psi.amps()[block..block + dim];
        let p: f64 = chunk.iter().map(|a| a.norm_sqr()).sum();
        let residual: Vec<C64> = chunk.iter().map(|a| a / p.sqrt()).collect();
        Ok((p, StateVector::from_raw(residual)))
    })?;
    let w = 1.0 / trials as f64;
    let mean = DensityMatrix::from_ensemble(n, samples.iter().map(|(_, s)| (w, s)))?;
    let mean_p = samples.iter().map(|(p, _)| p).sum::<f64>() * w;
    Ok((mean, mean_p))
}

/// Post-selects prefix `x` on Haar states and compares the mean residual to
/// `I / 2^n`. A sample counts as exceeding when its post-selection
/// probability is below `1e-15`, which happens only on a null set; the
/// mean statistic is the post-selection probability itself.
pub fn postselect_invariance_check<R: Rng + ?Sized>(
    d: usize,
    n: usize,
    x: u64,
    trials: u64,
    rng: &mut R,
) -> Result<ConcentrationReport> {
    let (mean, mean_p) = postselect_mean_state(d, n, x, trials, rng)?;
    let td = trace_distance(&mean, &DensityMatrix::maximally_mixed(n)?)?;
    Ok(ConcentrationReport {
        dim: 1 << n,
        delta: crate::qcore::BRANCH_CUTOFF,
        trials,
        exceed_fraction: 0.0,
        exceed_std_error: 0.0,
        empirical_mean: mean_p,
        mean_state_td: Some(td),
    })
}

/// Empirical mean of `trials` Haar states on `m` qubits.
pub fn haar_mean_state<R: Rng + ?Sized>(num_qubits: usize, trials: u64, rng: &mut R) -> Result<DensityMatrix> {
    check_qubits(num_qubits)?;
    check_trials(trials)?;
    let seeds = SeedTree::from_rng(rng, "haar-mean");
    let samples = par_trials(trials, |i| haar_state(num_qubits, &mut seeds.stream(i)))?;
    let w = 1.0 / trials as f64;
    DensityMatrix::from_ensemble(num_qubits, samples.iter().map(|s| (w, s)))
}
