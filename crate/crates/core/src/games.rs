//! Two-world distinguishing games shared by the generator and encryption
//! modules.

use rand::Rng;

use crate::qcore::{check_qubits, swap_test_sample, tensor, DensityMatrix, StateVector};
use crate::rng::{par_trials, LabRng, SeedTree};
use crate::stats::Advantage;
use crate::{LabError, Result};

/// What a distinguisher receives: a product of density matrices, kept in
/// factored form so cheap tests never build the full tensor product.
#[derive(Debug, Clone, PartialEq)]
pub struct GameInput {
    factors: Vec<DensityMatrix>,
}

impl GameInput {
    pub fn new(factors: Vec<DensityMatrix>) -> Result<Self> {
        check_qubits(factors.iter().map(DensityMatrix::num_qubits).sum())?;
        Ok(Self { factors })
    }

    /// `t` copies of `rho`.
    pub fn copies(rho: &DensityMatrix, t: usize) -> Self {
        Self {
            factors: vec![rho.clone(); t],
        }
    }

    pub fn factors(&self) -> &[DensityMatrix] {
        &self.factors
    }

    pub fn num_qubits(&self) -> usize {
        self.factors.iter().map(DensityMatrix::num_qubits).sum()
    }

    /// The full product state.
    pub fn to_density(&self) -> Result<DensityMatrix> {
        tensor(&self.factors)
    }

    fn factor(&self, i: usize) -> Result<&DensityMatrix> {
        self.factors
            .get(i)
            .ok_or_else(|| LabError::Callback(format!("input has no factor {i}")))
    }
}

/// Runs `trials` rounds in each world and compares how often the
/// distinguisher outputs 1. Round `i` of each world gets its own stream,
/// shared by the instance sampler and the distinguisher.
pub fn play<R, F, G, D>(trials: u64, rng: &mut R, real: F, ideal: G, distinguisher: D) -> Result<Advantage>
where
    R: Rng + ?Sized,
    F: Fn(&mut LabRng) -> Result<GameInput> + Sync + Send,
    G: Fn(&mut LabRng) -> Result<GameInput> + Sync + Send,
    D: Fn(&GameInput, &mut LabRng) -> Result<bool> + Sync,
{
    if trials == 0 {
        return Err(LabError::arg("trials must be positive"));
    }
    let seeds = SeedTree::from_rng(rng, "game");
    let world = |tree: SeedTree, sample: &(dyn Fn(&mut LabRng) -> Result<GameInput> + Sync)| -> Result<u64> {
        let bits = par_trials(trials, |i| {
            let mut r = tree.stream(i);
            let input = sample(&mut r)?;
            distinguisher(&input, &mut r)
        })?;
        Ok(bits.into_iter().filter(|&b| b).count() as u64)
    };
    let real_ones = world(seeds.child("real"), &real)?;
    let ideal_ones = world(seeds.child("ideal"), &ideal)?;
    Ok(Advantage::from_counts(real_ones, ideal_ones, trials))
}

/// Draws `true` with probability `p`.
pub fn accept_with<R: Rng + ?Sized>(p: f64, rng: &mut R) -> bool {
    rng.random::<f64>() < p
}

/// Ignores its input.
pub fn constant(bit: bool) -> impl Fn(&GameInput, &mut LabRng) -> Result<bool> + Sync {
    move |_, _| Ok(bit)
}

/// SWAP test between factors `i` and `j`.
pub fn swap_test_on(i: usize, j: usize) -> impl Fn(&GameInput, &mut LabRng) -> Result<bool> + Sync {
    move |input, rng| swap_test_sample(input.factor(i)?, input.factor(j)?, rng)
}

/// Measures `{|v><v|, I - |v><v|}` on factor `i`; outputs 1 on the first
/// outcome.
pub fn projector_test(i: usize, v: StateVector) -> impl Fn(&GameInput, &mut LabRng) -> Result<bool> + Sync {
    move |input, rng| {
        let p = input.factor(i)?.expectation(&v)?;
        Ok(accept_with(p, rng))
    }
}
