use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::qcore::DensityMatrix;
use crate::C64;

/// `A A^dagger / Tr` for a complex Gaussian `A`: a full-rank random state.
pub(crate) fn random_density<R: Rng + ?Sized>(num_qubits: usize, rng: &mut R) -> DensityMatrix {
    let d = 1usize << num_qubits;
    let a = DMatrix::from_fn(d, d, |_, _| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)));
    let m = &a * a.adjoint();
    let tr = crate::qcore::linalg::trace(&m).re;
    DensityMatrix::new(m / C64::new(tr, 0.0)).expect("valid by construction")
}
