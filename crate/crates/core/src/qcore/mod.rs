//! Exact complex linear algebra for small registers.
//!
//! Conventions fixed for the whole crate:
//!
//! * qubit 0 is the most significant bit of a basis index, so the first `d`
//!   qubits of an `m`-qubit register select a contiguous block of `2^(m-d)`
//!   amplitudes;
//! * Pauli strings are `X^x Z^z` per qubit with no `i` factor on `Y`, and
//!   conjugation is always `P rho P^dagger`.

mod density;
pub(crate) mod ops;
mod pauli;
mod state;

pub(crate) mod linalg;

use std::sync::atomic::{AtomicUsize, Ordering};

pub use density::DensityMatrix;
pub(crate) use density::add_outer;
pub use ops::{
    branch_decompose, operator_norm, partial_trace, swap_test_accept_prob, swap_test_sample,
    tensor, trace_distance, trace_norm, Branch, TensorFactor, BRANCH_CUTOFF,
};
pub use pauli::{pauli_overlap_mean, pauli_twirl_exact, PauliString, MAX_ENUMERATED_PAULI_QUBITS};
pub use state::StateVector;

use crate::{LabError, Result};

/// Largest register the dense representation accepts unless reconfigured.
pub const DEFAULT_QUBIT_CAP: usize = 14;

static QUBIT_CAP: AtomicUsize = AtomicUsize::new(DEFAULT_QUBIT_CAP);

pub fn qubit_cap() -> usize {
    QUBIT_CAP.load(Ordering::Relaxed)
}

/// Sets the process-wide qubit cap. Values above 30 are clamped.
pub fn set_qubit_cap(cap: usize) {
    QUBIT_CAP.store(cap.min(30), Ordering::Relaxed);
}

/// Fails with a dimension-limit error when `m` exceeds the current cap.
pub fn check_qubits(m: usize) -> Result<()> {
    let cap = qubit_cap();
    if m > cap {
        Err(LabError::DimensionLimit { requested: m, cap })
    } else {
        Ok(())
    }
}

/// Tolerance for normalization, Hermiticity and positivity checks.
pub const TOL: f64 = 1e-9;
