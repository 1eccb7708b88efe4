//! Dense simulation laboratory for pseudorandom quantum states and the
//! cryptographic constructions built from them.
//!
//! Everything here works with explicit state vectors and density matrices, so
//! instances are restricted to a handful of qubits (see [`qubit_cap`]). The
//! modules follow the dependency order:
//!
//! * [`qcore`]: states, density matrices, Pauli strings, partial trace, trace
//!   distance, SWAP test.
//! * [`haarlab`]: Haar sampling and concentration experiments.
//! * [`prsgen`] / [`prfsgen`]: keyed state generators and the post-selection
//!   construction of function-like states from plain pseudorandom states.
//! * [`tester`]: the measurement channel that checks a state against a
//!   generator output.
//! * [`qotp`], [`commitproto`], [`cpamac`]: applications.

pub mod bits;
pub mod commitproto;
pub mod cpamac;
mod error;
pub mod games;
pub mod haarlab;
pub mod keyset;
pub mod prfsgen;
pub mod prsgen;
pub mod qcore;
pub mod qotp;
pub mod rng;
pub mod stats;
pub mod tester;
#[cfg(test)]
mod testutil;

pub use error::{LabError, Result};
pub use qcore::{qubit_cap, set_qubit_cap, DEFAULT_QUBIT_CAP};

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;
