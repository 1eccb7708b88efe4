use nalgebra::DMatrix;
use rand::Rng;

use super::linalg::{hermiticity_defect, hermitian_eigenvalues, trace_of_product};
use super::{check_qubits, DensityMatrix, StateVector, TOL};
use crate::{LabError, Result, C64};

/// Something that can be combined with `⊗`.
pub trait TensorFactor: Sized {
    fn qubits(&self) -> usize;
    fn kron_with(&self, other: &Self) -> Result<Self>;
    /// The zero-qubit unit of `⊗`.
    fn unit() -> Self;
}

impl TensorFactor for StateVector {
    fn qubits(&self) -> usize {
        self.num_qubits()
    }
    fn kron_with(&self, other: &Self) -> Result<Self> {
        self.kron(other)
    }
    fn unit() -> Self {
        StateVector::from_raw(vec![C64::new(1.0, 0.0)])
    }
}

impl TensorFactor for DensityMatrix {
    fn qubits(&self) -> usize {
        self.num_qubits()
    }
    fn kron_with(&self, other: &Self) -> Result<Self> {
        self.kron(other)
    }
    fn unit() -> Self {
        DensityMatrix::from_raw(DMatrix::from_element(1, 1, C64::new(1.0, 0.0)))
    }
}

/// Kronecker product of `parts` in order; part 0 occupies the most
/// significant qubits.
pub fn tensor<T: TensorFactor + Clone>(parts: &[T]) -> Result<T> {
    let total: usize = parts.iter().map(TensorFactor::qubits).sum();
    check_qubits(total)?;
    let mut iter = parts.iter();
    let Some(first) = iter.next() else {
        return Ok(T::unit());
    };
    iter.try_fold(first.clone(), |acc, p| acc.kron_with(p))
}

/// Reduced state on the qubits in `keep`, in the order given.
pub fn partial_trace(rho: &DensityMatrix, keep: &[usize]) -> Result<DensityMatrix> {
    let m = rho.num_qubits();
    let mut seen = vec![false; m];
    for &q in keep {
        if q >= m {
            return Err(LabError::arg(format!("qubit {q} out of range for {m} qubits")));
        }
        if std::mem::replace(&mut seen[q], true) {
            return Err(LabError::arg(format!("qubit {q} listed twice")));
        }
    }
    let traced: Vec<usize> = (0..m).filter(|q| !seen[*q]).collect();
    let bit = |q: usize| 1usize << (m - 1 - q);
    // full index = kept part spread over `keep` positions + traced part
    let spread = |value: usize, qubits: &[usize]| -> usize {
        let k = qubits.len();
        qubits
            .iter()
            .enumerate()
            .filter(|(pos, _)| value >> (k - 1 - pos) & 1 == 1)
            .map(|(_, &q)| bit(q))
            .sum()
    };
    let dk = 1usize << keep.len();
    let dt = 1usize << traced.len();
    let kept_idx: Vec<usize> = (0..dk).map(|v| spread(v, keep)).collect();
    let traced_idx: Vec<usize> = (0..dt).map(|v| spread(v, &traced)).collect();
    let src = rho.matrix();
    let out = DMatrix::from_fn(dk, dk, |i, j| {
        traced_idx
            .iter()
            .map(|&t| src[(kept_idx[i] | t, kept_idx[j] | t)])
            .sum::<C64>()
    });
    Ok(DensityMatrix::from_raw(out))
}

/// One outcome of measuring a prefix register in the computational basis.
#[derive(Debug, Clone, PartialEq)]
pub struct Branch {
    /// The prefix value, big-endian over the measured qubits.
    pub outcome: u64,
    pub probability: f64,
    /// Normalized post-measurement state of the remaining qubits.
    pub residual: StateVector,
}

/// Outcomes with probability below this are dropped by [`branch_decompose`].
pub const BRANCH_CUTOFF: f64 = 1e-15;

/// Measures the first `prefix_qubits` qubits of `state`, returning every
/// outcome with non-negligible probability and its residual state.
pub fn branch_decompose(state: &StateVector, prefix_qubits: usize) -> Result<Vec<Branch>> {
    let m = state.num_qubits();
    if prefix_qubits > m {
        return Err(LabError::arg(format!("cannot measure {prefix_qubits} of {m} qubits")));
    }
    let block = 1usize << (m - prefix_qubits);
    let mut out = Vec::new();
    for (x, chunk) in state.amps().chunks(block).enumerate() {
        let p: f64 = chunk.iter().map(|a| a.norm_sqr()).sum();
        if p < BRANCH_CUTOFF {
            continue;
        }
        let s = p.sqrt();
        let residual = StateVector::from_raw(chunk.iter().map(|a| a / s).collect());
        out.push(Branch {
            outcome: x as u64,
            probability: p,
            residual,
        });
    }
    Ok(out)
}

/// `||h||_1` for a Hermitian matrix.
pub fn trace_norm(h: &DMatrix<C64>) -> f64 {
    hermitian_eigenvalues(h).iter().map(|x| x.abs()).sum()
}

/// `½ ||a - b||_1`.
pub fn trace_distance(a: &DensityMatrix, b: &DensityMatrix) -> Result<f64> {
    a.same_dim(b)?;
    Ok(0.5 * trace_norm(&(a.matrix() - b.matrix())))
}

/// Largest eigenvalue magnitude of a Hermitian matrix.
pub fn operator_norm(h: &DMatrix<C64>) -> Result<f64> {
    if h.nrows() != h.ncols() {
        return Err(LabError::arg("operator norm of a non-square matrix"));
    }
    let defect = hermiticity_defect(h);
    if defect > TOL {
        return Err(LabError::NotHermitian(defect));
    }
    let ev = hermitian_eigenvalues(h);
    Ok(ev.iter().fold(0.0f64, |acc, x| acc.max(x.abs())))
}

/// Acceptance probability of the SWAP test on `a ⊗ b`: `½ + ½ Tr(a b)`.
pub fn swap_test_accept_prob(a: &DensityMatrix, b: &DensityMatrix) -> Result<f64> {
    a.same_dim(b)?;
    Ok(0.5 + 0.5 * trace_of_product(a.matrix(), b.matrix()).re)
}

/// One run of the SWAP test; `true` means accept.
pub fn swap_test_sample<R: Rng + ?Sized>(a: &DensityMatrix, b: &DensityMatrix, rng: &mut R) -> Result<bool> {
    let p = swap_test_accept_prob(a, b)?;
    Ok(rng.random::<f64>() < p)
}
