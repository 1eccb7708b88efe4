use std::fmt;

use nalgebra::DMatrix;
use rand::Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::{check_qubits, DensityMatrix, StateVector};
use crate::{LabError, Result, C64};

/// Exhaustive Pauli sums are limited to this many qubits (`4^6 = 4096` terms).
pub const MAX_ENUMERATED_PAULI_QUBITS: usize = 6;

/// `P = X^{x_0} Z^{z_0} ⊗ ... ⊗ X^{x_{m-1}} Z^{z_{m-1}}`.
///
/// Bit `m - 1 - i` of each mask belongs to qubit `i`, so the masks line up
/// with basis indices: `P|j> = (-1)^{|z & j|} |j ^ x>`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PauliString {
    num_qubits: usize,
    x_mask: u64,
    z_mask: u64,
}

fn parity(v: u64) -> bool {
    v.count_ones() & 1 == 1
}

impl PauliString {
    pub fn new(num_qubits: usize, x_mask: u64, z_mask: u64) -> Result<Self> {
        if num_qubits > 64 {
            return Err(LabError::arg("Pauli strings are limited to 64 qubits"));
        }
        let full = Self::full_mask(num_qubits);
        if x_mask & !full != 0 || z_mask & !full != 0 {
            return Err(LabError::arg(format!("Pauli mask wider than {num_qubits} qubits")));
        }
        Ok(Self {
            num_qubits,
            x_mask,
            z_mask,
        })
    }

    fn full_mask(num_qubits: usize) -> u64 {
        if num_qubits == 64 {
            u64::MAX
        } else {
            (1u64 << num_qubits) - 1
        }
    }

    pub fn identity(num_qubits: usize) -> Self {
        Self {
            num_qubits,
            x_mask: 0,
            z_mask: 0,
        }
    }

    /// The `index`-th string of the enumeration order used by
    /// [`PauliString::all`]: `x = index >> m`, `z = index & (2^m - 1)`.
    pub fn from_index(num_qubits: usize, index: u64) -> Result<Self> {
        if 2 * num_qubits >= 64 || index >> (2 * num_qubits) != 0 {
            return Err(LabError::arg(format!("Pauli index {index} out of range for {num_qubits} qubits")));
        }
        Self::new(num_qubits, index >> num_qubits, index & Self::full_mask(num_qubits))
    }

    /// Every string on `num_qubits` qubits.
    pub fn all(num_qubits: usize) -> Result<impl Iterator<Item = PauliString>> {
        if num_qubits > MAX_ENUMERATED_PAULI_QUBITS {
            return Err(LabError::EnumerationLimit {
                what: "Pauli strings",
                bits: 2 * num_qubits,
                limit: 2 * MAX_ENUMERATED_PAULI_QUBITS,
            });
        }
        Ok((0..1u64 << (2 * num_qubits)).map(move |i| Self::from_index(num_qubits, i).expect("in range")))
    }

    /// Uniform over all `4^m` strings: every mask bit is an independent coin.
    pub fn random<R: Rng + ?Sized>(num_qubits: usize, rng: &mut R) -> Result<Self> {
        check_qubits(num_qubits)?;
        let full = Self::full_mask(num_qubits);
        let x = rng.random::<u64>() & full;
        let z = rng.random::<u64>() & full;
        Self::new(num_qubits, x, z)
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn x_mask(&self) -> u64 {
        self.x_mask
    }

    pub fn z_mask(&self) -> u64 {
        self.z_mask
    }

    pub fn is_identity(&self) -> bool {
        self.x_mask == 0 && self.z_mask == 0
    }

    /// The string restricted to qubits `start .. start + len`.
    pub fn slice(&self, start: usize, len: usize) -> Result<Self> {
        if start + len > self.num_qubits {
            return Err(LabError::arg("Pauli slice out of range"));
        }
        let shift = self.num_qubits - start - len;
        let mask = Self::full_mask(len);
        Self::new(len, (self.x_mask >> shift) & mask, (self.z_mask >> shift) & mask)
    }

    /// Places this string on the qubits `positions` of a `total`-qubit
    /// register, identity elsewhere.
    pub fn spread(&self, positions: &[usize], total: usize) -> Result<Self> {
        if positions.len() != self.num_qubits || positions.iter().any(|&p| p >= total) {
            return Err(LabError::arg("Pauli spread positions do not match"));
        }
        let (mut x, mut z) = (0u64, 0u64);
        for (i, &p) in positions.iter().enumerate() {
            let src = self.num_qubits - 1 - i;
            let dst = total - 1 - p;
            x |= (self.x_mask >> src & 1) << dst;
            z |= (self.z_mask >> src & 1) << dst;
        }
        Self::new(total, x, z)
    }

    /// `P ⊗ Q` with `self` on the leading qubits.
    pub fn kron(&self, other: &PauliString) -> Result<Self> {
        let m = other.num_qubits;
        Self::new(
            self.num_qubits + m,
            self.x_mask << m | other.x_mask,
            self.z_mask << m | other.z_mask,
        )
    }

    fn check_dim(&self, dim: usize) -> Result<()> {
        if dim != 1usize << self.num_qubits {
            return Err(LabError::arg(format!(
                "{}-qubit Pauli applied to a dimension-{dim} object",
                self.num_qubits
            )));
        }
        Ok(())
    }

    /// `(-1)^{|z & j|}`: the sign `P` puts on the image of `|j>`.
    fn sign(&self, j: usize) -> f64 {
        if parity(self.z_mask & j as u64) {
            -1.0
        } else {
            1.0
        }
    }

    /// `P v` on a raw amplitude slice of dimension `2^m`.
    pub(crate) fn apply_raw(&self, v: &[C64]) -> Vec<C64> {
        let x = self.x_mask as usize;
        (0..v.len())
            .map(|i| {
                let j = i ^ x;
                v[j] * self.sign(j)
            })
            .collect()
    }

    /// `P^dagger = (-1)^{|x & z|} P`, since every `XZ` factor squares to `-I`.
    pub fn adjoint_sign(&self) -> f64 {
        if parity(self.x_mask & self.z_mask) {
            -1.0
        } else {
            1.0
        }
    }

    /// `P^dagger v`.
    pub(crate) fn apply_adjoint_raw(&self, v: &[C64]) -> Vec<C64> {
        let s = self.adjoint_sign();
        let mut out = self.apply_raw(v);
        if s < 0.0 {
            out.iter_mut().for_each(|a| *a = -*a);
        }
        out
    }

    pub fn apply(&self, psi: &StateVector) -> Result<StateVector> {
        self.check_dim(psi.dim())?;
        Ok(StateVector::from_raw(self.apply_raw(psi.amps())))
    }

    /// `P M P^dagger` for any square matrix of matching dimension.
    pub(crate) fn conjugate_matrix(&self, m: &DMatrix<C64>) -> DMatrix<C64> {
        let x = self.x_mask as usize;
        DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| {
            let (a, b) = (i ^ x, j ^ x);
            m[(a, b)] * (self.sign(a) * self.sign(b))
        })
    }

    pub fn conjugate(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        self.check_dim(rho.dim())?;
        Ok(DensityMatrix::from_raw(self.conjugate_matrix(rho.matrix())))
    }

    /// `<psi| P |phi>`.
    pub fn matrix_element(&self, psi: &StateVector, phi: &StateVector) -> Result<C64> {
        self.check_dim(psi.dim())?;
        self.check_dim(phi.dim())?;
        let x = self.x_mask as usize;
        let (a, b) = (psi.amps(), phi.amps());
        Ok((0..a.len()).map(|i| a[i].conj() * b[i ^ x] * self.sign(i ^ x)).sum())
    }

    pub fn matrix(&self) -> Result<DMatrix<C64>> {
        check_qubits(self.num_qubits)?;
        let n = 1usize << self.num_qubits;
        let x = self.x_mask as usize;
        let mut m = DMatrix::zeros(n, n);
        for j in 0..n {
            m[(j ^ x, j)] = C64::new(self.sign(j), 0.0);
        }
        Ok(m)
    }
}

impl fmt::Display for PauliString {
    /// Per-qubit letters with `Y` standing for `XZ`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for q in 0..self.num_qubits {
            let bit = self.num_qubits - 1 - q;
            let c = match (self.x_mask >> bit & 1, self.z_mask >> bit & 1) {
                (0, 0) => 'I',
                (1, 0) => 'X',
                (0, 1) => 'Z',
                _ => 'Y',
            };
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
struct PauliWire {
    num_qubits: usize,
    x: String,
    z: String,
}

impl Serialize for PauliString {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        PauliWire {
            num_qubits: self.num_qubits,
            x: format!("{:x}", self.x_mask),
            z: format!("{:x}", self.z_mask),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for PauliString {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error;
        let w = PauliWire::deserialize(d)?;
        let x = u64::from_str_radix(&w.x, 16).map_err(D::Error::custom)?;
        let z = u64::from_str_radix(&w.z, 16).map_err(D::Error::custom)?;
        PauliString::new(w.num_qubits, x, z).map_err(D::Error::custom)
    }
}

fn check_enumerable(m: usize) -> Result<()> {
    if m > MAX_ENUMERATED_PAULI_QUBITS {
        return Err(LabError::DimensionLimit {
            requested: m,
            cap: MAX_ENUMERATED_PAULI_QUBITS,
        });
    }
    Ok(())
}

/// `4^{-m} sum_P P rho P` over the whole Pauli group.
pub fn pauli_twirl_exact(rho: &DensityMatrix) -> Result<DensityMatrix> {
    let m = rho.num_qubits();
    check_enumerable(m)?;
    let n = rho.dim();
    let mut acc = DMatrix::<C64>::zeros(n, n);
    for p in PauliString::all(m)? {
        acc += p.conjugate_matrix(rho.matrix());
    }
    acc /= C64::new((1u64 << (2 * m)) as f64, 0.0);
    Ok(DensityMatrix::from_raw(acc))
}

/// `4^{-m} sum_P |<psi|P|phi>|^2`.
pub fn pauli_overlap_mean(psi: &StateVector, phi: &StateVector) -> Result<f64> {
    if psi.dim() != phi.dim() {
        return Err(LabError::arg("Pauli overlap of states with different sizes"));
    }
    let m = psi.num_qubits();
    check_enumerable(m)?;
    let mut total = 0.0;
    for p in PauliString::all(m)? {
        total += p.matrix_element(psi, phi)?.norm_sqr();
    }
    Ok(total / (1u64 << (2 * m)) as f64)
}
