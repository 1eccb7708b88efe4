use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::{check_qubits, DensityMatrix, TOL};
use crate::{LabError, Result, C64};

/// A pure state on `num_qubits` qubits, stored as `2^num_qubits` amplitudes.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amps: Vec<C64>,
    num_qubits: usize,
}

fn qubits_for_len(len: usize) -> Result<usize> {
    if len == 0 || !len.is_power_of_two() {
        return Err(LabError::arg(format!("amplitude count {len} is not a power of two")));
    }
    Ok(len.trailing_zeros() as usize)
}

impl StateVector {
    /// A unit vector; fails if the norm is off by more than 1e-9.
    pub fn new(amps: Vec<C64>) -> Result<Self> {
        let s = Self::subnormalized(amps)?;
        let norm = s.norm();
        if (norm - 1.0).abs() > TOL {
            return Err(LabError::arg(format!("state norm {norm} is not 1")));
        }
        Ok(s)
    }

    /// Any vector of power-of-two length within the qubit cap.
    pub fn subnormalized(amps: Vec<C64>) -> Result<Self> {
        let num_qubits = qubits_for_len(amps.len())?;
        check_qubits(num_qubits)?;
        Ok(Self { amps, num_qubits })
    }

    /// Rescales to unit norm. Fails on the zero vector.
    pub fn normalized(amps: Vec<C64>) -> Result<Self> {
        let mut s = Self::subnormalized(amps)?;
        let norm = s.norm();
        if norm == 0.0 {
            return Err(LabError::arg("cannot normalize the zero vector"));
        }
        s.amps.iter_mut().for_each(|a| *a /= norm);
        Ok(s)
    }

    pub(crate) fn from_raw(amps: Vec<C64>) -> Self {
        let num_qubits = amps.len().trailing_zeros() as usize;
        debug_assert!(amps.len().is_power_of_two());
        Self { amps, num_qubits }
    }

    /// Computational basis state `|index>`.
    pub fn basis(num_qubits: usize, index: usize) -> Result<Self> {
        check_qubits(num_qubits)?;
        let dim = 1usize << num_qubits;
        if index >= dim {
            return Err(LabError::arg(format!("basis index {index} out of range for {num_qubits} qubits")));
        }
        let mut amps = vec![C64::new(0.0, 0.0); dim];
        amps[index] = C64::new(1.0, 0.0);
        Ok(Self { amps, num_qubits })
    }

    /// The uniform superposition `|+>^m`.
    pub fn uniform(num_qubits: usize) -> Result<Self> {
        check_qubits(num_qubits)?;
        let dim = 1usize << num_qubits;
        let a = C64::new((dim as f64).sqrt().recip(), 0.0);
        Ok(Self {
            amps: vec![a; dim],
            num_qubits,
        })
    }

    pub fn amps(&self) -> &[C64] {
        &self.amps
    }

    pub fn into_amps(self) -> Vec<C64> {
        self.amps
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &StateVector) -> Result<C64> {
        if self.dim() != other.dim() {
            return Err(LabError::arg(format!(
                "inner product of {}- and {}-qubit states",
                self.num_qubits, other.num_qubits
            )));
        }
        Ok(self.inner_raw(other.amps()))
    }

    pub(crate) fn inner_raw(&self, other: &[C64]) -> C64 {
        self.amps.iter().zip(other).map(|(a, b)| a.conj() * b).sum()
    }

    /// `|<self|other>|^2`.
    pub fn overlap(&self, other: &StateVector) -> Result<f64> {
        Ok(self.inner(other)?.norm_sqr())
    }

    /// `|psi><psi|`.
    pub fn density(&self) -> DensityMatrix {
        DensityMatrix::from_pure(self)
    }

    /// Kronecker product with `self` on the more significant qubits.
    pub fn kron(&self, other: &StateVector) -> Result<StateVector> {
        check_qubits(self.num_qubits + other.num_qubits)?;
        let mut amps = Vec::with_capacity(self.dim() * other.dim());
        for a in &self.amps {
            amps.extend(other.amps.iter().map(|b| a * b));
        }
        Ok(StateVector {
            amps,
            num_qubits: self.num_qubits + other.num_qubits,
        })
    }

    pub fn scaled(&self, factor: C64) -> StateVector {
        StateVector {
            amps: self.amps.iter().map(|a| a * factor).collect(),
            num_qubits: self.num_qubits,
        }
    }
}

impl Serialize for StateVector {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let pairs: Vec<[f64; 2]> = self.amps.iter().map(|a| [a.re, a.im]).collect();
        pairs.serialize(s)
    }
}

impl<'de> Deserialize<'de> for StateVector {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let pairs = Vec::<[f64; 2]>::deserialize(d)?;
        let amps = pairs.into_iter().map(|[re, im]| C64::new(re, im)).collect();
        StateVector::subnormalized(amps).map_err(serde::de::Error::custom)
    }
}
