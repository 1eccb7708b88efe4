use nalgebra::DMatrix;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::linalg::{hermiticity_defect, hermitian_eigenvalues, kron, trace, trace_of_product};
use super::{check_qubits, StateVector, TOL};
use crate::{LabError, Result, C64};

/// Hermitian positive semidefinite matrix of dimension `2^m`.
///
/// Normalized states have unit trace. Subnormalized ones (branch states of a
/// measurement, for example) have trace in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    mat: DMatrix<C64>,
    num_qubits: usize,
}

impl DensityMatrix {
    /// Validates Hermiticity, positivity and unit trace, all within 1e-9.
    pub fn new(mat: DMatrix<C64>) -> Result<Self> {
        let rho = Self::subnormalized(mat)?;
        let tr = rho.trace();
        if (tr - 1.0).abs() > TOL {
            return Err(LabError::arg(format!("trace {tr} is not 1")));
        }
        Ok(rho)
    }

    /// Validates Hermiticity, positivity and `trace <= 1`.
    pub fn subnormalized(mat: DMatrix<C64>) -> Result<Self> {
        let rho = Self::hermitian(mat)?;
        let tr = rho.trace();
        if tr > 1.0 + TOL {
            return Err(LabError::arg(format!("trace {tr} exceeds 1")));
        }
        let min_eig = hermitian_eigenvalues(&rho.mat)[0];
        if min_eig < -TOL {
            return Err(LabError::arg(format!("matrix is not PSD (eigenvalue {min_eig:.3e})")));
        }
        Ok(rho)
    }

    fn hermitian(mat: DMatrix<C64>) -> Result<Self> {
        let n = mat.nrows();
        if n != mat.ncols() || n == 0 || !n.is_power_of_two() {
            return Err(LabError::arg(format!(
                "density matrix must be square with power-of-two side, got {}x{}",
                mat.nrows(),
                mat.ncols()
            )));
        }
        let num_qubits = n.trailing_zeros() as usize;
        check_qubits(num_qubits)?;
        let defect = hermiticity_defect(&mat);
        if defect > TOL {
            return Err(LabError::NotHermitian(defect));
        }
        Ok(Self { mat, num_qubits })
    }

    /// Wraps a matrix that is valid by construction.
    pub(crate) fn from_raw(mat: DMatrix<C64>) -> Self {
        let num_qubits = mat.nrows().trailing_zeros() as usize;
        Self { mat, num_qubits }
    }

    pub fn from_pure(psi: &StateVector) -> Self {
        let v = psi.amps();
        let n = v.len();
        let mat = DMatrix::from_fn(n, n, |i, j| v[i] * v[j].conj());
        Self {
            mat,
            num_qubits: psi.num_qubits(),
        }
    }

    /// `I / 2^m`.
    pub fn maximally_mixed(num_qubits: usize) -> Result<Self> {
        check_qubits(num_qubits)?;
        let n = 1usize << num_qubits;
        let mat = DMatrix::from_diagonal_element(n, n, C64::new(1.0 / n as f64, 0.0));
        Ok(Self { mat, num_qubits })
    }

    /// Convex combination `sum_i w_i |v_i><v_i|`; weights need not sum to one.
    pub fn from_ensemble<'a, I>(num_qubits: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (f64, &'a StateVector)>,
    {
        check_qubits(num_qubits)?;
        let n = 1usize << num_qubits;
        let mut mat = DMatrix::zeros(n, n);
        for (w, v) in terms {
            if v.num_qubits() != num_qubits {
                return Err(LabError::arg("ensemble member has the wrong size"));
            }
            if w == 0.0 {
                continue;
            }
            add_outer(&mut mat, w, v.amps());
        }
        Ok(Self { mat, num_qubits })
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.mat
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.mat
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn trace(&self) -> f64 {
        trace(&self.mat).re
    }

    /// `Tr(rho^2)`.
    pub fn purity(&self) -> f64 {
        trace_of_product(&self.mat, &self.mat).re
    }

    /// `Tr(self other)`.
    pub fn overlap(&self, other: &DensityMatrix) -> Result<f64> {
        self.same_dim(other)?;
        Ok(trace_of_product(&self.mat, &other.mat).re)
    }

    /// `<v| rho |v>`.
    pub fn expectation(&self, v: &StateVector) -> Result<f64> {
        if v.dim() != self.dim() {
            return Err(LabError::arg("expectation with a vector of the wrong size"));
        }
        Ok(super::linalg::expectation(&self.mat, v.amps()))
    }

    pub fn kron(&self, other: &DensityMatrix) -> Result<DensityMatrix> {
        check_qubits(self.num_qubits + other.num_qubits)?;
        Ok(DensityMatrix {
            mat: kron(&self.mat, &other.mat),
            num_qubits: self.num_qubits + other.num_qubits,
        })
    }

    pub fn scaled(&self, factor: f64) -> DensityMatrix {
        DensityMatrix {
            mat: &self.mat * C64::new(factor, 0.0),
            num_qubits: self.num_qubits,
        }
    }

    /// `U rho U^dagger` for a unitary of matching dimension.
    pub fn conjugated(&self, u: &DMatrix<C64>) -> Result<DensityMatrix> {
        if u.nrows() != self.dim() || u.ncols() != self.dim() {
            return Err(LabError::arg("unitary dimension mismatch"));
        }
        Ok(DensityMatrix::from_raw(u * &self.mat * u.adjoint()))
    }

    pub(crate) fn same_dim(&self, other: &DensityMatrix) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(LabError::arg(format!(
                "dimension mismatch: {} vs {} qubits",
                self.num_qubits, other.num_qubits
            )));
        }
        Ok(())
    }

    /// Smallest eigenvalue; negative values beyond round-off mean the matrix
    /// is not a state.
    pub fn min_eigenvalue(&self) -> f64 {
        hermitian_eigenvalues(&self.mat)[0]
    }

    /// Checks Hermiticity and positivity within `tol`.
    pub fn is_valid_state(&self, tol: f64) -> bool {
        hermiticity_defect(&self.mat) <= tol && self.min_eigenvalue() >= -tol
    }
}

pub(crate) fn add_outer(mat: &mut DMatrix<C64>, w: f64, v: &[C64]) {
    let n = v.len();
    for j in 0..n {
        let cj = v[j].conj() * w;
        if cj == C64::new(0.0, 0.0) {
            continue;
        }
        for i in 0..n {
            mat[(i, j)] += v[i] * cj;
        }
    }
}

impl Serialize for DensityMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let n = self.dim();
        let mut flat = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                let z = self.mat[(i, j)];
                flat.push([z.re, z.im]);
            }
        }
        flat.serialize(s)
    }
}

impl<'de> Deserialize<'de> for DensityMatrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let flat = Vec::<[f64; 2]>::deserialize(d)?;
        let n = (flat.len() as f64).sqrt().round() as usize;
        if n * n != flat.len() {
            return Err(serde::de::Error::custom("entry count is not a square"));
        }
        let mat = DMatrix::from_row_iterator(n, n, flat.into_iter().map(|[re, im]| C64::new(re, im)));
        DensityMatrix::subnormalized(mat).map_err(serde::de::Error::custom)
    }
}
