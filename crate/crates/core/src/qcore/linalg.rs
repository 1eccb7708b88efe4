use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::C64;

pub(crate) fn hermiticity_defect(m: &DMatrix<C64>) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Eigenvalues of a Hermitian matrix, ascending.
pub(crate) fn hermitian_eigenvalues(m: &DMatrix<C64>) -> DVector<f64> {
    let mut ev = m.clone().symmetric_eigenvalues();
    ev.as_mut_slice().sort_by(|a, b| a.total_cmp(b));
    ev
}

pub(crate) fn hermitian_eigen(m: &DMatrix<C64>) -> SymmetricEigen<C64, nalgebra::Dyn> {
    SymmetricEigen::new(m.clone())
}

/// Square root of a PSD matrix; negative round-off eigenvalues are clipped.
pub(crate) fn psd_sqrt(m: &DMatrix<C64>) -> DMatrix<C64> {
    let eig = hermitian_eigen(m);
    let v = &eig.eigenvectors;
    let d = DMatrix::from_diagonal(&eig.eigenvalues.map(|x| C64::new(x.max(0.0).sqrt(), 0.0)));
    v * d * v.adjoint()
}

/// Pseudo-inverse square root of a PSD matrix; eigenvalues at or below
/// `cutoff` map to zero.
pub(crate) fn psd_inverse_sqrt(m: &DMatrix<C64>, cutoff: f64) -> DMatrix<C64> {
    let eig = hermitian_eigen(m);
    let v = &eig.eigenvectors;
    let d = DMatrix::from_diagonal(&eig.eigenvalues.map(|x| {
        let r = if x > cutoff { 1.0 / x.sqrt() } else { 0.0 };
        C64::new(r, 0.0)
    }));
    v * d * v.adjoint()
}

pub(crate) fn trace(m: &DMatrix<C64>) -> C64 {
    (0..m.nrows()).map(|i| m[(i, i)]).sum()
}

/// Tr(a b) in O(n^2).
pub(crate) fn trace_of_product(a: &DMatrix<C64>, b: &DMatrix<C64>) -> C64 {
    let n = a.nrows();
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            acc += a[(i, j)] * b[(j, i)];
        }
    }
    acc
}

pub(crate) fn kron(a: &DMatrix<C64>, b: &DMatrix<C64>) -> DMatrix<C64> {
    a.kronecker(b)
}

/// `v^dagger m v` for a Hermitian `m`, returned as a real number.
pub(crate) fn expectation(m: &DMatrix<C64>, v: &[C64]) -> f64 {
    let n = v.len();
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..n {
        if v[i] == C64::new(0.0, 0.0) {
            continue;
        }
        let mut row = C64::new(0.0, 0.0);
        for j in 0..n {
            row += m[(i, j)] * v[j];
        }
        acc += v[i].conj() * row;
    }
    acc.re
}
