//! Gate-level realization of the tester, used to cross-check the channel
//! shortcut on small registers.
//!
//! With `Ĝ|0> = sum_j sqrt(λ_j) |ψ_j>_R |j>_A` a purification of the target
//! `ρ`, the circuit prepares `Ĝ|0>` on `R ⊗ A`, swaps `Q` with `R`, applies
//! `Ĝ^dagger` to `R ⊗ A` and accepts iff `R ⊗ A` reads all zeros.

use nalgebra::{DMatrix, DVector};

use super::TestOutcome;
use crate::qcore::linalg::hermitian_eigen;
use crate::qcore::{check_qubits, DensityMatrix};
use crate::{LabError, Result, C64};

/// A unitary whose first column is the unit vector `target`, built as a
/// Householder reflection times a phase.
pub fn completion_unitary(target: &[C64]) -> Result<DMatrix<C64>> {
    let n = target.len();
    let norm: f64 = target.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    if n == 0 || (norm - 1.0).abs() > 1e-9 {
        return Err(LabError::arg("completion needs a unit vector"));
    }
    let t0 = target[0];
    let phase = if t0.norm() > 1e-15 { t0 / t0.norm() } else { C64::new(1.0, 0.0) };
    // w = phase^* target has a real non-negative first entry; reflect e0 onto it
    let w: Vec<C64> = target.iter().map(|a| a * phase.conj()).collect();
    let mut u: Vec<C64> = w.iter().map(|a| -a).collect();
    u[0] += C64::new(1.0, 0.0);
    let un: f64 = u.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    let mut h = DMatrix::<C64>::identity(n, n);
    if un > 1e-15 {
        let u = DVector::from_iterator(n, u.into_iter().map(|a| a / un));
        h -= &u * u.adjoint() * C64::new(2.0, 0.0);
    }
    Ok(h * phase)
}

/// Purification `sum_j sqrt(λ_j) |ψ_j>_R |j>_A` of `rho`, with `A` the same
/// size as `R`.
fn purification(rho: &DensityMatrix) -> Vec<C64> {
    let d = rho.dim();
    let eig = hermitian_eigen(rho.matrix());
    let mut v = vec![C64::new(0.0, 0.0); d * d];
    for j in 0..d {
        let lam = eig.eigenvalues[j].max(0.0);
        if lam == 0.0 {
            continue;
        }
        let s = lam.sqrt();
        for r in 0..d {
            v[r * d + j] += eig.eigenvectors[(r, j)] * s;
        }
    }
    v
}

/// Simulates the circuit on `joint` (on `E ⊗ Q`) as a mixture of pure states.
pub fn circuit_test(target: &DensityMatrix, joint: &DensityMatrix) -> Result<TestOutcome> {
    let dq = target.dim();
    if joint.dim() % dq != 0 || joint.dim() < dq {
        return Err(LabError::arg("joint state does not end in the target register"));
    }
    let de = joint.dim() / dq;
    check_qubits(joint.num_qubits() + 2 * target.num_qubits())?;
    let g = completion_unitary(&purification(target))?;
    let g_dag = g.adjoint();
    let ensemble = hermitian_eigen(joint.matrix());
    let mut accept = DMatrix::<C64>::zeros(de, de);
    let mut reject = DMatrix::<C64>::zeros(de, de);
    let phi = g.column(0).into_owned();
    for (k, &w) in ensemble.eigenvalues.iter().enumerate() {
        if w <= 0.0 {
            continue;
        }
        let chi = ensemble.eigenvectors.column(k);
        // after the swap the amplitude of |e, q, r, a> is chi(e, r) phi(q, a)
        // out[e][q] is the (R, A) register after Ĝ^dagger
        let mut out: Vec<Vec<DVector<C64>>> = Vec::with_capacity(de);
        for e in 0..de {
            let mut row = Vec::with_capacity(dq);
            for q in 0..dq {
                let ra = DVector::from_fn(dq * dq, |i, _| chi[e * dq + i / dq] * phi[q * dq + i % dq]);
                row.push(&g_dag * ra);
            }
            out.push(row);
        }
        for e1 in 0..de {
            for e2 in 0..de {
                let mut acc = C64::new(0.0, 0.0);
                let mut rest = C64::new(0.0, 0.0);
                for q in 0..dq {
                    let (a, b) = (&out[e1][q], &out[e2][q]);
                    acc += a[0] * b[0].conj();
                    rest += (1..dq * dq).map(|i| a[i] * b[i].conj()).sum::<C64>();
                }
                accept[(e1, e2)] += acc * w;
                reject[(e1, e2)] += rest * w;
            }
        }
    }
    let p_accept = crate::qcore::linalg::trace(&accept).re;
    Ok(TestOutcome {
        p_accept,
        post_accept: DensityMatrix::from_raw(accept),
        post_reject: DensityMatrix::from_raw(reject),
    })
}
