//! The extractor POVM `{Λ0, Λ1, Λ⊥}` on the payload qubits.
//!
//! `Π0` projects onto `T0 = span{⊗_x |ψ_{k,x}>}` over the keyspace and
//! `Π1 = P Π0 P^†`. With `p = ‖Π0 + Π1‖`, `Λb = Πb / p` and
//! `Λ⊥ = I - Λ0 - Λ1`.
//!
//! Everything is computed from an orthonormal basis `U` of `T0`: with
//! `A = U^† P U`, `p = 1 + σ_max(A)` and `Tr(Π0 Π1) = ‖A‖_F²`.

use std::sync::Arc;

use nalgebra::DMatrix;

use super::{key_blocks, key_product, CommitmentParams};
use crate::prfsgen::PrfsScheme;
use crate::prsgen::PrsKey;
use crate::qcore::linalg::{hermitian_eigenvalues, psd_sqrt};
use crate::qcore::{check_qubits, PauliString};
use crate::{LabError, Result, C64};

/// Largest keyspace, in bits, that the extractor enumerates.
pub const MAX_EXTRACTOR_KEY_BITS: usize = 12;

const SPAN_CUTOFF: f64 = 1e-9;

/// Orthonormal basis of `T0`. Keys whose outputs abort with certainty have
/// no accepting component and are left out of the span.
#[derive(Debug, Clone)]
pub struct ExtractorBasis {
    m: usize,
    u: DMatrix<C64>,
    keys_used: usize,
}

impl ExtractorBasis {
    pub fn build(params: &CommitmentParams, scheme: &PrfsScheme, keys: &[PrsKey]) -> Result<Arc<Self>> {
        if params.lambda > MAX_EXTRACTOR_KEY_BITS || keys.len() > 1 << MAX_EXTRACTOR_KEY_BITS {
            return Err(LabError::EnumerationLimit {
                what: "extractor keyspace",
                bits: params.lambda,
                limit: MAX_EXTRACTOR_KEY_BITS,
            });
        }
        check_qubits(params.m)?;
        if keys.is_empty() {
            return Err(LabError::arg("empty keyspace"));
        }
        let mut columns = Vec::with_capacity(keys.len());
        for k in keys {
            let (eta, psi) = key_product(&key_blocks(params, scheme, k)?);
            if eta > 0.0 {
                columns.push(psi);
            }
        }
        if columns.is_empty() {
            return Err(LabError::arg("every key aborts with certainty; the span is empty"));
        }
        let dim = 1usize << params.m;
        let mat = DMatrix::from_fn(dim, columns.len(), |i, j| columns[j][i]);
        let svd = mat.svd(true, false);
        let full = svd.u.ok_or_else(|| LabError::arg("singular value decomposition failed"))?;
        let keep: Vec<usize> = (0..svd.singular_values.len())
            .filter(|&i| svd.singular_values[i] > SPAN_CUTOFF)
            .collect();
        let u = DMatrix::from_fn(dim, keep.len(), |i, j| full[(i, keep[j])]);
        Ok(Arc::new(Self {
            m: params.m,
            u,
            keys_used: columns.len(),
        }))
    }

    /// `dim T0`.
    pub fn rank(&self) -> usize {
        self.u.ncols()
    }

    pub fn keys_used(&self) -> usize {
        self.keys_used
    }

    pub fn num_qubits(&self) -> usize {
        self.m
    }

    /// `Π0 v`.
    pub fn project(&self, v: &[C64]) -> Vec<C64> {
        let coeffs = self.u.ad_mul(&DMatrix::from_column_slice(v.len(), 1, v));
        (&self.u * coeffs).column(0).iter().copied().collect()
    }

    pub fn povm(self: &Arc<Self>, p: &PauliString) -> Result<ExtractorPovm> {
        if p.num_qubits() != self.m {
            return Err(LabError::arg(format!("challenge on {} qubits, span on {}", p.num_qubits(), self.m)));
        }
        let mut pu = DMatrix::zeros(self.u.nrows(), self.u.ncols());
        for j in 0..self.u.ncols() {
            let col: Vec<C64> = self.u.column(j).iter().copied().collect();
            pu.set_column(j, &nalgebra::DVector::from_vec(p.apply_raw(&col)));
        }
        let a = self.u.ad_mul(&pu);
        let sigma_max = a.singular_values().iter().copied().fold(0.0f64, f64::max);
        let overlap_trace = a.iter().map(|z| z.norm_sqr()).sum();
        Ok(ExtractorPovm {
            basis: Arc::clone(self),
            pauli: p.clone(),
            p: 1.0 + sigma_max.min(1.0),
            overlap_trace,
        })
    }
}

/// The extractor for one challenge `P`.
#[derive(Debug, Clone)]
pub struct ExtractorPovm {
    basis: Arc<ExtractorBasis>,
    pauli: PauliString,
    p: f64,
    overlap_trace: f64,
}

/// Builds the span over `keys` and the POVM for `p`.
pub fn build_extractor(
    params: &CommitmentParams,
    scheme: &PrfsScheme,
    p: &PauliString,
    keys: &[PrsKey],
) -> Result<ExtractorPovm> {
    ExtractorBasis::build(params, scheme, keys)?.povm(p)
}

impl ExtractorPovm {
    /// `‖Π0 + Π1‖`, in `[1, 2]`.
    pub fn p(&self) -> f64 {
        self.p
    }

    /// `Tr(Π0 Π1)`.
    pub fn overlap_trace(&self) -> f64 {
        self.overlap_trace
    }

    pub fn pauli(&self) -> &PauliString {
        &self.pauli
    }

    pub fn basis(&self) -> &ExtractorBasis {
        &self.basis
    }

    /// `Πb v`.
    pub fn project(&self, b: bool, v: &[C64]) -> Vec<C64> {
        if b {
            let inner = self.basis.project(&self.pauli.apply_adjoint_raw(v));
            self.pauli.apply_raw(&inner)
        } else {
            self.basis.project(v)
        }
    }

    pub fn pi0(&self) -> DMatrix<C64> {
        &self.basis.u * self.basis.u.adjoint()
    }

    pub fn pi1(&self) -> DMatrix<C64> {
        self.pauli.conjugate_matrix(&self.pi0())
    }

    pub fn lambda(&self, b: bool) -> DMatrix<C64> {
        let pi = if b { self.pi1() } else { self.pi0() };
        pi / C64::new(self.p, 0.0)
    }

    pub fn lambda_bot(&self) -> DMatrix<C64> {
        let dim = 1usize << self.basis.m;
        DMatrix::identity(dim, dim) - self.lambda(false) - self.lambda(true)
    }

    /// `√Λb = Πb / √p`, since `Πb` is a projector.
    pub fn sqrt_lambda(&self, b: bool) -> DMatrix<C64> {
        let pi = if b { self.pi1() } else { self.pi0() };
        pi / C64::new(self.p.sqrt(), 0.0)
    }

    pub fn sqrt_lambda_bot(&self) -> DMatrix<C64> {
        psd_sqrt(&self.lambda_bot())
    }

    /// Largest violation of completeness, positivity and `Π1 = P Π0 P^†`
    /// over the dense operators.
    pub fn defect(&self) -> Result<f64> {
        let dim = 1usize << self.basis.m;
        let (l0, l1, lb) = (self.lambda(false), self.lambda(true), self.lambda_bot());
        let completeness = (&l0 + &l1 + &lb - DMatrix::<C64>::identity(dim, dim)).norm();
        let positivity = [l0, l1, lb]
            .iter()
            .map(|m| (-hermitian_eigenvalues(m)[0]).max(0.0))
            .fold(0.0f64, f64::max);
        let pi1 = self.pi1();
        let pm = self.pauli.matrix()?;
        let explicit = &pm * self.pi0() * pm.adjoint();
        Ok(completeness.max(positivity).max((pi1 - explicit).norm()))
    }
}

#[cfg(test)]
mod tests {
    use super::super::tests::{basis_scheme, haar_scheme};
    use super::*;
    use crate::keyset::enumerate_keys;
    use crate::qcore::operator_norm;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn dense_p(povm: &ExtractorPovm) -> f64 {
        let sum = povm.pi0() + povm.pi1();
        operator_norm(&sum).unwrap()
    }

    #[test]
    fn single_key_with_orthogonal_challenge() {
        let scheme = basis_scheme(2, 1);
        let params = CommitmentParams::from_scheme(&scheme).unwrap();
        let key = PrsKey::from_index(0b0110, 4).unwrap();
        // X on the first qubit flips the basis state
        let p = PauliString::new(4, 0b1000, 0b0011).unwrap();
        let e = build_extractor(&params, &scheme, &p, std::slice::from_ref(&key)).unwrap();
        assert_eq!(e.basis().rank(), 1);
        assert!((e.p() - 1.0).abs() < 1e-12);
        assert!(e.overlap_trace() < 1e-12);
        let expect = DMatrix::<C64>::identity(16, 16) - e.pi0() - e.pi1();
        assert!((e.lambda_bot() - expect).norm() < 1e-12);
        assert!(e.defect().unwrap() < 1e-9);
    }

    #[test]
    fn identity_challenge_gives_coincident_projectors() {
        let scheme = haar_scheme(2, 1, 2);
        let params = CommitmentParams::from_scheme(&scheme).unwrap();
        let keys = enumerate_keys(2).unwrap();
        let e = build_extractor(&params, &scheme, &PauliString::identity(4), &keys).unwrap();
        assert!((e.p() - 2.0).abs() < 1e-12);
        assert!((e.pi1() - e.pi0()).norm() < 1e-12);
        let half = e.pi0() / C64::new(2.0, 0.0);
        assert!((e.lambda(false) - &half).norm() < 1e-12);
        assert!((e.lambda(true) - &half).norm() < 1e-12);
        assert!((e.overlap_trace() - e.basis().rank() as f64).abs() < 1e-9);
    }

    #[test]
    fn closeness_and_povm_identities_per_instance() {
        let scheme = haar_scheme(2, 1, 2);
        let params = CommitmentParams::from_scheme(&scheme).unwrap();
        let keys = enumerate_keys(2).unwrap();
        let basis = ExtractorBasis::build(&params, &scheme, &keys).unwrap();
        assert_eq!(basis.rank(), 4);
        let mut rng = ChaCha20Rng::seed_from_u64(11);
        for _ in 0..30 {
            let p = PauliString::random(4, &mut rng).unwrap();
            let e = basis.povm(&p).unwrap();
            assert!(e.defect().unwrap() < 1e-9);
            assert!((e.p() - dense_p(&e)).abs() < 1e-9);
            assert!((1.0..=2.0 + 1e-12).contains(&e.p()));
            assert!(e.p() <= 1.0 + 3.0 * e.overlap_trace().sqrt() + 1e-9);
            let tr = crate::qcore::linalg::trace_of_product(&e.pi0(), &e.pi1()).re;
            assert!((tr - e.overlap_trace()).abs() < 1e-9);
            let sb = e.sqrt_lambda_bot();
            assert!((&sb * &sb - e.lambda_bot()).norm() < 1e-9);
            let s1 = e.sqrt_lambda(true);
            assert!((psd_sqrt(&e.lambda(true)) - s1).norm() < 1e-6);
        }
    }

    #[test]
    fn absorption_on_keyspace_members() {
        let scheme = haar_scheme(2, 1, 3);
        let params = CommitmentParams::from_scheme(&scheme).unwrap();
        let keys = enumerate_keys(2).unwrap();
        let basis = ExtractorBasis::build(&params, &scheme, &keys).unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(12);
        let p = PauliString::random(6, &mut rng).unwrap();
        let e = basis.povm(&p).unwrap();
        for k in &keys {
            let (_, psi) = key_product(&key_blocks(&params, &scheme, k).unwrap());
            let moved = p.apply_adjoint_raw(&psi);
            for (b, v) in [(false, &psi), (true, &moved)] {
                let back = e.project(b, v);
                let err: f64 = back.iter().zip(v.iter()).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
                assert!(err < 1e-9);
            }
        }
    }

    #[test]
    fn duplicate_states_collapse_rank() {
        let scheme = basis_scheme(1, 1);
        let params = CommitmentParams::from_scheme(&scheme).unwrap();
        let k = PrsKey::from_index(0b10, 2).unwrap();
        let e = ExtractorBasis::build(&params, &scheme, &[k.clone(), k]).unwrap();
        assert_eq!(e.rank(), 1);
        assert_eq!(e.keys_used(), 2);
    }

    #[test]
    fn large_keyspace_is_refused() {
        let scheme = haar_scheme(13, 1, 2);
        let params = CommitmentParams::from_scheme(&scheme).unwrap();
        let keys = vec![PrsKey::from_index(0, 13).unwrap()];
        assert!(matches!(
            ExtractorBasis::build(&params, &scheme, &keys),
            Err(LabError::EnumerationLimit { .. })
        ));
    }
}
