//! Pseudo one-time pad: bit `i` of the message is encrypted as the generator
//! output on input `(i, x_i)`, and decrypted by testing the block against the
//! output on `(i, 0)`.
//!
//! The input for `(i, b)` with `1 <= i <= ℓ` is `((i - 1) << 1) | b`: the
//! zero-based index on the top `d - 1` bits, the data bit last.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::games::accept_with;
use crate::prfsgen::{AbortableState, PrfsScheme};
use crate::prsgen::PrsKey;
use crate::qcore::{partial_trace, trace_distance, DensityMatrix, StateVector};
use crate::tester::{BlockLayout, RankOneTest};
use crate::{LabError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OtpCiphertext {
    pub blocks: Vec<AbortableState>,
    pub msg_len: usize,
}

impl OtpCiphertext {
    pub fn new(blocks: Vec<AbortableState>) -> Self {
        Self {
            msg_len: blocks.len(),
            blocks,
        }
    }

    /// Payload qubits of the whole ciphertext, flags excluded.
    pub fn payload_qubits(&self) -> usize {
        self.blocks.iter().map(AbortableState::num_qubits).sum()
    }

    /// `σ_1 ⊗ ... ⊗ σ_ℓ` with every block densified.
    pub fn densify(&self) -> Result<DensityMatrix> {
        let parts: Vec<DensityMatrix> = self.blocks.iter().map(AbortableState::densify).collect();
        crate::qcore::tensor(&parts)
    }

    fn validate(&self) -> Result<()> {
        if self.blocks.len() != self.msg_len {
            return Err(LabError::arg("ciphertext block count differs from its message length"));
        }
        Ok(())
    }
}

/// Generator input for message position `i` (one-based) and bit `b`.
pub fn otp_input(scheme: &PrfsScheme, i: usize, b: bool) -> Result<u64> {
    let d = scheme.input_bits();
    if d == 0 || i == 0 || (i - 1) as u64 >= 1u64 << (d - 1) {
        return Err(LabError::arg(format!("position {i} does not fit in {} index bits", d.saturating_sub(1))));
    }
    Ok(((i as u64 - 1) << 1) | b as u64)
}

fn check_len(scheme: &PrfsScheme, len: usize) -> Result<()> {
    let d = scheme.input_bits();
    if len == 0 {
        return Err(LabError::arg("empty message"));
    }
    if d == 0 || len as u64 > 1u64 << (d - 1) {
        return Err(LabError::arg(format!(
            "a {len}-bit message needs at least {} input bits, have {d}",
            (len as f64).log2().ceil() as usize + 1
        )));
    }
    Ok(())
}

/// Exact encryption: block `i` is the mixed generator output.
pub fn otp_encrypt(scheme: &PrfsScheme, key: &PrsKey, msg: &[bool]) -> Result<OtpCiphertext> {
    check_len(scheme, msg.len())?;
    let all = scheme.eval_all(key)?;
    let blocks = msg
        .iter()
        .enumerate()
        .map(|(i, &b)| Ok(all[otp_input(scheme, i + 1, b)? as usize].clone()))
        .collect::<Result<Vec<_>>>()?;
    Ok(OtpCiphertext::new(blocks))
}

/// One operational run of the generator per block; aborted blocks carry
/// `η = 0`, the others `η = 1`.
pub fn otp_encrypt_sampled<R: Rng + ?Sized>(
    scheme: &PrfsScheme,
    key: &PrsKey,
    msg: &[bool],
    rng: &mut R,
) -> Result<OtpCiphertext> {
    check_len(scheme, msg.len())?;
    let n = scheme.output_qubits();
    let blocks = msg
        .iter()
        .enumerate()
        .map(|(i, &b)| {
            let x = otp_input(scheme, i + 1, b)?;
            match scheme.eval_sampled(key, x, rng)? {
                Some(psi) => Ok(AbortableState::success(psi)),
                None => AbortableState::aborted(n),
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(OtpCiphertext::new(blocks))
}

fn zero_test(scheme: &PrfsScheme, all: &[AbortableState], i: usize) -> Result<RankOneTest> {
    let target = &all[otp_input(scheme, i, false)? as usize];
    RankOneTest::product(std::slice::from_ref(target), BlockLayout::Flagged)
}

/// Tester acceptance probability of every block against `(i, 0)`.
pub fn otp_accept_probs(scheme: &PrfsScheme, key: &PrsKey, ct: &OtpCiphertext) -> Result<Vec<f64>> {
    ct.validate()?;
    check_len(scheme, ct.msg_len)?;
    let all = scheme.eval_all(key)?;
    ct.blocks
        .iter()
        .enumerate()
        .map(|(i, block)| {
            if block.num_qubits() != scheme.output_qubits() {
                return Err(LabError::arg("ciphertext block has the wrong size"));
            }
            let test = zero_test(scheme, &all, i + 1)?;
            Ok(test.accept_pure(&block.flagged_payload().into_amps()) * block.eta())
        })
        .collect()
}

/// Exact-mode decryption: bit `i` is 0 iff the tester accepts with
/// probability above one half.
pub fn otp_decrypt(scheme: &PrfsScheme, key: &PrsKey, ct: &OtpCiphertext) -> Result<Vec<bool>> {
    Ok(otp_accept_probs(scheme, key, ct)?.into_iter().map(|p| p <= 0.5).collect())
}

/// Sampled decryption: every tester run is a fresh Bernoulli draw.
pub fn otp_decrypt_sampled<R: Rng + ?Sized>(
    scheme: &PrfsScheme,
    key: &PrsKey,
    ct: &OtpCiphertext,
    rng: &mut R,
) -> Result<Vec<bool>> {
    Ok(otp_accept_probs(scheme, key, ct)?
        .into_iter()
        .map(|p| !accept_with(p, rng))
        .collect())
}

/// Acceptance probability of block `i` (one-based) of an arbitrary joint
/// ciphertext state of `msg_len` blocks, payload-only or flagged.
pub fn otp_block_accept_prob(
    scheme: &PrfsScheme,
    key: &PrsKey,
    rho: &DensityMatrix,
    msg_len: usize,
    i: usize,
) -> Result<f64> {
    check_len(scheme, msg_len)?;
    if i == 0 || i > msg_len {
        return Err(LabError::arg(format!("block {i} out of range")));
    }
    let n = scheme.output_qubits();
    let layout = BlockLayout::infer(rho.num_qubits(), msg_len, n)?;
    let w = layout.block_qubits(n);
    let keep: Vec<usize> = ((i - 1) * w..i * w).collect();
    let block = partial_trace(rho, &keep)?;
    let target = scheme.eval(key, otp_input(scheme, i, false)?)?;
    Ok(RankOneTest::product(&[target], layout)?.accept_mixed(&block))
}

/// Trace distance between the key-averaged single-copy ciphertext of `msg`
/// and `(|0><0| ⊗ I / 2^n)^{⊗ℓ}`.
pub fn otp_single_copy_report(scheme: &PrfsScheme, keys: &[PrsKey], msg: &[bool]) -> Result<f64> {
    if keys.is_empty() {
        return Err(LabError::arg("empty keyset"));
    }
    check_len(scheme, msg.len())?;
    let n = scheme.output_qubits();
    let total = msg.len() * (n + 1);
    crate::qcore::check_qubits(total)?;
    let w = 1.0 / keys.len() as f64;
    // each densified block is η|0ψ><0ψ| + (1-η)|⊥><⊥|; expand the product
    let terms = crate::rng::par_trials(keys.len() as u64, |k| {
        let ct = otp_encrypt(scheme, &keys[k as usize], msg)?;
        let mut parts: Vec<(f64, StateVector)> = vec![(w, StateVector::basis(0, 0)?)];
        for b in &ct.blocks {
            let good = b.flagged_payload();
            let bot = AbortableState::bottom(n)?;
            let mut next = Vec::with_capacity(parts.len() * 2);
            for (pw, v) in &parts {
                if b.eta() > 0.0 {
                    next.push((pw * b.eta(), v.kron(&good)?));
                }
                if b.eta() < 1.0 {
                    next.push((pw * (1.0 - b.eta()), v.kron(&bot)?));
                }
            }
            parts = next;
        }
        Ok(parts)
    })?;
    let flat: Vec<&(f64, StateVector)> = terms.iter().flatten().collect();
    let mean = DensityMatrix::from_ensemble(total, flat.iter().map(|(p, v)| (*p, v)))?;
    let ideal_block = StateVector::basis(1, 0)?.density().kron(&DensityMatrix::maximally_mixed(n)?)?;
    let ideal_parts = vec![ideal_block; msg.len()];
    trace_distance(&mean, &crate::qcore::tensor(&ideal_parts)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prsgen::PrsSpec;
    use crate::rng::seed_derive;

    /// Key-chop family over the 8 basis states of 3 qubits: every key
    /// block selects a distinct basis state, so outputs are orthogonal.
    fn orthogonal_family() -> PrfsScheme {
        let states = (0..8).map(|i| StateVector::basis(3, i).unwrap()).collect();
        PrfsScheme::key_chop(PrsSpec::table(states, 3).unwrap(), 3).unwrap()
    }

    fn distinct_key() -> PrsKey {
        // blocks 0..7 in order
        let blocks: Vec<PrsKey> = (0..8).map(|i| PrsKey::from_index(i, 3).unwrap()).collect();
        PrsKey::concat(&blocks).unwrap()
    }

    #[test]
    fn input_encoding() {
        let s = orthogonal_family();
        assert_eq!(otp_input(&s, 1, false).unwrap(), 0);
        assert_eq!(otp_input(&s, 1, true).unwrap(), 1);
        assert_eq!(otp_input(&s, 4, true).unwrap(), 7);
        assert!(otp_input(&s, 5, false).is_err());
        assert!(otp_input(&s, 0, false).is_err());
    }

    #[test]
    fn exact_roundtrip_on_orthogonal_family() {
        let s = orthogonal_family();
        let key = distinct_key();
        for m in 0..16u64 {
            let msg = crate::bits::u64_to_bits(m, 4);
            let ct = otp_encrypt(&s, &key, &msg).unwrap();
            assert_eq!(otp_decrypt(&s, &key, &ct).unwrap(), msg);
            assert_eq!(ct, otp_encrypt(&s, &key, &msg).unwrap());
        }
        assert!(otp_encrypt(&s, &key, &[false; 5]).is_err());
    }

    #[test]
    fn single_bit_ciphertext_is_one_output() {
        let s = orthogonal_family();
        let key = distinct_key();
        let ct = otp_encrypt(&s, &key, &[true]).unwrap();
        assert_eq!(ct.blocks, vec![s.eval(&key, 1).unwrap()]);
        assert_eq!(ct.densify().unwrap().num_qubits(), 4);
    }

    #[test]
    fn maximally_mixed_block_decodes_to_one() {
        let s = orthogonal_family();
        let key = distinct_key();
        let mm = DensityMatrix::maximally_mixed(3).unwrap();
        let p = otp_block_accept_prob(&s, &key, &mm, 1, 1).unwrap();
        assert!((1.0 - p - (1.0 - 1.0 / 8.0)).abs() < 1e-12);
    }

    #[test]
    fn block_independence() {
        let s = PrfsScheme::post_select(PrsSpec::ideal_haar(5, 4).unwrap(), 2).unwrap();
        let key = PrsKey::from_index(9, 4).unwrap();
        let ct = otp_encrypt(&s, &key, &[false, true]).unwrap();
        let rho = ct.densify().unwrap();
        let mut rng = seed_derive(1, 0, "t");
        let other = crate::testutil::random_density(4, &mut rng);
        let swapped = crate::qcore::tensor(&[ct.blocks[0].densify(), other]).unwrap();
        let a = otp_block_accept_prob(&s, &key, &rho, 2, 1).unwrap();
        let b = otp_block_accept_prob(&s, &key, &swapped, 2, 1).unwrap();
        assert!((a - b).abs() < 1e-12);
        let direct = otp_accept_probs(&s, &key, &ct).unwrap();
        assert!((a - direct[0]).abs() < 1e-12);
    }

    #[test]
    fn single_key_report_is_large() {
        let s = PrfsScheme::key_chop(PrsSpec::binary_phase(3, 4).unwrap(), 2).unwrap();
        let key = PrsKey::from_index(0xbeef, 16).unwrap();
        let td = otp_single_copy_report(&s, &[key], &[true, false]).unwrap();
        assert!(td >= 0.5, "{td}");
    }
}
