//! Bit encryption secure against chosen plaintexts, and one-time MACs.
//!
//! Encrypting `b` draws `r` of `d - 1` bits and sends `(r, G(k, r‖b))`,
//! with the input packed as `(r << 1) | b`. Decryption tests the payload
//! against `G(k, r‖0)`. A tag for an `ℓ`-bit message is `G(k, m‖0^{d-ℓ})`.

use nalgebra::DMatrix;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bits::bits_to_u64;
use crate::games::accept_with;
use crate::haarlab::haar_state;
use crate::prfsgen::{AbortableState, PrfsScheme};
use crate::prsgen::PrsKey;
use crate::qcore::linalg::psd_inverse_sqrt;
use crate::qcore::{check_qubits, DensityMatrix};
use crate::rng::{par_trials, LabRng, SeedTree};
use crate::stats::Estimate;
use crate::tester::{BlockLayout, RankOneTest, TestOutcome};
use crate::{LabError, Result, C64};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CpaCiphertext {
    pub r: u64,
    pub r_bits: usize,
    pub payload: AbortableState,
}

fn check_cpa_scheme(scheme: &PrfsScheme) -> Result<usize> {
    let d = scheme.input_bits();
    if d < 2 {
        return Err(LabError::arg(format!("encryption needs at least 2 input bits, have {d}")));
    }
    Ok(d - 1)
}

impl CpaCiphertext {
    fn check(&self, scheme: &PrfsScheme) -> Result<()> {
        let bits = check_cpa_scheme(scheme)?;
        if self.r_bits != bits || self.r >> bits != 0 {
            return Err(LabError::arg(format!("randomness must have exactly {bits} bits")));
        }
        if self.payload.num_qubits() != scheme.output_qubits() {
            return Err(LabError::arg("payload size differs from the generator output"));
        }
        Ok(())
    }
}

/// Uniform `r` of `d - 1` bits.
pub fn cpa_sample_r<R: Rng + ?Sized>(scheme: &PrfsScheme, rng: &mut R) -> Result<u64> {
    let bits = check_cpa_scheme(scheme)?;
    Ok(rng.random::<u64>() & ((1u64 << bits) - 1))
}

pub fn cpa_encrypt<R: Rng + ?Sized>(scheme: &PrfsScheme, key: &PrsKey, b: bool, rng: &mut R) -> Result<CpaCiphertext> {
    let r_bits = check_cpa_scheme(scheme)?;
    let r = cpa_sample_r(scheme, rng)?;
    Ok(CpaCiphertext {
        r,
        r_bits,
        payload: scheme.eval(key, (r << 1) | b as u64)?,
    })
}

/// Acceptance of the tester for `G(k, r‖0)` on `rho`, which may be a bare
/// payload or a flagged block.
pub fn cpa_accept_prob(scheme: &PrfsScheme, key: &PrsKey, r: u64, rho: &DensityMatrix) -> Result<f64> {
    let bits = check_cpa_scheme(scheme)?;
    if r >> bits != 0 {
        return Err(LabError::arg(format!("randomness must have exactly {bits} bits")));
    }
    let layout = BlockLayout::infer(rho.num_qubits(), 1, scheme.output_qubits())?;
    let target = scheme.eval(key, r << 1)?;
    Ok(RankOneTest::product(&[target], layout)?.accept_mixed(rho))
}

/// Exact decryption: 0 iff the tester accepts with probability above ½.
pub fn cpa_decrypt(scheme: &PrfsScheme, key: &PrsKey, ct: &CpaCiphertext) -> Result<bool> {
    ct.check(scheme)?;
    Ok(cpa_accept_prob(scheme, key, ct.r, &ct.payload.densify())? <= 0.5)
}

/// One run of the tester; outputs 0 on accept.
pub fn cpa_decrypt_sampled<R: Rng + ?Sized>(
    scheme: &PrfsScheme,
    key: &PrsKey,
    ct: &CpaCiphertext,
    rng: &mut R,
) -> Result<bool> {
    ct.check(scheme)?;
    let p = cpa_accept_prob(scheme, key, ct.r, &ct.payload.densify())?;
    Ok(!accept_with(p, rng))
}

/// What the adversary holds after its queries: one ciphertext per query
/// pair, encrypting the pair's `z`-th bit.
#[derive(Debug, Clone, PartialEq)]
pub struct CpaView {
    pub queries: Vec<(bool, bool)>,
    pub ciphertexts: Vec<CpaCiphertext>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CpaGameResult {
    /// Win rate minus ½.
    pub advantage: Estimate,
    /// Fraction of trials in which two queries drew the same `r`.
    pub collision_rate: Estimate,
    /// Exact probability of such a collision.
    pub collision_probability: f64,
}

/// Probability that `t` uniform draws from `2^{d-1}` values are not all
/// distinct.
pub fn cpa_collision_probability(d: usize, t: usize) -> f64 {
    let space = (d as f64 - 1.0).exp2();
    1.0 - (0..t).map(|i| (1.0 - i as f64 / space).max(0.0)).product::<f64>()
}

/// Runs the challenger `trials` times with a fresh key and secret `z` per
/// trial. Every query draws its own `r`.
pub fn cpa_game<R, D>(
    scheme: &PrfsScheme,
    queries: &[(bool, bool)],
    distinguisher: D,
    trials: u64,
    rng: &mut R,
) -> Result<CpaGameResult>
where
    R: Rng + ?Sized,
    D: Fn(&CpaView, &mut LabRng) -> Result<bool> + Sync,
{
    if trials == 0 {
        return Err(LabError::arg("trials must be positive"));
    }
    if queries.is_empty() {
        return Err(LabError::arg("the adversary must make at least one query"));
    }
    check_cpa_scheme(scheme)?;
    check_qubits(queries.len() * scheme.output_qubits())?;
    let seeds = SeedTree::from_rng(rng, "cpa");
    let results = par_trials(trials, |i| {
        let mut r = seeds.stream(i);
        let key = PrsKey::random(scheme.key_bits(), &mut r)?;
        let z: bool = r.random();
        let ciphertexts = queries
            .iter()
            .map(|&(b0, b1)| cpa_encrypt(scheme, &key, if z { b1 } else { b0 }, &mut r))
            .collect::<Result<Vec<_>>>()?;
        let mut seen: Vec<u64> = ciphertexts.iter().map(|c| c.r).collect();
        seen.sort_unstable();
        let collided = seen.windows(2).any(|w| w[0] == w[1]);
        let view = CpaView {
            queries: queries.to_vec(),
            ciphertexts,
        };
        let guess = distinguisher(&view, &mut r)?;
        Ok((guess == z, collided))
    })?;
    let wins = results.iter().filter(|r| r.0).count() as u64;
    let collisions = results.iter().filter(|r| r.1).count() as u64;
    let mut advantage = Estimate::frequency(wins, trials);
    advantage.value -= 0.5;
    Ok(CpaGameResult {
        advantage,
        collision_rate: Estimate::frequency(collisions, trials),
        collision_probability: cpa_collision_probability(scheme.input_bits(), queries.len()),
    })
}

/// Measurement vectors `w_k` of the pretty good measurement for the pure
/// states `states` under a uniform prior: `w = V G^{-1/2}` with `G` the Gram
/// matrix. Outcome `k` has probability `|<w_k|ψ>|²`.
pub(crate) fn pgm_vectors(states: &[Vec<C64>]) -> Vec<Vec<C64>> {
    let k = states.len();
    let gram = DMatrix::from_fn(k, k, |i, j| {
        states[i].iter().zip(&states[j]).map(|(a, b)| a.conj() * b).sum::<C64>()
    });
    let g = psd_inverse_sqrt(&gram, 1e-12);
    (0..k)
        .map(|col| {
            let dim = states[0].len();
            (0..dim)
                .map(|y| (0..k).map(|i| states[i][y] * g[(i, col)]).sum())
                .collect()
        })
        .collect()
}

/// Known-plaintext key recovery: query `known` must encrypt the same bit
/// in both worlds. Its ciphertext is measured with the pretty good
/// measurement over `keys` (a random candidate on abort or an
/// inconclusive outcome), and the guessed key decrypts the ciphertext of
/// query `challenge`.
pub fn key_recovery_distinguisher(
    scheme: PrfsScheme,
    keys: Vec<PrsKey>,
    known: usize,
    challenge: usize,
) -> impl Fn(&CpaView, &mut LabRng) -> Result<bool> + Sync {
    move |view, rng| {
        let get = |i: usize| {
            view.ciphertexts
                .get(i)
                .zip(view.queries.get(i))
                .ok_or_else(|| LabError::Callback(format!("no query {i}")))
        };
        let (kct, &(m0, m1)) = get(known)?;
        let (cct, &(c0, c1)) = get(challenge)?;
        if m0 != m1 || c0 == c1 || keys.is_empty() {
            return Err(LabError::Callback("key recovery needs a known plaintext and a real challenge".into()));
        }
        let input = (kct.r << 1) | m0 as u64;
        let candidates = keys
            .iter()
            .map(|k| Ok(scheme.eval(k, input)?.psi().amps().to_vec()))
            .collect::<Result<Vec<_>>>()?;
        let mut guess = None;
        if accept_with(kct.payload.eta(), rng) {
            let psi = kct.payload.psi().amps();
            let mut u: f64 = rng.random();
            for (i, w) in pgm_vectors(&candidates).iter().enumerate() {
                let amp: C64 = w.iter().zip(psi).map(|(a, b)| a.conj() * b).sum();
                u -= amp.norm_sqr();
                if u < 0.0 {
                    guess = Some(i);
                    break;
                }
            }
        }
        let idx = match guess {
            Some(i) => i,
            None => rng.random_range(0..keys.len()),
        };
        let bit = cpa_decrypt_sampled(&scheme, &keys[idx], cct, rng)?;
        Ok(bit == c1)
    }
}

/// A tag on `n` payload qubits for a message of `msg_len` bits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MacTag {
    pub payload: AbortableState,
    pub msg_len: usize,
}

/// Generator input for `msg`, padded with trailing zeros to `d` bits.
pub fn mac_input(scheme: &PrfsScheme, msg: &[bool]) -> Result<u64> {
    let d = scheme.input_bits();
    if msg.len() > d {
        return Err(LabError::arg(format!("message of {} bits exceeds {d} input bits", msg.len())));
    }
    Ok(bits_to_u64(msg)? << (d - msg.len()))
}

pub fn mac_sign(scheme: &PrfsScheme, key: &PrsKey, msg: &[bool]) -> Result<MacTag> {
    Ok(MacTag {
        payload: scheme.eval(key, mac_input(scheme, msg)?)?,
        msg_len: msg.len(),
    })
}

/// Tests the densified tag against `G(k, m)`.
pub fn mac_verify(scheme: &PrfsScheme, key: &PrsKey, msg: &[bool], tag: &MacTag) -> Result<TestOutcome> {
    if tag.msg_len != msg.len() {
        return Err(LabError::arg("tag was issued for a message of a different length"));
    }
    mac_verify_state(scheme, key, msg, &tag.payload.densify())
}

/// Tests an arbitrary candidate tag, bare or flagged.
pub fn mac_verify_state(scheme: &PrfsScheme, key: &PrsKey, msg: &[bool], rho: &DensityMatrix) -> Result<TestOutcome> {
    let target = scheme.eval(key, mac_input(scheme, msg)?)?;
    let layout = BlockLayout::infer(rho.num_qubits(), 1, scheme.output_qubits())?;
    RankOneTest::product(&[target], layout)?.apply(rho)
}

/// What a forger sees. `key` is exposed only so that reference forgers can
/// be written; a forger that reads it is not an attack.
pub struct ForgerView<'a> {
    pub key: &'a PrsKey,
    pub tags: &'a [(Vec<bool>, MacTag)],
    pub target: &'a [bool],
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MacForgeryReport {
    /// Key-averaged acceptance of the forged tag; the error is across keys.
    pub accept: Estimate,
    pub keys: usize,
}

/// `E_k Pr[Verify(k, m*, σ*) = 1]` with `σ*` the forger's output on tags
/// for `msgs`.
pub fn mac_forgery_stats<R, F>(
    scheme: &PrfsScheme,
    keys: &[PrsKey],
    msgs: &[Vec<bool>],
    target: &[bool],
    forger: F,
    rng: &mut R,
) -> Result<MacForgeryReport>
where
    R: Rng + ?Sized,
    F: Fn(&ForgerView, &mut LabRng) -> Result<DensityMatrix> + Sync,
{
    if keys.is_empty() {
        return Err(LabError::arg("empty keyset"));
    }
    let x_target = mac_input(scheme, target)?;
    for m in msgs {
        if m.len() == target.len() && mac_input(scheme, m)? == x_target {
            return Err(LabError::arg("target message was already signed"));
        }
    }
    let seeds = SeedTree::from_rng(rng, "forgery");
    let per_key = par_trials(keys.len() as u64, |i| {
        let key = &keys[i as usize];
        let tags = msgs
            .iter()
            .map(|m| Ok((m.clone(), mac_sign(scheme, key, m)?)))
            .collect::<Result<Vec<_>>>()?;
        let view = ForgerView {
            key,
            tags: &tags,
            target,
        };
        let forged = forger(&view, &mut seeds.stream(i))?;
        Ok(mac_verify_state(scheme, key, target, &forged)?.p_accept)
    })?;
    Ok(MacForgeryReport {
        accept: Estimate::mean(&per_key),
        keys: keys.len(),
    })
}

/// Outputs a fresh Haar state on the payload qubits.
pub fn haar_forger(n: usize) -> impl Fn(&ForgerView, &mut LabRng) -> Result<DensityMatrix> + Sync {
    move |_, rng| Ok(haar_state(n, rng)?.density())
}

/// Replays the densified tag of query `i`.
pub fn replay_forger(i: usize) -> impl Fn(&ForgerView, &mut LabRng) -> Result<DensityMatrix> + Sync {
    move |view, _| {
        let (_, tag) = view
            .tags
            .get(i)
            .ok_or_else(|| LabError::Callback(format!("no tag {i} to replay")))?;
        Ok(tag.payload.densify())
    }
}

/// Signs the target with the real key.
pub fn keyed_forger(scheme: PrfsScheme) -> impl Fn(&ForgerView, &mut LabRng) -> Result<DensityMatrix> + Sync {
    move |view, _| Ok(mac_sign(&scheme, view.key, view.target)?.payload.densify())
}
