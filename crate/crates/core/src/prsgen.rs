//! Keyed pure-state generators.
//!
//! Two instantiations are provided: binary-phase states whose sign pattern is
//! read off SHA-256, and an idealized generator that expands the key into a
//! Haar sample. A third, table-driven kind serves as a controllable test
//! family.

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use sha2::{Digest, Sha256};

use crate::games::{play, GameInput};
use crate::haarlab::haar_state;
use crate::qcore::{check_qubits, StateVector};
use crate::rng::LabRng;
use crate::stats::Advantage;
use crate::{LabError, Result, C64};

/// A `bits`-bit key stored big-endian in `ceil(bits / 8)` bytes.
///
/// The key string is the low `bits` bits of that big-endian integer, so key
/// bit 0 is its most significant bit and unused leading bits are zero.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PrsKey {
    bytes: Vec<u8>,
    bits: usize,
}

impl PrsKey {
    pub fn new(bytes: Vec<u8>, bits: usize) -> Result<Self> {
        if bits == 0 {
            return Err(LabError::arg("keys need at least one bit"));
        }
        if bytes.len() != bits.div_ceil(8) {
            return Err(LabError::arg(format!(
                "a {bits}-bit key takes {} bytes, got {}",
                bits.div_ceil(8),
                bytes.len()
            )));
        }
        let spare = bytes.len() * 8 - bits;
        if spare > 0 && bytes[0] >> (8 - spare) != 0 {
            return Err(LabError::arg(format!("key value does not fit in {bits} bits")));
        }
        Ok(Self { bytes, bits })
    }

    /// The key whose big-endian value is `index`.
    pub fn from_index(index: u64, bits: usize) -> Result<Self> {
        if bits < 64 && index >> bits != 0 {
            return Err(LabError::arg(format!("key index {index} does not fit in {bits} bits")));
        }
        let len = bits.div_ceil(8);
        let mut bytes = vec![0u8; len];
        for (i, b) in bytes.iter_mut().rev().enumerate().take(8) {
            *b = (index >> (8 * i)) as u8;
        }
        Self::new(bytes, bits)
    }

    pub fn random<R: Rng + ?Sized>(bits: usize, rng: &mut R) -> Result<Self> {
        if bits == 0 {
            return Err(LabError::arg("keys need at least one bit"));
        }
        let mut bytes = vec![0u8; bits.div_ceil(8)];
        rng.fill(bytes.as_mut_slice());
        let spare = bytes.len() * 8 - bits;
        bytes[0] &= 0xffu8.checked_shr(spare as u32).unwrap_or(0);
        Self::new(bytes, bits)
    }

    pub fn from_hex(hex_str: &str, bits: usize) -> Result<Self> {
        let bytes = hex::decode(hex_str).map_err(|e| LabError::arg(format!("bad key hex: {e}")))?;
        Self::new(bytes, bits)
    }

    pub fn to_hex(&self) -> String {
        hex::encode(&self.bytes)
    }

    pub fn bytes(&self) -> &[u8] {
        &self.bytes
    }

    pub fn bits(&self) -> usize {
        self.bits
    }

    /// Bit `i` of the key string, counting from the most significant.
    pub fn bit(&self, i: usize) -> bool {
        let pos = self.bytes.len() * 8 - self.bits + i;
        self.bytes[pos / 8] >> (7 - pos % 8) & 1 == 1
    }

    /// The low 64 bits of the key value.
    pub fn index(&self) -> u64 {
        self.bytes.iter().fold(0u64, |acc, &b| acc << 8 | b as u64)
    }

    /// Splits the key string into `count` consecutive blocks of equal size.
    pub fn blocks(&self, count: usize) -> Result<Vec<PrsKey>> {
        if count == 0 || self.bits % count != 0 {
            return Err(LabError::arg(format!("cannot split a {}-bit key into {count} blocks", self.bits)));
        }
        let width = self.bits / count;
        (0..count)
            .map(|b| {
                let mut bytes = vec![0u8; width.div_ceil(8)];
                let spare = bytes.len() * 8 - width;
                for j in 0..width {
                    if self.bit(b * width + j) {
                        let pos = spare + j;
                        bytes[pos / 8] |= 0x80 >> (pos % 8);
                    }
                }
                PrsKey::new(bytes, width)
            })
            .collect()
    }

    /// Concatenates key strings in order.
    pub fn concat(parts: &[PrsKey]) -> Result<PrsKey> {
        let bits: usize = parts.iter().map(|k| k.bits).sum();
        if bits == 0 {
            return Err(LabError::arg("nothing to concatenate"));
        }
        let mut bytes = vec![0u8; bits.div_ceil(8)];
        let spare = bytes.len() * 8 - bits;
        let mut pos = spare;
        for k in parts {
            for j in 0..k.bits {
                if k.bit(j) {
                    bytes[pos / 8] |= 0x80 >> (pos % 8);
                }
                pos += 1;
            }
        }
        PrsKey::new(bytes, bits)
    }
}

impl fmt::Display for PrsKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex())
    }
}

#[derive(Serialize, Deserialize)]
struct KeyWire {
    bits: usize,
    hex: String,
}

impl Serialize for PrsKey {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        KeyWire {
            bits: self.bits,
            hex: self.to_hex(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for PrsKey {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let w = KeyWire::deserialize(d)?;
        PrsKey::from_hex(&w.hex, w.bits).map_err(serde::de::Error::custom)
    }
}

/// Which generator family a [`PrsSpec`] evaluates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PrsKind {
    /// `2^{-n/2} sum_x (-1)^{f_k(x)} |x>`, `f_k(x)` the low bit of
    /// `SHA-256(key || x as 8 bytes BE)`.
    BinaryPhase,
    /// A Haar sample drawn from ChaCha20 seeded with `SHA-256(key)`.
    IdealHaar,
    /// Key value modulo the table length selects a fixed state.
    #[serde(skip)]
    Table(Arc<Vec<StateVector>>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrsSpec {
    pub kind: PrsKind,
    pub output_qubits: usize,
    pub key_bits: usize,
}

impl PrsSpec {
    pub fn new(kind: PrsKind, output_qubits: usize, key_bits: usize) -> Result<Self> {
        let spec = Self {
            kind,
            output_qubits,
            key_bits,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn binary_phase(output_qubits: usize, key_bits: usize) -> Result<Self> {
        Self::new(PrsKind::BinaryPhase, output_qubits, key_bits)
    }

    pub fn ideal_haar(output_qubits: usize, key_bits: usize) -> Result<Self> {
        Self::new(PrsKind::IdealHaar, output_qubits, key_bits)
    }

    /// A table family; every state must have the same qubit count.
    pub fn table(states: Vec<StateVector>, key_bits: usize) -> Result<Self> {
        let n = states.first().map(StateVector::num_qubits).unwrap_or(0);
        Self::new(PrsKind::Table(Arc::new(states)), n, key_bits)
    }

    pub fn validate(&self) -> Result<()> {
        if self.output_qubits == 0 {
            return Err(LabError::arg("generators need at least one output qubit"));
        }
        if self.key_bits == 0 {
            return Err(LabError::arg("generators need at least one key bit"));
        }
        check_qubits(self.output_qubits)?;
        if let PrsKind::Table(states) = &self.kind {
            if states.is_empty() || states.iter().any(|s| s.num_qubits() != self.output_qubits) {
                return Err(LabError::arg("table states must be non-empty and equally sized"));
            }
        }
        Ok(())
    }

    pub(crate) fn check_key(&self, key: &PrsKey) -> Result<()> {
        if key.bits() != self.key_bits {
            return Err(LabError::arg(format!(
                "expected a {}-bit key, got {} bits",
                self.key_bits,
                key.bits()
            )));
        }
        Ok(())
    }
}

fn phase_bit(key: &PrsKey, x: u64) -> bool {
    let mut h = Sha256::new();
    h.update(key.bytes());
    h.update(x.to_be_bytes());
    h.finalize()[31] & 1 == 1
}

/// Evaluates the generator; deterministic in `(spec, key)`.
pub fn prs_eval(spec: &PrsSpec, key: &PrsKey) -> Result<StateVector> {
    spec.validate()?;
    spec.check_key(key)?;
    let n = spec.output_qubits;
    match &spec.kind {
        PrsKind::BinaryPhase => {
            let a = (-(n as f64) / 2.0).exp2();
            let amps = (0..1u64 << n)
                .map(|x| C64::new(if phase_bit(key, x) { -a } else { a }, 0.0))
                .collect();
            StateVector::subnormalized(amps)
        }
        PrsKind::IdealHaar => {
            let seed: [u8; 32] = Sha256::digest(key.bytes()).into();
            haar_state(n, &mut ChaCha20Rng::from_seed(seed))
        }
        PrsKind::Table(states) => Ok(states[(key.index() % states.len() as u64) as usize].clone()),
    }
}

/// Monte Carlo estimate of the `t`-copy distinguishing advantage against
/// Haar-random states. Each trial draws a fresh key (real world) or a fresh
/// Haar state (ideal world).
pub fn prs_game<R, D>(spec: &PrsSpec, t: usize, distinguisher: D, trials: u64, rng: &mut R) -> Result<Advantage>
where
    R: Rng + ?Sized,
    D: Fn(&GameInput, &mut LabRng) -> Result<bool> + Sync,
{
    spec.validate()?;
    check_qubits(t * spec.output_qubits)?;
    let n = spec.output_qubits;
    play(
        trials,
        rng,
        |r| {
            let key = PrsKey::random(spec.key_bits, r)?;
            Ok(GameInput::copies(&prs_eval(spec, &key)?.density(), t))
        },
        |r| Ok(GameInput::copies(&haar_state(n, r)?.density(), t)),
        distinguisher,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::games::{constant, swap_test_on};
    use crate::qcore::trace_distance;
    use crate::rng::seed_derive;
    use crate::qcore::DensityMatrix;

    #[test]
    fn key_encoding() {
        let k = PrsKey::from_index(0b1011, 4).unwrap();
        assert_eq!(k.bytes(), &[0x0b]);
        assert!(k.bit(0) && !k.bit(1) && k.bit(2) && k.bit(3));
        assert_eq!(k.index(), 11);
        assert!(PrsKey::from_index(16, 4).is_err());
        assert!(PrsKey::new(vec![0x10], 4).is_err());
        let k = PrsKey::from_index(0x1234, 16).unwrap();
        assert_eq!(k.to_hex(), "1234");
        assert_eq!(PrsKey::from_hex("1234", 16).unwrap(), k);
        let json = serde_json::to_string(&k).unwrap();
        assert_eq!(json, r#"{"bits":16,"hex":"1234"}"#);
    }

    #[test]
    fn key_blocks_roundtrip() {
        let k = PrsKey::from_index(0b1100_0101_10, 10).unwrap();
        let blocks = k.blocks(2).unwrap();
        assert_eq!(blocks[0].index(), 0b11000);
        assert_eq!(blocks[1].index(), 0b10110);
        assert_eq!(PrsKey::concat(&blocks).unwrap(), k);
        assert!(k.blocks(3).is_err());
        let mut rng = seed_derive(1, 0, "k");
        for bits in [1, 7, 8, 9, 24] {
            let k = PrsKey::random(bits, &mut rng).unwrap();
            assert_eq!(k.bits(), bits);
        }
    }

    #[test]
    fn binary_phase_is_flat_and_deterministic() {
        let spec = PrsSpec::binary_phase(5, 8).unwrap();
        let key = PrsKey::from_index(77, 8).unwrap();
        let a = prs_eval(&spec, &key).unwrap();
        let b = prs_eval(&spec, &key).unwrap();
        assert_eq!(a, b);
        assert!((a.norm() - 1.0).abs() < 1e-12);
        for amp in a.amps() {
            assert_eq!(amp.norm(), (-2.5f64).exp2());
            assert_eq!(amp.im, 0.0);
        }
        assert!((a.density().purity() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn phase_bit_matches_reference_hash() {
        // f_k(x) is the low bit of the last digest byte of key || x (8 bytes BE)
        let key = PrsKey::from_index(0xab, 8).unwrap();
        let mut input = vec![0xabu8];
        input.extend_from_slice(&5u64.to_be_bytes());
        let digest = Sha256::digest(&input);
        let spec = PrsSpec::binary_phase(3, 8).unwrap();
        let amp = prs_eval(&spec, &key).unwrap().amps()[5];
        assert_eq!(amp.re < 0.0, digest[31] & 1 == 1);
    }

    #[test]
    fn ideal_haar_family_average() {
        let spec = PrsSpec::ideal_haar(3, 10).unwrap();
        let states: Vec<StateVector> = (0..1024)
            .map(|i| prs_eval(&spec, &PrsKey::from_index(i, 10).unwrap()).unwrap())
            .collect();
        let w = 1.0 / 1024.0;
        let mean = DensityMatrix::from_ensemble(3, states.iter().map(|s| (w, s))).unwrap();
        let td = trace_distance(&mean, &DensityMatrix::maximally_mixed(3).unwrap()).unwrap();
        assert!(td <= 0.06, "{td}");
        assert_eq!(states[3], prs_eval(&spec, &PrsKey::from_index(3, 10).unwrap()).unwrap());
    }

    #[test]
    fn binary_phase_pairs_are_near_orthogonal() {
        let spec = PrsSpec::binary_phase(4, 8).unwrap();
        let states: Vec<StateVector> = (0..256)
            .map(|i| prs_eval(&spec, &PrsKey::from_index(i, 8).unwrap()).unwrap())
            .collect();
        let mut rng = seed_derive(2, 0, "pairs");
        let mut total = 0.0;
        let mut count = 0;
        while count < 100 {
            let (a, b) = (rng.random_range(0..256), rng.random_range(0..256));
            if a == b {
                continue;
            }
            total += states[a].overlap(&states[b]).unwrap();
            count += 1;
        }
        assert!((total / 100.0 - 1.0 / 16.0).abs() <= 0.05);
    }

    #[test]
    fn table_kind_cycles() {
        let states = vec![StateVector::basis(1, 0).unwrap(), StateVector::basis(1, 1).unwrap()];
        let spec = PrsSpec::table(states, 3).unwrap();
        let s = prs_eval(&spec, &PrsKey::from_index(5, 3).unwrap()).unwrap();
        assert_eq!(s, StateVector::basis(1, 1).unwrap());
        assert!(prs_eval(&spec, &PrsKey::from_index(1, 4).unwrap()).is_err());
        assert!(PrsSpec::table(vec![], 3).is_err());
    }

    #[test]
    fn constant_distinguisher_has_no_advantage() {
        let spec = PrsSpec::binary_phase(2, 4).unwrap();
        let adv = prs_game(&spec, 1, constant(true), 500, &mut seed_derive(3, 0, "g")).unwrap();
        assert_eq!(adv.value, 0.0);
        assert_eq!(adv.real_accept, 1.0);
    }

    #[test]
    fn swap_test_on_identical_copies() {
        // both worlds hand over two copies of one pure state, so SWAP always accepts
        let spec = PrsSpec::binary_phase(4, 8).unwrap();
        let adv = prs_game(&spec, 2, swap_test_on(0, 1), 2000, &mut seed_derive(4, 0, "g")).unwrap();
        assert_eq!(adv.value, 0.0);
        assert_eq!((adv.real_accept, adv.ideal_accept), (1.0, 1.0));
    }
}
