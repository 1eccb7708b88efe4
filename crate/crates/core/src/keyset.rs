//! Key collections that experiments average over.

use serde::{Deserialize, Serialize};

use crate::prsgen::PrsKey;
use crate::rng::seed_derive;
use crate::{LabError, Result};

/// Key spaces up to this many bits may be enumerated.
pub const MAX_ENUMERATED_KEY_BITS: usize = 16;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case", deny_unknown_fields)]
pub enum Keyset {
    /// Every key of the requested length, in increasing order.
    Enumerate,
    Explicit { keys: Vec<PrsKey> },
    /// `count` keys drawn uniformly (with repetition) from a seeded stream.
    Random { count: usize, seed: u64 },
}

impl Keyset {
    pub fn keys(&self, bits: usize) -> Result<Vec<PrsKey>> {
        match self {
            Keyset::Enumerate => enumerate_keys(bits),
            Keyset::Explicit { keys } => {
                if keys.is_empty() {
                    return Err(LabError::arg("explicit keyset is empty"));
                }
                if let Some(k) = keys.iter().find(|k| k.bits() != bits) {
                    return Err(LabError::arg(format!("key {k} has {} bits, expected {bits}", k.bits())));
                }
                Ok(keys.clone())
            }
            Keyset::Random { count, seed } => {
                if *count == 0 {
                    return Err(LabError::arg("random keyset needs a positive count"));
                }
                let mut rng = seed_derive(*seed, 0, "keyset");
                (0..*count).map(|_| PrsKey::random(bits, &mut rng)).collect()
            }
        }
    }
}

/// All `2^bits` keys in increasing order.
pub fn enumerate_keys(bits: usize) -> Result<Vec<PrsKey>> {
    if bits > MAX_ENUMERATED_KEY_BITS {
        return Err(LabError::EnumerationLimit {
            what: "keys",
            bits,
            limit: MAX_ENUMERATED_KEY_BITS,
        });
    }
    (0..1u64 << bits).map(|i| PrsKey::from_index(i, bits)).collect()
}
