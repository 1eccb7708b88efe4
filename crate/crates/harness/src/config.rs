//! Experiment configuration files and the parameter blocks shared by
//! several experiments.

use std::path::{Path, PathBuf};

use prfslab_core::prfsgen::{PrfsScheme, PrfsSpec};
use prfslab_core::prsgen::PrsSpec;
use prfslab_core::qcore::StateVector;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{HarnessError, Result};

/// One experiment run as read from a JSON file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: String,
    #[serde(default = "empty_object")]
    pub params: Value,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

fn empty_object() -> Value {
    Value::Object(Map::new())
}

impl ExperimentConfig {
    pub fn new(experiment: &str, params: Value, seed: u64) -> Self {
        Self {
            experiment: experiment.to_owned(),
            params,
            seed,
            out: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        Self::from_json(&text)
    }
}

/// Deserializes an experiment's parameter object, rejecting unknown keys.
pub(crate) fn parse_params<T: DeserializeOwned>(params: Value) -> Result<T> {
    serde_json::from_value(params).map_err(|e| HarnessError::params(e.to_string()))
}

/// Generator family of the underlying keyed states.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BaseKind {
    #[default]
    IdealHaar,
    BinaryPhase,
    /// Computational basis states selected by the key value.
    BasisTable,
}

impl BaseKind {
    pub fn spec(self, qubits: usize, key_bits: usize) -> Result<PrsSpec> {
        Ok(match self {
            BaseKind::IdealHaar => PrsSpec::ideal_haar(qubits, key_bits)?,
            BaseKind::BinaryPhase => PrsSpec::binary_phase(qubits, key_bits)?,
            BaseKind::BasisTable => {
                prfslab_core::qcore::check_qubits(qubits)?;
                let states = (0..1usize << qubits)
                    .map(|i| StateVector::basis(qubits, i))
                    .collect::<std::result::Result<Vec<_>, _>>()?;
                PrsSpec::table(states, key_bits)?
            }
        })
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Construction {
    /// Measure the first `d` qubits of a `(d + n)`-qubit state, repeated up
    /// to `T` times.
    #[default]
    PostSelect,
    /// One independent `λ`-bit sub-key per input; `λ` is the sub-key size.
    KeyChop,
}

/// `λ`, `d`, `n` and the family they parameterize.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchemeParams {
    pub lambda: usize,
    pub d: usize,
    pub n: usize,
    #[serde(default)]
    pub base: BaseKind,
    #[serde(default)]
    pub construction: Construction,
    /// Overrides `T = 2^d λ` for the post-selection construction.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub repetitions: Option<u64>,
}

const SCHEME_KEYS: [&str; 6] = ["lambda", "d", "n", "base", "construction", "repetitions"];

impl SchemeParams {
    pub fn new(lambda: usize, d: usize, n: usize) -> Self {
        Self {
            lambda,
            d,
            n,
            base: BaseKind::default(),
            construction: Construction::default(),
            repetitions: None,
        }
    }

    pub fn build(&self) -> Result<PrfsScheme> {
        if self.n == 0 {
            return Err(HarnessError::params("n must be positive"));
        }
        match self.construction {
            Construction::PostSelect => {
                let mut spec = PrfsSpec::new(self.base.spec(self.d + self.n, self.lambda)?, self.d)?;
                if let Some(t) = self.repetitions {
                    spec = spec.with_repetitions(t)?;
                }
                Ok(PrfsScheme::PostSelect(spec))
            }
            Construction::KeyChop => {
                if self.repetitions.is_some() {
                    return Err(HarnessError::params("repetitions apply only to post_select"));
                }
                Ok(PrfsScheme::key_chop(self.base.spec(self.n, self.lambda)?, self.d)?)
            }
        }
    }

    /// Splits the scheme keys off a parameter object. The remainder goes to
    /// the experiment's own parser.
    pub(crate) fn split(params: Value) -> Result<(Self, Value)> {
        let Value::Object(mut rest) = params else {
            return Err(HarnessError::params("params must be an object"));
        };
        let mut own = Map::new();
        for k in SCHEME_KEYS {
            if let Some(v) = rest.remove(k) {
                own.insert(k.to_owned(), v);
            }
        }
        Ok((parse_params(Value::Object(own))?, Value::Object(rest)))
    }
}

/// Merges the echoes of a scheme block and an experiment's own parameters.
pub(crate) fn merge_echo(scheme: &SchemeParams, own: Value) -> Value {
    let mut out = match serde_json::to_value(scheme) {
        Ok(Value::Object(m)) => m,
        _ => Map::new(),
    };
    if let Value::Object(m) = own {
        out.extend(m);
    }
    Value::Object(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn config_rejects_unknown_top_level_keys() {
        let ok = ExperimentConfig::from_json(r#"{"experiment":"haar-stats","params":{},"seed":3}"#).unwrap();
        assert_eq!(ok.seed, 3);
        let err = ExperimentConfig::from_json(r#"{"experiment":"haar-stats","sead":3}"#).unwrap_err();
        assert!(matches!(err, HarnessError::Config(_)));
    }

    #[test]
    fn scheme_split_leaves_the_rest() {
        let (s, rest) = SchemeParams::split(json!({"lambda": 4, "d": 1, "n": 3, "trials": 9})).unwrap();
        assert_eq!(s, SchemeParams::new(4, 1, 3));
        assert_eq!(rest, json!({"trials": 9}));
        assert!(SchemeParams::split(json!({"d": 1, "n": 3})).is_err());
        assert!(SchemeParams::split(json!([1])).is_err());
    }

    #[test]
    fn schemes_have_the_requested_shape() {
        let post = SchemeParams::new(4, 2, 3).build().unwrap();
        assert_eq!((post.input_bits(), post.output_qubits(), post.key_bits()), (2, 3, 4));
        let chop = SchemeParams {
            construction: Construction::KeyChop,
            base: BaseKind::BasisTable,
            ..SchemeParams::new(3, 2, 3)
        }
        .build()
        .unwrap();
        assert_eq!((chop.input_bits(), chop.output_qubits(), chop.key_bits()), (2, 3, 12));
        let bad = SchemeParams {
            construction: Construction::KeyChop,
            repetitions: Some(3),
            ..SchemeParams::new(3, 2, 3)
        };
        assert!(bad.build().is_err());
    }
}
