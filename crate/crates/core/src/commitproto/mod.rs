//! Bit commitment from a function-like state generator.
//!
//! The receiver picks a Pauli `P` on `m = 2^d n` qubits. To commit to `b`
//! the committer sends `c = ⊗_x P_x^b σ_{k,x} P_x^b`, one densified block per
//! input `x`. Opening `(k, b)` is checked by undoing `P^b` and running the
//! product tester.
//!
//! Commitments use the flagged layout: block `x` is a flag qubit followed by
//! `n` payload qubits, and `P_x` acts on the payload qubits only.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::prfsgen::{AbortableState, PrfsScheme};
use crate::prsgen::PrsKey;
use crate::qcore::{check_qubits, tensor, DensityMatrix, PauliString, StateVector, MAX_ENUMERATED_PAULI_QUBITS};
use crate::tester::{BlockLayout, RankOneTest, TestOutcome};
use crate::{LabError, Result, C64};

mod binding;
mod extractor;
mod hiding;

pub use binding::{binding_experiment, BindingReport, CommitterStrategy, Opening};
pub use extractor::{build_extractor, ExtractorBasis, ExtractorPovm};
pub use hiding::{hiding_distance, hiding_report, povm_closeness_stats, HidingReport, PovmClosenessReport};

/// Shape of a commitment instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommitmentParams {
    /// Key bits.
    pub lambda: usize,
    pub d: usize,
    pub n: usize,
    /// `2^d n` payload qubits.
    pub m: usize,
}

impl CommitmentParams {
    pub fn new(lambda: usize, d: usize, n: usize) -> Result<Self> {
        if d >= 6 || n == 0 {
            return Err(LabError::arg(format!("unsupported commitment shape d={d}, n={n}")));
        }
        Ok(Self {
            lambda,
            d,
            n,
            m: n << d,
        })
    }

    pub fn from_scheme(scheme: &PrfsScheme) -> Result<Self> {
        Self::new(scheme.key_bits(), scheme.input_bits(), scheme.output_qubits())
    }

    pub fn blocks(&self) -> usize {
        1 << self.d
    }

    /// Qubits of a commitment in the flagged layout.
    pub fn commitment_qubits(&self) -> usize {
        self.blocks() * (self.n + 1)
    }

    /// Whether `m >= 7λ`, where the asymptotic binding bound applies.
    pub fn binding_regime(&self) -> bool {
        self.m >= 7 * self.lambda
    }

    /// `8 · 2^{-(m - 4λ)/3} + 2 · 2^{-(m - λ)}`.
    pub fn binding_bound(&self) -> f64 {
        let (m, l) = (self.m as f64, self.lambda as f64);
        8.0 * (-(m - 4.0 * l) / 3.0).exp2() + 2.0 * (-(m - l)).exp2()
    }

    /// The threshold `1 + 3 · 2^{-(m - 4λ)/3}` and the bound
    /// `2^{-(m - 4λ)/3}` on the probability that `p` exceeds it.
    pub fn closeness_bound(&self) -> (f64, f64) {
        let e = (-(self.m as f64 - 4.0 * self.lambda as f64) / 3.0).exp2();
        (1.0 + 3.0 * e, e)
    }

    fn check_pauli(&self, p: &PauliString) -> Result<()> {
        if p.num_qubits() != self.m {
            return Err(LabError::arg(format!(
                "challenge acts on {} qubits, commitments have {} payload qubits",
                p.num_qubits(),
                self.m
            )));
        }
        Ok(())
    }

    /// Index of the first payload qubit of every block in `layout`.
    fn payload_positions(&self, layout: BlockLayout) -> Vec<usize> {
        let width = layout.block_qubits(self.n);
        let skip = width - self.n;
        (0..self.blocks())
            .flat_map(|x| (0..self.n).map(move |j| x * width + skip + j))
            .collect()
    }

    /// `P` lifted to a register in `layout`, identity on the flags.
    pub fn lift_pauli(&self, p: &PauliString, layout: BlockLayout) -> Result<PauliString> {
        self.check_pauli(p)?;
        match layout {
            BlockLayout::Payload => Ok(p.clone()),
            BlockLayout::Flagged => p.spread(&self.payload_positions(layout), self.commitment_qubits()),
        }
    }

    /// Maps payload basis indices into the all-flags-zero subspace of the
    /// flagged register.
    pub(crate) fn flagged_embedding(&self) -> Vec<usize> {
        let (n, blocks) = (self.n, self.blocks());
        let mask = (1usize << n) - 1;
        (0..1usize << self.m)
            .map(|j| {
                (0..blocks).fold(0usize, |acc, x| {
                    let part = (j >> ((blocks - 1 - x) * n)) & mask;
                    acc | (part << ((blocks - 1 - x) * (n + 1)))
                })
            })
            .collect()
    }
}

/// Uniform challenge with independent mask bits.
pub fn sample_challenge<R: Rng + ?Sized>(params: &CommitmentParams, rng: &mut R) -> Result<PauliString> {
    check_qubits(params.m)?;
    PauliString::random(params.m, rng)
}

/// How a binding or hiding experiment ranges over challenges.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum PauliMode {
    /// All `4^m` strings; needs `m <= 6`.
    Enumerate,
    Sample { count: usize },
    Explicit { paulis: Vec<PauliString> },
}

impl PauliMode {
    pub fn paulis<R: Rng + ?Sized>(&self, m: usize, rng: &mut R) -> Result<Vec<PauliString>> {
        let out: Vec<PauliString> = match self {
            PauliMode::Enumerate => {
                if m > MAX_ENUMERATED_PAULI_QUBITS {
                    return Err(LabError::EnumerationLimit {
                        what: "pauli strings",
                        bits: 2 * m,
                        limit: 2 * MAX_ENUMERATED_PAULI_QUBITS,
                    });
                }
                PauliString::all(m)?.collect()
            }
            PauliMode::Sample { count } => (0..*count).map(|_| PauliString::random(m, rng)).collect::<Result<_>>()?,
            PauliMode::Explicit { paulis } => {
                if let Some(p) = paulis.iter().find(|p| p.num_qubits() != m) {
                    return Err(LabError::arg(format!("explicit challenge {p} does not act on {m} qubits")));
                }
                paulis.clone()
            }
        };
        if out.is_empty() {
            return Err(LabError::arg("no challenges to average over"));
        }
        Ok(out)
    }
}

/// The `2^d` generator outputs under `key`, checked against `params`.
pub(crate) fn key_blocks(params: &CommitmentParams, scheme: &PrfsScheme, key: &PrsKey) -> Result<Vec<AbortableState>> {
    let blocks = scheme.eval_all(key)?;
    if blocks.len() != params.blocks() || blocks.iter().any(|b| b.num_qubits() != params.n) {
        return Err(LabError::arg("generator shape differs from the commitment parameters"));
    }
    Ok(blocks)
}

/// `⊗_x ψ_{k,x}` on the payload qubits and `Π_x η_x`.
pub(crate) fn key_product(blocks: &[AbortableState]) -> (f64, Vec<C64>) {
    let mut v = vec![C64::new(1.0, 0.0)];
    let mut eta = 1.0;
    for b in blocks {
        let a = b.psi().amps();
        v = v.iter().flat_map(|x| a.iter().map(move |y| x * y)).collect();
        eta *= b.eta();
    }
    (eta, v)
}

/// The commitment state in the flagged layout.
pub fn commit(params: &CommitmentParams, scheme: &PrfsScheme, key: &PrsKey, b: bool, p: &PauliString) -> Result<DensityMatrix> {
    params.check_pauli(p)?;
    check_qubits(params.commitment_qubits())?;
    let blocks = key_blocks(params, scheme, key)?;
    let parts: Vec<DensityMatrix> = blocks.iter().map(AbortableState::densify).collect();
    let c = tensor(&parts)?;
    if b {
        params.lift_pauli(p, BlockLayout::Flagged)?.conjugate(&c)
    } else {
        Ok(c)
    }
}

/// The commitment as a pure-state ensemble: one term per pattern of aborted
/// blocks, zero-weight terms dropped.
pub fn commit_ensemble(
    params: &CommitmentParams,
    scheme: &PrfsScheme,
    key: &PrsKey,
    b: bool,
    p: &PauliString,
) -> Result<Vec<(f64, StateVector)>> {
    params.check_pauli(p)?;
    check_qubits(params.commitment_qubits())?;
    let blocks = key_blocks(params, scheme, key)?;
    let lifted = params.lift_pauli(p, BlockLayout::Flagged)?;
    let mut terms = vec![(1.0, vec![C64::new(1.0, 0.0)])];
    for blk in &blocks {
        let ok = blk.flagged_payload();
        let bot = AbortableState::bottom(params.n)?;
        let options = [(blk.eta(), ok.amps()), (1.0 - blk.eta(), bot.amps())];
        terms = terms
            .iter()
            .flat_map(|(w, v)| {
                options.iter().filter(|(q, _)| *q > 0.0).map(move |(q, a)| {
                    let nv: Vec<C64> = v.iter().flat_map(|x| a.iter().map(move |y| x * y)).collect();
                    (w * q, nv)
                })
            })
            .collect();
    }
    Ok(terms
        .into_iter()
        .map(|(w, v)| {
            let v = if b { lifted.apply_raw(&v) } else { v };
            (w, StateVector::from_raw(v))
        })
        .collect())
}

/// Undoes `P^b` on `c` and runs the product tester for `(key, b)`. `c` may be
/// in either layout.
pub fn reveal_verify(
    params: &CommitmentParams,
    scheme: &PrfsScheme,
    p: &PauliString,
    c: &DensityMatrix,
    key: &PrsKey,
    b: bool,
) -> Result<TestOutcome> {
    params.check_pauli(p)?;
    let layout = BlockLayout::infer(c.num_qubits(), params.blocks(), params.n)?;
    let opened = if b {
        params.lift_pauli(p, layout)?.conjugate(c)?
    } else {
        c.clone()
    };
    let blocks = key_blocks(params, scheme, key)?;
    RankOneTest::product(&blocks, layout)?.apply(&opened)
}
