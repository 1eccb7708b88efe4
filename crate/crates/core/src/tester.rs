//! The tester channel `{M1 = ρ², M0 = I - ρ²}` and its generator-specific
//! forms.
//!
//! Joint inputs live on `E ⊗ Q`, with the environment `E` on the leading
//! qubits. Only `Q` is measured; the outcome carries the unnormalized branch
//! states left on `E`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::prfsgen::{AbortableState, PrfsScheme};
use crate::prsgen::PrsKey;
use crate::qcore::linalg::expectation;
use crate::qcore::{partial_trace, DensityMatrix, TOL};
use crate::{LabError, Result, C64};

pub mod circuit;

/// Result of one tester application.
#[derive(Debug, Clone, PartialEq)]
pub struct TestOutcome {
    pub p_accept: f64,
    /// Accept branch on `E`, trace `p_accept`.
    pub post_accept: DensityMatrix,
    /// Reject branch on `E`, trace `1 - p_accept`.
    pub post_reject: DensityMatrix,
}

/// How each tested block is laid out on the wire.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BlockLayout {
    /// `n` payload qubits only.
    Payload,
    /// A flag qubit followed by `n` payload qubits, as produced by
    /// [`AbortableState::densify`].
    Flagged,
}

impl BlockLayout {
    pub fn block_qubits(self, n: usize) -> usize {
        match self {
            BlockLayout::Payload => n,
            BlockLayout::Flagged => n + 1,
        }
    }

    /// The layout whose `blocks` blocks of `n` payload qubits occupy exactly
    /// `qubits` qubits.
    pub fn infer(qubits: usize, blocks: usize, n: usize) -> Result<Self> {
        if qubits == blocks * n {
            Ok(BlockLayout::Payload)
        } else if qubits == blocks * (n + 1) {
            Ok(BlockLayout::Flagged)
        } else {
            Err(LabError::arg(format!(
                "{qubits} qubits fit neither {blocks} payload blocks of {n} qubits nor their flagged form"
            )))
        }
    }

    /// The vector `v` with accept operator `η² |v><v|` on one block.
    pub fn accept_vector(self, target: &AbortableState) -> Vec<C64> {
        match self {
            BlockLayout::Payload => target.psi().amps().to_vec(),
            BlockLayout::Flagged => target.flagged_payload().into_amps(),
        }
    }
}

/// Accept operator `w |v><v|` of a product tester, with `v` the tensor of the
/// per-block vectors and `w` the product of the `η²`.
#[derive(Debug, Clone, PartialEq)]
pub struct RankOneTest {
    pub weight: f64,
    pub vector: Vec<C64>,
}

impl RankOneTest {
    pub fn product(targets: &[AbortableState], layout: BlockLayout) -> Result<Self> {
        if targets.is_empty() {
            return Err(LabError::arg("a product test needs at least one block"));
        }
        let mut vector = vec![C64::new(1.0, 0.0)];
        let mut weight = 1.0;
        for t in targets {
            let v = layout.accept_vector(t);
            crate::qcore::check_qubits((vector.len() * v.len()).trailing_zeros() as usize)?;
            vector = vector.iter().flat_map(|a| v.iter().map(move |b| a * b)).collect();
            weight *= t.eta() * t.eta();
        }
        Ok(Self { weight, vector })
    }

    pub fn num_qubits(&self) -> usize {
        self.vector.len().trailing_zeros() as usize
    }

    /// Acceptance probability on a pure input of matching size.
    pub fn accept_pure(&self, psi: &[C64]) -> f64 {
        let amp: C64 = self.vector.iter().zip(psi).map(|(v, p)| v.conj() * p).sum();
        self.weight * amp.norm_sqr()
    }

    /// Acceptance probability on a state of matching size.
    pub fn accept_mixed(&self, rho: &DensityMatrix) -> f64 {
        self.weight * expectation(rho.matrix(), &self.vector)
    }

    /// Applies the test to `Q`, the trailing qubits of `joint`.
    pub fn apply(&self, joint: &DensityMatrix) -> Result<TestOutcome> {
        let (de, dq) = split_dims(joint, self.vector.len())?;
        let v = &self.vector;
        let s = joint.matrix();
        let accept = DMatrix::from_fn(de, de, |e1, e2| {
            let mut acc = C64::new(0.0, 0.0);
            for q in 0..dq {
                if v[q] == C64::new(0.0, 0.0) {
                    continue;
                }
                let mut row = C64::new(0.0, 0.0);
                for q2 in 0..dq {
                    row += s[(e1 * dq + q2, e2 * dq + q)] * v[q2].conj();
                }
                acc += v[q] * row;
            }
            acc * self.weight
        });
        finish(joint, de, accept)
    }
}

fn split_dims(joint: &DensityMatrix, dq: usize) -> Result<(usize, usize)> {
    if dq == 0 || joint.dim() % dq != 0 || joint.dim() < dq {
        return Err(LabError::arg(format!(
            "joint state of dimension {} has no trailing register of dimension {dq}",
            joint.dim()
        )));
    }
    Ok((joint.dim() / dq, dq))
}

fn finish(joint: &DensityMatrix, de: usize, accept: DMatrix<C64>) -> Result<TestOutcome> {
    let e_qubits = de.trailing_zeros() as usize;
    let keep: Vec<usize> = (0..e_qubits).collect();
    let marginal = partial_trace(joint, &keep)?;
    let reject = marginal.matrix() - &accept;
    let p_accept = crate::qcore::linalg::trace(&accept).re;
    Ok(TestOutcome {
        p_accept: p_accept.clamp(0.0, 1.0),
        post_accept: DensityMatrix::from_raw(accept),
        post_reject: DensityMatrix::from_raw(reject),
    })
}

/// The tester for `target` on `Q`: accept operator `ρ²`.
pub fn test_channel(target: &DensityMatrix, joint: &DensityMatrix) -> Result<TestOutcome> {
    let m1 = target.matrix() * target.matrix();
    let (de, dq) = split_dims(joint, target.dim())?;
    let s = joint.matrix();
    // Tr_Q((I ⊗ M1) σ)[e1, e2] = sum_{q, q'} M1[q, q'] σ[(e1, q'), (e2, q)]
    let accept = DMatrix::from_fn(de, de, |e1, e2| {
        let mut acc = C64::new(0.0, 0.0);
        for q in 0..dq {
            for q2 in 0..dq {
                acc += m1[(q, q2)] * s[(e1 * dq + q2, e2 * dq + q)];
            }
        }
        acc
    });
    finish(joint, de, accept)
}

/// Tests `Q` against the output of `scheme` on `(key, x)`; the accept
/// operator is `η² |ψ><ψ|` in the chosen layout, so a flagged `|⊥>` is
/// always rejected.
pub fn test_prfs(
    scheme: &PrfsScheme,
    key: &PrsKey,
    x: u64,
    layout: BlockLayout,
    joint: &DensityMatrix,
) -> Result<TestOutcome> {
    let target = scheme.eval(key, x)?;
    RankOneTest::product(&[target], layout)?.apply(joint)
}

/// Runs one tester per block; accepts iff all of them accept.
pub fn test_product(targets: &[AbortableState], layout: BlockLayout, joint: &DensityMatrix) -> Result<TestOutcome> {
    RankOneTest::product(targets, layout)?.apply(joint)
}

/// [`test_product`] against generator outputs on `(keys[i], inputs[i])`.
pub fn test_product_keys(
    scheme: &PrfsScheme,
    keys: &[PrsKey],
    inputs: &[u64],
    layout: BlockLayout,
    joint: &DensityMatrix,
) -> Result<TestOutcome> {
    if keys.len() != inputs.len() {
        return Err(LabError::arg("keys and inputs must have the same length"));
    }
    let targets = keys
        .iter()
        .zip(inputs)
        .map(|(k, &x)| scheme.eval(k, x))
        .collect::<Result<Vec<_>>>()?;
    test_product(&targets, layout, joint)
}

/// Key-averaged acceptance of the tester on matching and mismatched outputs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SelfTestStats {
    /// `E_k Pr[Test(k, x, G(k, x)) = 1]`.
    pub accept_match: f64,
    /// `E_k Pr[Test(k, x, G(k, y)) = 1]`.
    pub accept_mismatch: f64,
    pub keys: usize,
}

/// Exact self-test averages over `keys`, using densified outputs.
pub fn self_test_stats(scheme: &PrfsScheme, x: u64, y: u64, keys: &[PrsKey]) -> Result<SelfTestStats> {
    if x == y {
        return Err(LabError::arg("self-test statistics need distinct inputs"));
    }
    if keys.is_empty() {
        return Err(LabError::arg("empty keyset"));
    }
    let per_key = crate::rng::par_trials(keys.len() as u64, |i| {
        let all = scheme.eval_all(&keys[i as usize])?;
        let get = |z: u64| {
            all.get(z as usize)
                .ok_or_else(|| LabError::arg(format!("input {z} out of range")))
        };
        let (gx, gy) = (get(x)?, get(y)?);
        let test = RankOneTest::product(std::slice::from_ref(gx), BlockLayout::Flagged)?;
        Ok((test.accept_mixed(&gx.densify()), test.accept_mixed(&gy.densify())))
    })?;
    let k = keys.len() as f64;
    Ok(SelfTestStats {
        accept_match: per_key.iter().map(|p| p.0).sum::<f64>() / k,
        accept_mismatch: per_key.iter().map(|p| p.1).sum::<f64>() / k,
        keys: keys.len(),
    })
}

/// Checks the outcome's bookkeeping: probabilities in range and branch
/// traces consistent within `TOL`.
pub fn outcome_is_consistent(o: &TestOutcome) -> bool {
    (0.0..=1.0).contains(&o.p_accept)
        && (o.post_accept.trace() - o.p_accept).abs() <= TOL
        && (o.post_reject.trace() - (1.0 - o.p_accept)).abs() <= TOL
}
