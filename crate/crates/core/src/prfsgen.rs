//! Function-like state generators.
//!
//! [`PrfsSpec`] is the post-selection construction: run the base generator
//! on `d + n` qubits, measure the first `d`, and keep the rest if the outcome
//! equals the input; give up with `|⊥>` after `T = 2^d λ` misses. The exact
//! evaluation returns the resulting mixture in closed form.

use nalgebra::DMatrix;
use rand::Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::games::{accept_with, play, GameInput};
use crate::haarlab::haar_state;
use crate::prsgen::{prs_eval, PrsKey, PrsSpec};
use crate::qcore::{branch_decompose, check_qubits, DensityMatrix, StateVector, BRANCH_CUTOFF, TOL};
use crate::rng::LabRng;
use crate::stats::Advantage;
use crate::{LabError, Result, C64};

/// `η |ψ><ψ| + (1 - η) |⊥><⊥|` with `ψ` on `n` qubits.
///
/// The densified form lives on `n + 1` qubits: a leading flag qubit, with
/// `|0>|ψ>` for success and `|⊥> = |1 0...0>` for abort.
#[derive(Debug, Clone, PartialEq)]
pub struct AbortableState {
    eta: f64,
    psi: StateVector,
}

impl AbortableState {
    pub fn new(eta: f64, psi: StateVector) -> Result<Self> {
        if !(0.0..=1.0).contains(&eta) {
            return Err(LabError::arg(format!("eta {eta} outside [0, 1]")));
        }
        if eta > 0.0 && (psi.norm() - 1.0).abs() > TOL {
            return Err(LabError::arg("payload of a non-aborting state must be a unit vector"));
        }
        Ok(Self { eta, psi })
    }

    pub fn success(psi: StateVector) -> Self {
        Self { eta: 1.0, psi }
    }

    /// Pure abort; the payload is `|0...0>`.
    pub fn aborted(n: usize) -> Result<Self> {
        Ok(Self {
            eta: 0.0,
            psi: StateVector::basis(n, 0)?,
        })
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn psi(&self) -> &StateVector {
        &self.psi
    }

    /// Payload qubits, excluding the flag.
    pub fn num_qubits(&self) -> usize {
        self.psi.num_qubits()
    }

    /// Same payload with a different success weight.
    pub fn with_eta(&self, eta: f64) -> Result<Self> {
        Self::new(eta, self.psi.clone())
    }

    /// `|0>|ψ>` on `n + 1` qubits.
    pub fn flagged_payload(&self) -> StateVector {
        let mut amps = self.psi.amps().to_vec();
        amps.resize(2 * amps.len(), C64::new(0.0, 0.0));
        StateVector::from_raw(amps)
    }

    /// `|⊥>` on `n + 1` qubits.
    pub fn bottom(n: usize) -> Result<StateVector> {
        StateVector::basis(n + 1, 1 << n)
    }

    pub fn densify(&self) -> DensityMatrix {
        let dim = 2 * self.psi.dim();
        let mut mat = DMatrix::zeros(dim, dim);
        crate::qcore::add_outer(&mut mat, self.eta, self.psi.amps());
        mat[(dim / 2, dim / 2)] += C64::new(1.0 - self.eta, 0.0);
        DensityMatrix::from_raw(mat)
    }

    /// Recovers `(η, ψ)` from a densified state, or `None` if `rho` does not
    /// have the recognizable-abort form within `tol`.
    pub fn from_density(rho: &DensityMatrix, tol: f64) -> Option<Self> {
        let dim = rho.dim();
        if dim < 2 {
            return None;
        }
        let half = dim / 2;
        let m = rho.matrix();
        let eta: f64 = (0..half).map(|i| m[(i, i)].re).sum();
        for i in 0..dim {
            for j in 0..dim {
                let in_payload = i < half && j < half;
                if in_payload {
                    continue;
                }
                let expect = if i == half && j == half { 1.0 - eta } else { 0.0 };
                if (m[(i, j)] - C64::new(expect, 0.0)).norm() > tol {
                    return None;
                }
            }
        }
        let n = half.trailing_zeros() as usize;
        if eta <= tol {
            return Self::aborted(n).ok();
        }
        let pivot = (0..half).max_by(|&a, &b| m[(a, a)].re.total_cmp(&m[(b, b)].re))?;
        let scale = (m[(pivot, pivot)].re * eta).sqrt();
        let amps: Vec<C64> = (0..half).map(|i| m[(i, pivot)] / scale).collect();
        let psi = StateVector::normalized(amps).ok()?;
        let candidate = Self::new(eta.min(1.0), psi).ok()?;
        let rebuilt = candidate.densify();
        ((rebuilt.matrix() - m).norm() <= tol * dim as f64).then_some(candidate)
    }
}

#[derive(Serialize, Deserialize)]
struct AbortableWire {
    eta: f64,
    amps: StateVector,
}

impl Serialize for AbortableState {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        AbortableWire {
            eta: self.eta,
            amps: self.psi.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for AbortableState {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let w = AbortableWire::deserialize(d)?;
        AbortableState::new(w.eta, w.amps).map_err(serde::de::Error::custom)
    }
}

/// The post-selection construction on top of a `(d + n)`-qubit base.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrfsSpec {
    pub base: PrsSpec,
    pub input_bits: usize,
    pub output_qubits: usize,
    pub repetitions: u64,
}

impl PrfsSpec {
    /// `d` input bits on top of `base`; `n` is what remains of the base
    /// output and `T = 2^d λ`.
    pub fn new(base: PrsSpec, input_bits: usize) -> Result<Self> {
        base.validate()?;
        if input_bits >= base.output_qubits {
            return Err(LabError::arg(format!(
                "{input_bits} input bits leave no output qubits of a {}-qubit base",
                base.output_qubits
            )));
        }
        if input_bits > 32 {
            return Err(LabError::arg("at most 32 input bits"));
        }
        let repetitions = (base.key_bits as u64) << input_bits;
        Ok(Self {
            output_qubits: base.output_qubits - input_bits,
            base,
            input_bits,
            repetitions,
        })
    }

    /// Overrides the repetition count `T`.
    pub fn with_repetitions(mut self, repetitions: u64) -> Result<Self> {
        if repetitions == 0 {
            return Err(LabError::arg("at least one repetition is needed"));
        }
        self.repetitions = repetitions;
        Ok(self)
    }

    fn validate(&self) -> Result<()> {
        self.base.validate()?;
        if self.base.output_qubits != self.input_bits + self.output_qubits || self.output_qubits == 0 {
            return Err(LabError::arg("base size must equal input bits plus output qubits"));
        }
        if self.repetitions == 0 {
            return Err(LabError::arg("at least one repetition is needed"));
        }
        Ok(())
    }

    fn check_input(&self, x: u64) -> Result<()> {
        if self.input_bits < 64 && x >> self.input_bits != 0 {
            return Err(LabError::arg(format!("input {x} does not fit in {} bits", self.input_bits)));
        }
        Ok(())
    }

    /// `1 - (1 - p)^T`.
    pub fn success_weight(&self, p: f64) -> f64 {
        if p < BRANCH_CUTOFF {
            return 0.0;
        }
        let t = self.repetitions.min(i32::MAX as u64) as i32;
        1.0 - (1.0 - p).powi(t)
    }
}

/// Exact output on input `x`.
pub fn prfs_eval_exact(spec: &PrfsSpec, key: &PrsKey, x: u64) -> Result<AbortableState> {
    spec.check_input(x)?;
    Ok(prfs_eval_all(spec, key)?.swap_remove(x as usize))
}

/// Exact outputs on every input, sharing one base evaluation.
pub fn prfs_eval_all(spec: &PrfsSpec, key: &PrsKey) -> Result<Vec<AbortableState>> {
    spec.validate()?;
    let base = prs_eval(&spec.base, key)?;
    let mut out: Vec<Option<AbortableState>> = vec![None; 1 << spec.input_bits];
    for b in branch_decompose(&base, spec.input_bits)? {
        let eta = spec.success_weight(b.probability);
        out[b.outcome as usize] = Some(AbortableState::new(eta, b.residual)?);
    }
    out.into_iter()
        .map(|s| s.map_or_else(|| AbortableState::aborted(spec.output_qubits), Ok))
        .collect()
}

/// Runs the repeat-until-match loop once; `None` is an abort.
pub fn prfs_eval_sampled<R: Rng + ?Sized>(
    spec: &PrfsSpec,
    key: &PrsKey,
    x: u64,
    rng: &mut R,
) -> Result<Option<StateVector>> {
    spec.validate()?;
    spec.check_input(x)?;
    let base = prs_eval(&spec.base, key)?;
    let branches = branch_decompose(&base, spec.input_bits)?;
    let Some(target) = branches.iter().position(|b| b.outcome == x) else {
        return Ok(None);
    };
    let cumulative: Vec<f64> = branches
        .iter()
        .scan(0.0, |acc, b| {
            *acc += b.probability;
            Some(*acc)
        })
        .collect();
    let total = *cumulative.last().expect("at least one branch");
    for _ in 0..spec.repetitions {
        let u = rng.random::<f64>() * total;
        let outcome = cumulative.partition_point(|&c| c <= u).min(branches.len() - 1);
        if outcome == target {
            return Ok(Some(branches[target].residual.clone()));
        }
    }
    Ok(None)
}

/// Splits a key into `2^d` blocks and evaluates the base on block `x`.
pub fn prfs_trivial(base: &PrsSpec, keyblocks: &[PrsKey], input_bits: usize, x: u64) -> Result<StateVector> {
    if keyblocks.len() != 1 << input_bits {
        return Err(LabError::arg(format!(
            "expected {} key blocks, got {}",
            1u64 << input_bits,
            keyblocks.len()
        )));
    }
    let block = keyblocks
        .get(x as usize)
        .ok_or_else(|| LabError::arg(format!("input {x} does not fit in {input_bits} bits")))?;
    prs_eval(base, block)
}

/// A function-like state generator as used by the applications.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "scheme", rename_all = "snake_case")]
pub enum PrfsScheme {
    PostSelect(PrfsSpec),
    /// A key of `2^d λ` bits cut into `2^d` base keys; never aborts.
    KeyChop { base: PrsSpec, input_bits: usize },
}

impl PrfsScheme {
    pub fn post_select(base: PrsSpec, input_bits: usize) -> Result<Self> {
        Ok(PrfsScheme::PostSelect(PrfsSpec::new(base, input_bits)?))
    }

    pub fn key_chop(base: PrsSpec, input_bits: usize) -> Result<Self> {
        base.validate()?;
        if input_bits > 16 {
            return Err(LabError::arg("key-chop schemes take at most 16 input bits"));
        }
        Ok(PrfsScheme::KeyChop { base, input_bits })
    }

    pub fn input_bits(&self) -> usize {
        match self {
            PrfsScheme::PostSelect(s) => s.input_bits,
            PrfsScheme::KeyChop { input_bits, .. } => *input_bits,
        }
    }

    pub fn output_qubits(&self) -> usize {
        match self {
            PrfsScheme::PostSelect(s) => s.output_qubits,
            PrfsScheme::KeyChop { base, .. } => base.output_qubits,
        }
    }

    pub fn key_bits(&self) -> usize {
        match self {
            PrfsScheme::PostSelect(s) => s.base.key_bits,
            PrfsScheme::KeyChop { base, input_bits } => base.key_bits << input_bits,
        }
    }

    fn check_input(&self, x: u64) -> Result<()> {
        if x >> self.input_bits() != 0 {
            return Err(LabError::arg(format!("input {x} does not fit in {} bits", self.input_bits())));
        }
        Ok(())
    }

    pub fn eval(&self, key: &PrsKey, x: u64) -> Result<AbortableState> {
        self.check_input(x)?;
        match self {
            PrfsScheme::PostSelect(s) => prfs_eval_exact(s, key, x),
            PrfsScheme::KeyChop { base, input_bits } => {
                let blocks = key.blocks(1 << input_bits)?;
                Ok(AbortableState::success(prfs_trivial(base, &blocks, *input_bits, x)?))
            }
        }
    }

    pub fn eval_all(&self, key: &PrsKey) -> Result<Vec<AbortableState>> {
        match self {
            PrfsScheme::PostSelect(s) => prfs_eval_all(s, key),
            PrfsScheme::KeyChop { .. } => (0..1u64 << self.input_bits()).map(|x| self.eval(key, x)).collect(),
        }
    }

    /// One operational run; `None` is an abort.
    pub fn eval_sampled<R: Rng + ?Sized>(&self, key: &PrsKey, x: u64, rng: &mut R) -> Result<Option<StateVector>> {
        match self {
            PrfsScheme::PostSelect(s) => prfs_eval_sampled(s, key, x, rng),
            PrfsScheme::KeyChop { .. } => Ok(Some(self.eval(key, x)?.psi().clone())),
        }
    }
}

/// Distinguishing game against independent Haar states on the distinct
/// inputs `inputs`, `t` copies each. Real-world blocks are densified
/// outputs; ideal-world blocks carry the success flag.
pub fn prfs_game<R, D>(
    scheme: &PrfsScheme,
    inputs: &[u64],
    t: usize,
    distinguisher: D,
    trials: u64,
    rng: &mut R,
) -> Result<Advantage>
where
    R: Rng + ?Sized,
    D: Fn(&GameInput, &mut LabRng) -> Result<bool> + Sync,
{
    let mut seen = inputs.to_vec();
    seen.sort_unstable();
    seen.dedup();
    if seen.len() != inputs.len() {
        return Err(LabError::arg("game inputs must be distinct"));
    }
    if inputs.is_empty() || t == 0 {
        return Err(LabError::arg("the game needs at least one input and one copy"));
    }
    for &x in inputs {
        scheme.check_input(x)?;
    }
    let n = scheme.output_qubits();
    check_qubits(inputs.len() * t * (n + 1))?;
    let expand = |blocks: Vec<DensityMatrix>| -> Result<GameInput> {
        GameInput::new(blocks.into_iter().flat_map(|b| std::iter::repeat_n(b, t)).collect())
    };
    play(
        trials,
        rng,
        |r| {
            let key = PrsKey::random(scheme.key_bits(), r)?;
            let all = scheme.eval_all(&key)?;
            expand(inputs.iter().map(|&x| all[x as usize].densify()).collect())
        },
        |r| {
            let blocks = inputs
                .iter()
                .map(|_| Ok(AbortableState::success(haar_state(n, r)?).densify()))
                .collect::<Result<Vec<_>>>()?;
            expand(blocks)
        },
        distinguisher,
    )
}

/// Outputs 1 when the flag qubit of factor `i` reads `|⊥>`.
pub fn abort_flag_test(i: usize) -> impl Fn(&GameInput, &mut LabRng) -> Result<bool> + Sync {
    move |input, rng| {
        let f = input
            .factors()
            .get(i)
            .ok_or_else(|| LabError::Callback(format!("input has no factor {i}")))?;
        let half = f.dim() / 2;
        let p: f64 = (half..f.dim()).map(|j| f.matrix()[(j, j)].re).sum();
        Ok(accept_with(p, rng))
    }
}

/// Key-averaged cross overlap and purity of densified outputs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrthogonalityStats {
    /// `E_k Tr(G(k, x) G(k, y))`.
    pub mean_cross: f64,
    /// `E_k Tr(G(k, x)^2)`.
    pub mean_purity: f64,
    /// `E_k η_{k,x}`.
    pub mean_eta: f64,
    pub keys: usize,
}

pub fn orthogonality_stats(scheme: &PrfsScheme, x: u64, y: u64, keys: &[PrsKey]) -> Result<OrthogonalityStats> {
    if x == y {
        return Err(LabError::arg("the cross statistic needs distinct inputs"));
    }
    if keys.is_empty() {
        return Err(LabError::arg("empty keyset"));
    }
    scheme.check_input(x)?;
    scheme.check_input(y)?;
    let per_key = crate::rng::par_trials(keys.len() as u64, |i| {
        let all = scheme.eval_all(&keys[i as usize])?;
        let (a, b) = (&all[x as usize], &all[y as usize]);
        let cross = a.eta * b.eta * a.psi.overlap(&b.psi)? + (1.0 - a.eta) * (1.0 - b.eta);
        let purity = a.eta.powi(2) + (1.0 - a.eta).powi(2);
        Ok((cross, purity, a.eta))
    })?;
    let k = keys.len() as f64;
    Ok(OrthogonalityStats {
        mean_cross: per_key.iter().map(|t| t.0).sum::<f64>() / k,
        mean_purity: per_key.iter().map(|t| t.1).sum::<f64>() / k,
        mean_eta: per_key.iter().map(|t| t.2).sum::<f64>() / k,
        keys: keys.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::games::{constant, swap_test_on};
    use crate::keyset::enumerate_keys;
    use crate::rng::seed_derive;
    use crate::stats::Estimate;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    /// Base state `|0>|a>` with `a = |+>`, one input bit.
    fn prefix_zero_spec() -> PrfsSpec {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let base = StateVector::new(vec![c(h), c(h), c(0.0), c(0.0)]).unwrap();
        PrfsSpec::new(PrsSpec::table(vec![base], 2).unwrap(), 1).unwrap()
    }

    #[test]
    fn shape_and_repetitions() {
        let spec = PrfsSpec::new(PrsSpec::binary_phase(5, 8).unwrap(), 1).unwrap();
        assert_eq!((spec.output_qubits, spec.repetitions), (4, 16));
        assert!(PrfsSpec::new(PrsSpec::binary_phase(2, 8).unwrap(), 2).is_err());
    }

    #[test]
    fn deterministic_prefix_examples() {
        let spec = prefix_zero_spec();
        let key = PrsKey::from_index(0, 2).unwrap();
        let hit = prfs_eval_exact(&spec, &key, 0).unwrap();
        assert_eq!(hit.eta(), 1.0);
        let plus = StateVector::uniform(1).unwrap();
        assert!((hit.psi().overlap(&plus).unwrap() - 1.0).abs() < 1e-12);
        let miss = prfs_eval_exact(&spec, &key, 1).unwrap();
        assert_eq!(miss.eta(), 0.0);
        let mut rng = seed_derive(1, 0, "t");
        for _ in 0..50 {
            let out = prfs_eval_sampled(&spec, &key, 0, &mut rng).unwrap().unwrap();
            assert!((out.overlap(&plus).unwrap() - 1.0).abs() < 1e-12);
            assert_eq!(prfs_eval_sampled(&spec, &key, 1, &mut rng).unwrap(), None);
        }
        assert!(prfs_eval_exact(&spec, &key, 2).is_err());
    }

    #[test]
    fn eta_formula_matches_sampling() {
        let spec = PrfsSpec::new(PrsSpec::binary_phase(5, 8).unwrap(), 1).unwrap();
        let key = PrsKey::from_index(201, 8).unwrap();
        let base = prs_eval(&spec.base, &key).unwrap();
        let p0 = branch_decompose(&base, 1).unwrap()[0].probability;
        let exact = prfs_eval_exact(&spec, &key, 0).unwrap();
        assert!((exact.eta() - (1.0 - (1.0 - p0).powi(16))).abs() < 1e-15);

        // a short loop makes aborts frequent enough to see
        let spec = spec.with_repetitions(1).unwrap();
        let exact = prfs_eval_exact(&spec, &key, 0).unwrap();
        let mut rng = seed_derive(2, 0, "t");
        let hits = (0..2000)
            .filter(|_| prfs_eval_sampled(&spec, &key, 0, &mut rng).unwrap().is_some())
            .count();
        let est = Estimate::frequency(hits as u64, 2000);
        assert!(est.agrees_with(exact.eta(), 3.0), "{est:?} vs {}", exact.eta());
    }

    #[test]
    fn sum_rule_and_abort_form() {
        let spec = PrfsSpec::new(PrsSpec::ideal_haar(6, 4).unwrap(), 2).unwrap();
        for key in enumerate_keys(4).unwrap() {
            let base = prs_eval(&spec.base, &key).unwrap();
            let total: f64 = branch_decompose(&base, 2).unwrap().iter().map(|b| b.probability).sum();
            assert!((total - 1.0).abs() < 1e-9);
            for out in prfs_eval_all(&spec, &key).unwrap() {
                let rho = out.densify();
                assert!(rho.is_valid_state(1e-9));
                assert!((rho.trace() - 1.0).abs() < 1e-9);
                let back = AbortableState::from_density(&rho, 1e-9).unwrap();
                assert!((back.eta() - out.eta()).abs() < 1e-9);
                assert!(back.psi().overlap(out.psi()).unwrap() > 1.0 - 1e-9);
            }
        }
    }

    #[test]
    fn from_density_rejects_other_states() {
        let mm = DensityMatrix::maximally_mixed(2).unwrap();
        assert!(AbortableState::from_density(&mm, 1e-9).is_none());
        let bottom = AbortableState::bottom(1).unwrap().density();
        assert_eq!(AbortableState::from_density(&bottom, 1e-9).unwrap().eta(), 0.0);
        // a mixed payload is not of the form
        let mut mat = DMatrix::zeros(4, 4);
        mat[(0, 0)] = c(0.5);
        mat[(1, 1)] = c(0.5);
        assert!(AbortableState::from_density(&DensityMatrix::new(mat).unwrap(), 1e-9).is_none());
    }

    #[test]
    fn densify_layout() {
        let s = AbortableState::new(0.25, StateVector::basis(1, 1).unwrap()).unwrap();
        let rho = s.densify();
        assert_eq!(rho.num_qubits(), 2);
        assert_eq!(rho.matrix()[(1, 1)], c(0.25));
        assert_eq!(rho.matrix()[(2, 2)], c(0.75));
        let json = serde_json::to_string(&s).unwrap();
        assert_eq!(json, r#"{"eta":0.25,"amps":[[0.0,0.0],[1.0,0.0]]}"#);
        assert_eq!(serde_json::from_str::<AbortableState>(&json).unwrap(), s);
        assert!(AbortableState::new(1.5, StateVector::basis(1, 0).unwrap()).is_err());
    }

    #[test]
    fn key_chop_examples() {
        let base = PrsSpec::binary_phase(4, 8).unwrap();
        let k = PrsKey::from_index(0x5a, 8).unwrap();
        assert_eq!(prfs_trivial(&base, &[k.clone()], 0, 0).unwrap(), prs_eval(&base, &k).unwrap());
        let doubled = [k.clone(), k.clone()];
        assert_eq!(
            prfs_trivial(&base, &doubled, 1, 0).unwrap(),
            prfs_trivial(&base, &doubled, 1, 1).unwrap()
        );
        assert!(prfs_trivial(&base, &doubled, 2, 0).is_err());

        let scheme = PrfsScheme::key_chop(base.clone(), 1).unwrap();
        assert_eq!(scheme.key_bits(), 16);
        let mut rng = seed_derive(3, 0, "t");
        let mut total = 0.0;
        for _ in 0..100 {
            let key = PrsKey::random(16, &mut rng).unwrap();
            let all = scheme.eval_all(&key).unwrap();
            assert_eq!(all[0].eta(), 1.0);
            total += all[0].psi().overlap(all[1].psi()).unwrap();
        }
        assert!((total / 100.0 - 1.0 / 16.0).abs() <= 0.05);
    }

    #[test]
    fn orthogonality_examples() {
        let states = vec![StateVector::basis(2, 0).unwrap(), StateVector::basis(2, 1).unwrap()];
        let perfect = PrfsScheme::key_chop(PrsSpec::table(states, 1).unwrap(), 1).unwrap();
        // key 0b01 maps input 0 to |00> and input 1 to |01>
        let keys = vec![PrsKey::from_index(0b01, 2).unwrap(), PrsKey::from_index(0b10, 2).unwrap()];
        let st = orthogonality_stats(&perfect, 0, 1, &keys).unwrap();
        assert_eq!((st.mean_cross, st.mean_purity), (0.0, 1.0));
        assert!(orthogonality_stats(&perfect, 1, 1, &keys).is_err());
    }

    #[test]
    fn game_examples() {
        let scheme = PrfsScheme::post_select(PrsSpec::ideal_haar(4, 6).unwrap(), 1).unwrap();
        let mut rng = seed_derive(4, 0, "t");
        let adv = prfs_game(&scheme, &[0], 1, constant(false), 300, &mut rng).unwrap();
        assert_eq!(adv.value, 0.0);
        assert!(prfs_game(&scheme, &[0, 0], 1, constant(false), 10, &mut rng).is_err());

        // purity test across two copies: both worlds hand over identical copies
        let adv = prfs_game(&scheme, &[1], 2, swap_test_on(0, 1), 2000, &mut rng).unwrap();
        let keys = enumerate_keys(6).unwrap();
        let mean_purity: f64 = keys
            .iter()
            .map(|k| {
                let e = scheme.eval(k, 1).unwrap().eta();
                e * e + (1.0 - e) * (1.0 - e)
            })
            .sum::<f64>()
            / 64.0;
        let expected = 0.5 + 0.5 * mean_purity - 1.0;
        assert!(adv.agrees_with(expected, 3.0), "{adv:?} vs {expected}");

        let adv = prfs_game(&scheme, &[0], 1, abort_flag_test(0), 4000, &mut rng).unwrap();
        let miss: f64 = keys.iter().map(|k| 1.0 - scheme.eval(k, 0).unwrap().eta()).sum::<f64>() / 64.0;
        assert!(adv.agrees_with(miss, 3.0), "{adv:?} vs {miss}");
    }
}
