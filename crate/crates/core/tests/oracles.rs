//! Monte Carlo games checked against independently computed exact values.

use nalgebra::{DMatrix, DVector};

use prfslab_core::cpamac::{cpa_game, key_recovery_distinguisher};
use prfslab_core::games::projector_test;
use prfslab_core::keyset::enumerate_keys;
use prfslab_core::prfsgen::PrfsScheme;
use prfslab_core::prsgen::{prs_eval, prs_game, PrsKey, PrsSpec};
use prfslab_core::qcore::StateVector;
use prfslab_core::rng::seed_derive;
use prfslab_core::C64;

fn column(psi: &StateVector) -> DVector<C64> {
    DVector::from_column_slice(psi.amps())
}

/// `S^{+1/2}` for the frame operator `S = Σ |ψ><ψ|`, by eigendecomposition.
fn frame_inverse_sqrt(states: &[DVector<C64>]) -> DMatrix<C64> {
    let dim = states[0].len();
    let mut s = DMatrix::<C64>::zeros(dim, dim);
    for v in states {
        s += v * v.adjoint();
    }
    let eig = s.symmetric_eigen();
    let inv: Vec<C64> = eig
        .eigenvalues
        .iter()
        .map(|&l| C64::new(if l > 1e-12 { l.sqrt().recip() } else { 0.0 }, 0.0))
        .collect();
    &eig.eigenvectors * DMatrix::from_diagonal(&DVector::from_vec(inv)) * eig.eigenvectors.adjoint()
}

/// Exact win probability of the known-plaintext attack with queries
/// `[(0, 0), (0, 1)]`, averaged over key, secret bit and both randomness
/// draws, with candidates `keys`.
fn key_recovery_win_probability(scheme: &PrfsScheme, keys: &[PrsKey]) -> f64 {
    let r_count = 1u64 << (scheme.input_bits() - 1);
    let k = keys.len() as f64;
    let outputs: Vec<_> = keys.iter().map(|key| scheme.eval_all(key).unwrap()).collect();
    // guess[r1][true][guessed]
    let mut guess = vec![vec![vec![0.0; keys.len()]; keys.len()]; r_count as usize];
    for r1 in 0..r_count {
        let x = (r1 << 1) as usize;
        let cands: Vec<DVector<C64>> = outputs.iter().map(|o| column(o[x].psi())).collect();
        let root = frame_inverse_sqrt(&cands);
        let measure: Vec<DVector<C64>> = cands.iter().map(|c| &root * c).collect();
        for (t, out) in outputs.iter().enumerate() {
            let psi = column(out[x].psi());
            let eta = out[x].eta();
            let probs: Vec<f64> = measure.iter().map(|w| eta * w.dotc(&psi).norm_sqr()).collect();
            let inconclusive = (1.0 - probs.iter().sum::<f64>()).max(0.0);
            for (g, p) in probs.iter().enumerate() {
                guess[r1 as usize][t][g] = p + inconclusive / k;
            }
        }
    }
    let mut win = 0.0;
    for (t, out) in outputs.iter().enumerate() {
        for r1 in 0..r_count as usize {
            for r2 in 0..r_count {
                let x0 = (r2 << 1) as usize;
                for (g, pg) in guess[r1][t].iter().enumerate() {
                    let target = &outputs[g][x0];
                    // the tester accepts with η_g² η |<ψ_g|ψ>|² on a flagged payload
                    let accept = |sent: usize| {
                        let c = &out[sent];
                        target.eta().powi(2) * c.eta() * target.psi().overlap(c.psi()).unwrap()
                    };
                    // z = 0 wins on accept, z = 1 wins on reject
                    let p = 0.5 * accept(x0) + 0.5 * (1.0 - accept(x0 | 1));
                    win += pg * p;
                }
            }
        }
    }
    win / (k * (r_count * r_count) as f64)
}

#[test]
fn key_recovery_matches_exact_measurement() {
    let (lambda, d, n) = (4, 3, 3);
    let scheme = PrfsScheme::post_select(PrsSpec::ideal_haar(d + n, lambda).unwrap(), d).unwrap();
    let keys = enumerate_keys(lambda).unwrap();
    let exact = key_recovery_win_probability(&scheme, &keys) - 0.5;
    let trials = 6000;
    let result = cpa_game(
        &scheme,
        &[(false, false), (false, true)],
        key_recovery_distinguisher(scheme.clone(), keys, 0, 1),
        trials,
        &mut seed_derive(11, 0, "key-recovery"),
    )
    .unwrap();
    let adv = result.advantage;
    assert!(exact > 0.05, "exact advantage {exact}");
    assert!(
        (adv.value - exact).abs() <= 3.0 * adv.std_error,
        "sampled {} vs exact {exact} (se {})",
        adv.value,
        adv.std_error
    );
}

#[test]
fn projector_game_is_unbiased() {
    let (n, lambda) = (3, 3);
    let spec = PrsSpec::ideal_haar(n, lambda).unwrap();
    let v = StateVector::basis(n, 0).unwrap();
    let real: f64 = enumerate_keys(lambda)
        .unwrap()
        .iter()
        .map(|k| prs_eval(&spec, k).unwrap().overlap(&v).unwrap())
        .sum::<f64>()
        / (1u64 << lambda) as f64;
    let exact = real - (-(n as f64)).exp2();
    let adv = prs_game(&spec, 1, projector_test(0, v), 20_000, &mut seed_derive(5, 0, "projector")).unwrap();
    assert!(adv.agrees_with(exact, 4.0), "signed {} vs exact {exact} (se {})", adv.signed, adv.std_error);
}
