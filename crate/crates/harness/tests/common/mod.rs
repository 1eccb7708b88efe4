//! Small configs covering every experiment, cheap enough to run repeatedly.

use prfslab::ExperimentConfig;
use serde_json::json;

pub fn quick_configs() -> Vec<ExperimentConfig> {
    let cfg = |name: &str, params| ExperimentConfig::new(name, params, 7);
    vec![
        cfg("haar-stats", json!({"m": 2, "trials": 2000, "max_td": 0.1})),
        cfg(
            "prefix-concentration",
            json!({"d": 2, "n": 4, "delta": 0.125, "trials": 200, "max_exceed": 1.0, "compare_n": 3}),
        ),
        cfg(
            "prs-game",
            json!({"base": "binary_phase", "n": 2, "lambda": 4, "trials": 200, "distinguisher": "swap"}),
        ),
        cfg("prfs-eval", json!({"lambda": 4, "d": 1, "n": 2, "pairs": 3, "runs": 200})),
        cfg("orthogonality", json!({"lambda": 4, "d": 1, "n": 3})),
        cfg("self-test", json!({"lambda": 4, "d": 1, "n": 3})),
        cfg(
            "otp-roundtrip",
            json!({"lambda": 4, "d": 2, "n": 3, "messages": 20, "msg_len": 2}),
        ),
        cfg("otp-security", json!({"lambda": 2, "d": 2, "n": 2, "msg": "01"})),
        cfg(
            "commit-run",
            json!({"lambda": 2, "d": 1, "n": 2, "paulis": {"mode": "sample", "count": 5}}),
        ),
        cfg(
            "binding",
            json!({
                "lambda": 1, "d": 1, "n": 1,
                "strategy": {"kind": "key_superposition", "k1": 0, "k2": 1, "bit": false},
                "paulis": {"mode": "sample", "count": 8}
            }),
        ),
        cfg(
            "hiding",
            json!({"lambda": 2, "d": 1, "n": 2, "paulis": {"mode": "sample", "count": 4}}),
        ),
        cfg(
            "povm-closeness",
            json!({"lambda": 2, "d": 1, "n": 2, "paulis": {"mode": "sample", "count": 10}}),
        ),
        cfg(
            "cpa-game",
            json!({"lambda": 2, "d": 2, "n": 2, "distinguisher": "key_recovery", "trials": 100}),
        ),
        cfg(
            "mac-forgery",
            json!({"lambda": 3, "d": 2, "n": 3, "msgs": ["00"], "target": "11", "forger": "replay:0"}),
        ),
    ]
}
