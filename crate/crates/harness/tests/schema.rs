//! Every report validates against the checked-in schema document.

mod common;

use prfslab::{run, RunOptions};
use serde_json::Value;

fn validator() -> jsonschema::Validator {
    let text = include_str!("../schema/report.schema.json");
    let schema: Value = serde_json::from_str(text).unwrap();
    jsonschema::validator_for(&schema).unwrap()
}

#[test]
fn every_experiment_report_validates() {
    let v = validator();
    for timing in [false, true] {
        for cfg in common::quick_configs() {
            let report = serde_json::to_value(run(&cfg, RunOptions { timing }).unwrap()).unwrap();
            let errors: Vec<String> = v.iter_errors(&report).map(|e| e.to_string()).collect();
            assert!(errors.is_empty(), "{}: {errors:?}", cfg.experiment);
        }
    }
}

#[test]
fn schema_rejects_malformed_reports() {
    let v = validator();
    let cfg = common::quick_configs().remove(0);
    let good = serde_json::to_value(run(&cfg, RunOptions { timing: false }).unwrap()).unwrap();
    assert!(v.is_valid(&good));

    let mut missing = good.clone();
    missing.as_object_mut().unwrap().remove("seed");
    assert!(!v.is_valid(&missing));

    let mut extra = good.clone();
    extra["estimates"]["mean_state_td"]["median"] = Value::from(0.1);
    assert!(!v.is_valid(&extra));

    let mut relation = good;
    relation["pass_fail"]["mean_state_td"]["relation"] = Value::from("<");
    assert!(!v.is_valid(&relation));
}
