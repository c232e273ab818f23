mod common;

use proptest::prelude::*;

use common::quadratic_ode;
use kahan_darboux::ode::QuadraticODE;
use kahan_darboux::report::{emit_report, read_report, run_pipeline, Format, PipelineConfig};

fn small_ode() -> impl Strategy<Value = QuadraticODE> {
    (2usize..=3).prop_flat_map(quadratic_ode)
}

fn config(verify: bool, seed: u64) -> PipelineConfig {
    PipelineConfig {
        max_degree: 1,
        max_exp: 1,
        candidate_cap: 500,
        verify,
        seed,
        ..PipelineConfig::default()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10))]

    #[test]
    fn same_input_same_bytes(ode in small_ode(), seed in 0u64..4) {
        let src = ode.print();
        let (a, _) = run_pipeline(&src, &config(true, seed));
        let (b, _) = run_pipeline(&src, &config(true, seed));
        prop_assert_eq!(emit_report(&a, Format::Json), emit_report(&b, Format::Json));
    }

    #[test]
    fn verification_leaves_symbolic_output_alone(ode in small_ode()) {
        let src = ode.print();
        let (mut with, _) = run_pipeline(&src, &config(true, 0));
        let (without, _) = run_pipeline(&src, &config(false, 0));
        prop_assert!(without.verification.is_none());
        with.verification = None;
        with.config.verify = false;
        prop_assert_eq!(emit_report(&with, Format::Json), emit_report(&without, Format::Json));
    }

    #[test]
    fn json_round_trip_is_byte_identical(ode in small_ode(), verify in any::<bool>()) {
        let (r, _) = run_pipeline(&ode.print(), &config(verify, 0));
        let bytes = emit_report(&r, Format::Json);
        let back = read_report(&bytes).unwrap();
        prop_assert_eq!(&back, &r);
        prop_assert_eq!(emit_report(&back, Format::Json), bytes);
    }
}

#[test]
fn empty_findings_are_valid_json() {
    let (r, _) = run_pipeline("x' = 0\ny' = 0\n", &config(true, 0));
    let v: serde_json::Value = serde_json::from_slice(&emit_report(&r, Format::Json)).unwrap();
    assert!(v["darboux"]["pairs"].as_array().unwrap().is_empty());
    assert!(v["errors"].as_array().unwrap().is_empty());
}
