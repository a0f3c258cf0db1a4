//! Finite-difference checks of every backward pass across several seeds.

use cgdetect::gradcheck::{model_check, run_suite, SuiteOptions};
use cgdetect::model::Fusion;

#[test]
fn suite_passes_for_several_seeds() {
    for seed in 1..=5 {
        let opts = SuiteOptions { seed, model_coords: 20, ..SuiteOptions::default() };
        for r in run_suite(&opts).unwrap() {
            assert!(r.passed(), "seed {seed}: {r}");
        }
    }
}

#[test]
fn single_stream_models_pass() {
    for fusion in [Fusion::ResidualOnly, Fusion::JointOnly] {
        let r = model_check(fusion, 3, 30, 1e-3).unwrap();
        assert!(r.passed(), "{r}");
    }
}

#[test]
fn perturbed_softpool_is_caught_for_every_seed() {
    for seed in 0..3 {
        let opts = SuiteOptions { seed, model_coords: 1, perturb_softpool: true, ..SuiteOptions::default() };
        let reports = run_suite(&opts).unwrap();
        let failing: Vec<&str> = reports.iter().filter(|r| !r.passed()).map(|r| r.name.as_str()).collect();
        assert_eq!(failing, vec!["softpool"]);
    }
}
