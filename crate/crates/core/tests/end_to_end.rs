use fpsi_core::harness::{gen_dataset, run_in_process, Seeds};
use fpsi_core::params::{Metric, Params};
use fpsi_core::rng;

fn check(metric: Metric, prefix: bool, delta: u64, seed: u64) {
    let params = Params::new(32, 24, 3, delta, metric, 24, prefix);
    let ds = gen_dataset(&params, 0.5, &mut rng::seeded(seed)).unwrap();
    let out = run_in_process(&params, &ds.q, &ds.w, Seeds::from_master(seed)).unwrap();
    assert_eq!(out.z, ds.expected, "{metric} prefix={prefix} delta={delta} seed={seed}");
    assert!(!ds.expected.is_empty());
}

#[test]
fn all_variants_match_the_reference() {
    for seed in 0..3 {
        for metric in [Metric::Linf, Metric::Lp(1), Metric::Lp(2)] {
            check(metric, false, 8, seed);
            check(metric, true, 8, seed);
        }
    }
}
