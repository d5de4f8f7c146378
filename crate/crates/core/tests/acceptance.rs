//! The acceptance gate: runs the full verification battery with a
//! fixed seed and prints one pass/fail line per criterion.

use sigmaflow_core::suite;

const SEED: u64 = 0x51_6d_af_10;

#[test]
fn acceptance_battery() {
    let report = suite::run_all(SEED);
    for c in &report.criteria {
        println!(
            "criterion {:>2} [{}] {} — {}",
            c.id,
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            c.detail
        );
    }
    assert!(
        report.all_passed,
        "failing criteria: {:?}",
        report
            .criteria
            .iter()
            .filter(|c| !c.passed)
            .map(|c| (c.id, c.detail.clone()))
            .collect::<Vec<_>>()
    );
}
