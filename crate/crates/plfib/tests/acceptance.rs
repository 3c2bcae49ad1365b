//! Release-gating acceptance suite: runs every criterion and prints one
//! pass/fail line per check.

use plfib::acceptance::{run_all, CriterionResult};

#[test]
fn acceptance_suite() {
    let results: Vec<CriterionResult> = run_all();
    for r in &results {
        println!("{}", r.line());
    }
    let failed: Vec<&CriterionResult> = results.iter().filter(|r| !r.passed).collect();
    assert!(
        failed.is_empty(),
        "{} criterion(s) failed:\n{}",
        failed.len(),
        failed
            .iter()
            .map(|r| r.line())
            .collect::<Vec<_>>()
            .join("\n")
    );
}
