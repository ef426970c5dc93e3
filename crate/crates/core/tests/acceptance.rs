//! One PASS/FAIL line per acceptance criterion; exits 1 if any fails.

use std::process::ExitCode;

use hamdistill::checks::{CHECK_IDS, run_all};

fn main() -> ExitCode {
    let results = run_all(false);
    assert_eq!(results.len(), CHECK_IDS.len());
    let mut failed = 0;
    for r in &results {
        println!("{} {}: {}", if r.pass { "PASS" } else { "FAIL" }, r.id, r.detail);
        failed += usize::from(!r.pass);
    }
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed == 0 { ExitCode::SUCCESS } else { ExitCode::from(1) }
}
