//! Run the built-in verification battery programmatically.
//!
//! ```bash
//! cargo run --release --example self_verify
//! ```

use chi2cav::model::CavityConfig;
use chi2cav::verify::{run_verify, CheckStatus};

fn main() {
    let config = CavityConfig::symmetric(1e7, 1.0, 2.818e14).unwrap();
    let report = run_verify(&config);
    for check in &report.checks {
        let tag = match check.status {
            CheckStatus::Pass => "PASS",
            CheckStatus::Fail => "FAIL",
            CheckStatus::DocumentedDiscrepancy => "DOC ",
        };
        println!(
            "[{tag}] {:<48} measured={:.6e} expected={:.6e} tol={:.1e}",
            check.name, check.measured, check.expected, check.tolerance
        );
    }
    println!("overall: {}", if report.overall { "PASS" } else { "FAIL" });
    std::process::exit(if report.overall { 0 } else { 1 });
}
