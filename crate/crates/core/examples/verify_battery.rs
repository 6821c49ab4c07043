//! Run the default verification battery and list the checks.

use fattail::sim::{verify_suite, VerifyConfig};

fn main() -> fattail::Result<()> {
    let report = verify_suite(&VerifyConfig::default())?;
    for c in &report.checks {
        println!("{} {:<50} {:.3e} (<= {:.1e})", if c.passed { "PASS" } else { "FAIL" }, c.name, c.value, c.threshold);
    }
    println!("{} of {} checks passed", report.checks.iter().filter(|c| c.passed).count(), report.checks.len());
    Ok(())
}
