//! Runs the finite-difference gradient suite and prints one line per check.
//!
//! ```text
//! cargo run --release --example gradcheck_suite -- [seed] [--perturb]
//! ```
//! `--perturb` scales the SoftPool gradient by 1.01 to show the suite catching it.

use cgdetect::gradcheck::{run_suite, SuiteOptions};

fn main() -> cgdetect::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let seed = args.iter().find_map(|a| a.parse().ok()).unwrap_or(0);
    let opts = SuiteOptions { seed, perturb_softpool: args.iter().any(|a| a == "--perturb"), ..SuiteOptions::default() };
    let reports = run_suite(&opts)?;
    for r in &reports {
        println!("{r}");
    }
    let failed = reports.iter().filter(|r| !r.passed()).count();
    println!("{} checks, {failed} failed", reports.len());
    Ok(())
}
