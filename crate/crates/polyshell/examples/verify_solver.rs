//! Run the seeded randomized verification suite: oracle equivalence,
//! variational-inequality and KKT properties, uniqueness, energy assembly
//! cross-checks, and definiteness over vertex counts.
//!
//! Usage: `cargo run --example verify_solver [-- <seed> [instances]]`

use polyshell::verify::run_suite;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let seed: u64 = args.next().map(|s| s.parse()).transpose()?.unwrap_or(42);
    let instances: usize = args.next().map(|s| s.parse()).transpose()?.unwrap_or(100);

    println!("seed {seed}, {instances} randomized solver instances\n");
    let report = run_suite(seed, instances);
    for check in &report.checks {
        println!(
            "  {:<24} {}   {}",
            check.name,
            if check.passed { "PASS" } else { "FAIL" },
            check.detail
        );
    }
    if report.all_passed() {
        println!("\nall {} checks passed", report.checks.len());
        Ok(())
    } else {
        Err("verification failures".into())
    }
}
