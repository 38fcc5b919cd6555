//! Relaxed free-sector radius as a function of the contact count: for
//! each target count, find the smallest force reaching it, indent, relax
//! under irreversible adhesion, and fit a circle to the free sector of
//! the relaxed shape.
//!
//! Usage: `cargo run --example radius_table`

use polyshell::analysis::relaxation_study;
use polyshell::{ContactOptions, ElasticParams, Polygon};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let polygon = Polygon::regular(10, 1.0)?;
    let targets = [1, 2, 3, 5, 7];
    let rows = relaxation_study(
        &polygon,
        &ElasticParams::reduced(),
        &targets,
        &ContactOptions::default(),
    )?;

    println!("  contacts   f(smallest)    R/R0       fit rms");
    for row in &rows {
        println!(
            "  {:>2}         {:<12.6}   {:.5}    {:.2e}",
            row.contacts, row.f_used, row.r_over_r0, row.rms
        );
    }
    for t in targets {
        if !rows.iter().any(|r| r.contacts == t) {
            println!("  {t:>2}         unreachable (contacts appear in mirror pairs around P1)");
        }
    }
    Ok(())
}
