//! Keep the total vertical force fixed and raise the vertex count: the
//! deformed shape is compared against the largest polygon through a
//! symmetric Hausdorff distance after arc-length resampling.
//!
//! Usage: `cargo run --example convergence`

use polyshell::analysis::convergence_study;
use polyshell::{ContactOptions, ElasticParams, Polygon};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let n_list = [10, 15, 20, 25, 30, 35, 40];
    let total_force = 2.25;
    let records = convergence_study(
        &n_list,
        total_force,
        1.0,
        &ElasticParams::reduced(),
        &ContactOptions::default(),
    )?;

    let n_max = records.last().map(|r| r.n).unwrap_or(0);
    println!("total force {total_force}, per-vertex force total/(n-1)\n");
    println!("  n     apex height    shape discrepancy vs n = {n_max}");
    for r in &records {
        println!(
            "  {:>2}    {:.6}       {:.6}",
            r.n, r.apex_height, r.discrepancy
        );
    }

    // the apex settles much more slowly below the continuum threshold
    let reference = Polygon::regular(n_max, 1.0)?;
    println!(
        "\n  (undeformed height {:.4}; resampled chains use {} points each)",
        reference.height(),
        polyshell::analysis::RESAMPLE_POINTS
    );
    Ok(())
}
