//! Sweep the per-vertex force from zero to near-flattening and tabulate
//! the apparent height and contact count: the height decreases smoothly
//! while the contact count climbs a staircase.
//!
//! Usage: `cargo run --example force_sweep`

use polyshell::analysis::force_sweep;
use polyshell::{ContactOptions, ElasticParams, Polygon};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let polygon = Polygon::regular(10, 1.0)?;
    let grid: Vec<f64> = (0..25).map(|i| i as f64 / 24.0).collect();
    let records = force_sweep(
        &polygon,
        &ElasticParams::reduced(),
        &grid,
        &ContactOptions::default(),
    )?;

    println!("  f        height    drop      contacts    free-sector radius");
    for r in &records {
        let fit = r
            .fit
            .map(|f| format!("{:.4}", f.radius))
            .unwrap_or_else(|| "-".into());
        println!(
            "  {:.4}   {:.4}    {:.4}    {:>2}          {fit}",
            r.f, r.height, r.height_drop, r.contacts
        );
    }

    let plateaus: std::collections::BTreeSet<usize> = records.iter().map(|r| r.contacts).collect();
    println!("\n  contact-count plateaus visited: {plateaus:?}");
    Ok(())
}
