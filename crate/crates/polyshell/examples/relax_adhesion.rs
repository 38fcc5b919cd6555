//! The two-phase experiment: indent the polygon, then remove the force
//! and let it re-equilibrate while the contact vertices stay adhered to
//! the surface (free to slide horizontally only).
//!
//! Usage: `cargo run --example relax_adhesion [-- <force-per-vertex>]`

use polyshell::analysis::apparent_height;
use polyshell::{indent, relax, ContactOptions, ElasticParams, EnergyModel, Polygon};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let f: f64 = std::env::args()
        .nth(1)
        .map(|s| s.parse())
        .transpose()?
        .unwrap_or(0.25);

    let polygon = Polygon::regular(10, 1.0)?;
    let params = ElasticParams::reduced();
    let opts = ContactOptions::default();

    let indented = indent(&polygon, &params, f, &opts)?;
    let relaxed = relax(&indented, &opts)?;

    let model = EnergyModel::new(polygon.clone(), params);
    let e_ind = model.total_energy(indented.displacement())?;
    let e_rel = model.total_energy(relaxed.displacement())?;

    println!("phase I  (f = {f}):");
    println!(
        "  contacts {:?}, height {:.6}, stored elastic energy {:.6}",
        indented.contact_set(),
        apparent_height(&indented),
        e_ind
    );
    println!("phase II (force removed, irreversible adhesion):");
    println!(
        "  contacts {:?}, height {:.6}, stored elastic energy {:.6}",
        relaxed.contact_set(),
        apparent_height(&relaxed),
        e_rel
    );
    println!("\n  adhered vertices slide horizontally while staying on the surface:");
    for &label in indented.contact_set().iter().filter(|&&l| l != 1) {
        let before = indented.deformed_vertex(label);
        let after = relaxed.deformed_vertex(label);
        println!(
            "  P{label:<2}: x {:+.6} -> {:+.6} (slide {:+.2e}), y stays {:.1e}",
            before.x,
            after.x,
            after.x - before.x,
            after.y.abs()
        );
    }
    println!(
        "\n  relaxation released {:.6} of elastic energy ({}%)",
        e_ind - e_rel,
        ((e_ind - e_rel) / e_ind * 100.0).round()
    );
    Ok(())
}
