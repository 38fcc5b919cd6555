//! Press a regular decagon onto the surface with a uniform downward
//! per-vertex force and inspect the deformed configuration.
//!
//! Usage: `cargo run --example indent [-- <force-per-vertex>]`

use polyshell::analysis::{apparent_height, fit_free_sector};
use polyshell::{indent, ContactOptions, ElasticParams, Polygon};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let f: f64 = std::env::args()
        .nth(1)
        .map(|s| s.parse())
        .transpose()?
        .unwrap_or(0.25);

    let polygon = Polygon::regular(10, 1.0)?;
    let params = ElasticParams::reduced();
    let state = indent(&polygon, &params, f, &ContactOptions::default())?;

    println!("decagon, R0 = 1, k = kappa = 1, f = {f} per vertex\n");
    println!("  vertex   reference              deformed               contact");
    for label in 1..=10 {
        let r = polygon.vertex(label);
        let d = state.deformed_vertex(label);
        println!(
            "  P{label:<2}      ({:+.4}, {:+.4})      ({:+.4}, {:+.4})      {}",
            r.x,
            r.y,
            d.x,
            d.y,
            if state.contact_set().contains(&label) {
                "yes"
            } else {
                ""
            }
        );
    }

    let height = apparent_height(&state);
    println!(
        "\n  contacts the surface at {} vertices",
        state.contact_count()
    );
    println!(
        "  apparent height {height:.6} (drop {:.6} from the undeformed {:.6})",
        polygon.height() - height,
        polygon.height()
    );
    if let Some(fit) = fit_free_sector(&state) {
        println!(
            "  free-sector best-fit circle: radius {:.6}, center ({:.6}, {:.6}), rms {:.2e}",
            fit.radius, fit.center.x, fit.center.y, fit.rms_residual
        );
    }
    println!(
        "  solver: {} iterations ({:?}), max KKT violation {:.2e}",
        state.solve().iterations,
        state.solve().method,
        state.solve().kkt.max_violation()
    );
    Ok(())
}
