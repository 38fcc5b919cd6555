//! Direct use of the constrained-QP layer: assemble an energy model,
//! build a force field and constraint set by hand, solve with the
//! primal-dual active set method, and cross-check against the
//! enumeration oracle.
//!
//! Usage: `cargo run --example constrained_qp`

use polyshell::energy::vertical_dof;
use polyshell::geometry::Vec2;
use polyshell::solver::solve_enumeration;
use polyshell::{
    solve_pdas, ConstraintSet, ElasticParams, EnergyModel, ForceField, Polygon, SolverOptions,
};
use std::collections::BTreeSet;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let polygon = Polygon::regular(6, 1.0)?;
    let model = EnergyModel::new(polygon.clone(), ElasticParams::new(1.0, 0.5)?);

    // a lopsided load: strong push on P4 (the apex side), light elsewhere
    let force = ForceField::from_forces(
        6,
        vec![
            Vec2::new(0.0, -0.1),
            Vec2::new(0.05, -0.2),
            Vec2::new(0.0, -0.9),
            Vec2::new(-0.05, -0.2),
            Vec2::new(0.0, -0.1),
        ],
    )?;

    // non-penetration everywhere, P2 pinned onto the surface
    let cons = ConstraintSet::non_penetration(&polygon).with_pinned(BTreeSet::from([2]))?;

    let opts = SolverOptions::default();
    let sol = solve_pdas(&model, &force, &cons, &opts)?;

    println!("hexagon under a lopsided load, P2 pinned to the surface\n");
    println!(
        "  active set (vertices at their vertical bound): {:?}",
        sol.active_set
    );
    println!("  multipliers (contact forces; negative = adhesion on pinned):");
    for label in 2..=6 {
        let lambda = sol.multipliers[label - 2];
        if lambda != 0.0 {
            println!("    P{label}: {lambda:+.6}");
        }
    }
    println!(
        "  KKT residuals: stationarity {:.2e}, primal {:.2e}, dual {:.2e}, complementarity {:.2e}",
        sol.kkt.stationarity, sol.kkt.primal, sol.kkt.dual, sol.kkt.complementarity
    );

    // deformed ordinates: pinned and active vertices sit on the surface
    for label in 1..=6 {
        let y = polygon.vertex(label).y
            + if label == 1 {
                0.0
            } else {
                sol.u[vertical_dof(label)]
            };
        println!("  P{label} deformed y = {y:+.6}");
    }

    // the exhaustive oracle agrees
    let oracle = solve_enumeration(&model, &force, &cons, &opts)?;
    let gap = (&sol.u - &oracle.u).amax();
    println!("\n  enumeration oracle agreement: |u_pdas - u_enum|_inf = {gap:.2e}");
    Ok(())
}
