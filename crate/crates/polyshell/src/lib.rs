//! Quasi-static deformation of an elastic convex regular polygon pressed
//! against a rigid flat surface, and its adhesion-constrained relaxation.
//!
//! The polygon rests on the surface (the line `y = 0`) at a single fixed
//! vertex. Its elastic energy is a strictly convex quadratic form in the
//! free-vertex displacements: a stretching term in per-edge displacement
//! differences plus a bending term in linearized inter-edge angle
//! variations. Pressing the polygon down while forbidding surface
//! penetration is a constrained quadratic program, solved here with a
//! primal-dual active set method and checked against independent oracles
//! (exhaustive active-set enumeration, projected gradient descent).
//!
//! The crate is organized around the experiment pipeline:
//!
//! - [`geometry`]: reference configuration (regular n-gon resting at one
//!   vertex) and derived constants,
//! - [`energy`]: stretching / bending matrices and the total Hessian,
//! - [`solver`]: the constrained QP: PDAS, equality KKT solves, oracles,
//! - [`contact`]: the two-phase experiment (indentation, then force
//!   removal under irreversible adhesion),
//! - [`analysis`]: observables: apparent height, RMS circle fits of the
//!   free perimeter, force sweeps, continuum-limit convergence,
//! - [`verify`]: seeded randomized self-checks (oracle equivalence, KKT
//!   and variational-inequality properties),
//! - [`cli`]: the `polyshell` command-line front end (CSV / SVG output).
//!
//! Runnable walkthroughs for each capability live in `examples/`.

pub mod analysis;
pub mod cli;
pub mod contact;
pub mod energy;
pub mod geometry;
pub mod solver;
mod svg;
pub mod verify;

pub use analysis::{fit_circle, CircleFit, ConvergenceRecord, RelaxationRow, SweepRecord};
pub use contact::{detect_contacts, indent, relax, ContactOptions, DeformedConfig, Phase};
pub use energy::{BendingRows, ElasticParams, EnergyModel};
pub use geometry::{Polygon, Vec2};
pub use solver::{
    solve_equality, solve_oracle, solve_pdas, ConstraintSet, ForceField, SolveMethod, SolveResult,
    SolverOptions,
};

/// Errors produced by the library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A precondition on the inputs was violated (bad polygon parameters,
    /// unsorted grid, wrong phase, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// A displacement or force array has the wrong length.
    #[error("dimension mismatch: expected length {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    /// A linear system that should be regular was not (signals duplicate
    /// constraints or an assembly bug).
    #[error("singular system: {0}")]
    Singular(String),

    /// Geometrically degenerate input (e.g. collinear points for a circle
    /// fit).
    #[error("degenerate input: {0}")]
    Degenerate(String),

    /// The iterative solver ran out of iterations. Carries the last
    /// iterate for diagnosis.
    #[error(
        "solver did not converge after {iterations} iterations \
         (max KKT violation {residual:.3e})"
    )]
    NoConvergence {
        iterations: usize,
        residual: f64,
        last: Box<solver::SolveResult>,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
