//! Constrained quadratic programming: minimize `1/2 U^T H U - F . U` over
//! the admissible set (vertical non-penetration bounds, plus optional
//! pinned-to-surface equalities for the relaxation phase).
//!
//! The production path is a primal-dual active set method whose inner
//! step solves the equality-constrained KKT system by Cholesky of `H` and
//! a Schur complement on the constraint rows. Two independent oracles
//! cross-check it: exhaustive enumeration of candidate active sets (small
//! `n`) and projected gradient descent with fixed step `1/lambda_max(H)`.

use crate::energy::{displacement_of, vertical_dof, EnergyModel};
use crate::geometry::{Polygon, Vec2};
use crate::{Error, Result};
use nalgebra::{DMatrix, DVector};
use std::collections::{BTreeSet, HashSet};

/// Applied body forces on the free vertices `P2 .. Pn` (no slot for the
/// fixed vertex `P1`).
#[derive(Clone, Debug)]
pub struct ForceField {
    n: usize,
    forces: Vec<Vec2>,
}

impl ForceField {
    /// No applied force.
    pub fn zero(n: usize) -> Self {
        ForceField {
            n,
            forces: vec![Vec2::ZERO; n - 1],
        }
    }

    /// The experiment load: zero tangential component, transverse
    /// component of magnitude `f` directed downwards, on every free vertex.
    pub fn uniform_downward(n: usize, f: f64) -> Result<Self> {
        if !f.is_finite() || f < 0.0 {
            return Err(Error::Domain(format!(
                "force magnitude must be nonnegative and finite, got {f}"
            )));
        }
        Ok(ForceField {
            n,
            forces: vec![Vec2::new(0.0, -f); n - 1],
        })
    }

    /// Arbitrary per-vertex forces; `forces[i]` acts on vertex `i + 2`.
    pub fn from_forces(n: usize, forces: Vec<Vec2>) -> Result<Self> {
        if forces.len() != n - 1 {
            return Err(Error::DimensionMismatch {
                expected: n - 1,
                actual: forces.len(),
            });
        }
        if forces.iter().any(|f| !f.is_finite()) {
            return Err(Error::Domain("force components must be finite".into()));
        }
        Ok(ForceField { n, forces })
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    /// Force on vertex `label` (1-based; zero for `P1`).
    pub fn force_on(&self, label: usize) -> Vec2 {
        if label == 1 {
            Vec2::ZERO
        } else {
            self.forces[label - 2]
        }
    }

    /// Stacked vector in `R^(2n-2)`.
    pub fn as_vector(&self) -> DVector<f64> {
        let mut v = DVector::zeros(2 * self.n - 2);
        for (i, f) in self.forces.iter().enumerate() {
            v[2 * i] = f.x;
            v[2 * i + 1] = f.y;
        }
        v
    }
}

/// Admissible set: per-vertex lower bounds on the vertical displacement
/// (`u_{i,y} >= -y_i`, i.e. the deformed vertex stays above the surface),
/// plus an optional set of vertices pinned *onto* the surface (vertical
/// equality `u_{i,y} = -y_i`; the horizontal component stays free).
#[derive(Clone, Debug)]
pub struct ConstraintSet {
    n: usize,
    lower_bounds: Vec<f64>,
    pinned: BTreeSet<usize>,
}

impl ConstraintSet {
    /// Non-penetration bounds for the given reference polygon, no pins.
    pub fn non_penetration(polygon: &Polygon) -> Self {
        let n = polygon.vertex_count();
        ConstraintSet {
            n,
            lower_bounds: (2..=n).map(|label| -polygon.vertex(label).y).collect(),
            pinned: BTreeSet::new(),
        }
    }

    /// Adds pinned vertices (labels in `2..=n`).
    pub fn with_pinned(mut self, pinned: BTreeSet<usize>) -> Result<Self> {
        if let Some(&bad) = pinned.iter().find(|&&l| l < 2 || l > self.n) {
            return Err(Error::Domain(format!(
                "pinned vertex label {bad} outside 2..={}",
                self.n
            )));
        }
        self.pinned = pinned;
        Ok(self)
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    /// Lower bound on the vertical displacement of vertex `label`.
    pub fn lower_bound(&self, label: usize) -> f64 {
        self.lower_bounds[label - 2]
    }

    pub fn pinned(&self) -> &BTreeSet<usize> {
        &self.pinned
    }

    fn is_pinned(&self, label: usize) -> bool {
        self.pinned.contains(&label)
    }
}

/// Solver parameters. Defaults follow the reduced-unit scaling
/// (`R0 = 1`, `k = kappa = 1`).
#[derive(Clone, Debug)]
pub struct SolverOptions {
    /// Stationarity tolerance on `|H U - F - A^T lambda|_inf`.
    pub stat_tol: f64,
    /// Feasibility tolerance (primal bounds and dual signs).
    pub feas_tol: f64,
    /// Complementarity tolerance.
    pub comp_tol: f64,
    /// Scaling constant in the active-set update
    /// `A <- { i : lambda_i + c * (b_i - u_{i,y}) > 0 }`.
    pub c_pdas: f64,
    /// Iteration cap; `None` means `10 * n`.
    pub max_iters: Option<usize>,
    /// Start from the all-active guess instead of the empty one
    /// (used to probe uniqueness).
    pub start_all_active: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            stat_tol: 1e-10,
            feas_tol: 1e-10,
            comp_tol: 1e-10,
            c_pdas: 1.0,
            max_iters: None,
            start_all_active: false,
        }
    }
}

/// The four KKT residuals of a candidate solution.
#[derive(Clone, Copy, Debug)]
pub struct KktResiduals {
    pub stationarity: f64,
    pub primal: f64,
    pub dual: f64,
    pub complementarity: f64,
}

impl KktResiduals {
    pub fn max_violation(&self) -> f64 {
        self.stationarity
            .max(self.primal)
            .max(self.dual)
            .max(self.complementarity)
    }

    pub fn within(&self, opts: &SolverOptions) -> bool {
        self.stationarity <= opts.stat_tol
            && self.primal <= opts.feas_tol
            && self.dual <= opts.feas_tol
            && self.complementarity <= opts.comp_tol
    }
}

/// Which algorithm produced a result.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolveMethod {
    /// Primal-dual active set iteration.
    ActiveSet,
    /// Exhaustive enumeration over candidate active sets.
    Enumeration,
    /// Projected gradient descent.
    ProjectedGradient,
    /// Projected gradient reached after the active-set iteration cycled.
    ProjectedGradientFallback,
}

/// A converged solve.
#[derive(Clone, Debug)]
pub struct SolveResult {
    /// Displacements of `P2 .. Pn`, stacked (length `2n - 2`).
    pub u: DVector<f64>,
    /// One multiplier per vertex `2..=n`. For vertices in the inequality
    /// active set this is the (nonnegative) contact multiplier; for
    /// pinned vertices it is the equality multiplier, whose sign is free
    /// (negative values are the adhesion forces holding the vertex down).
    pub multipliers: Vec<f64>,
    /// Vertices whose vertical displacement sits at its bound (pinned
    /// vertices included; `P1` has no degree of freedom and never appears).
    pub active_set: BTreeSet<usize>,
    pub iterations: usize,
    pub kkt: KktResiduals,
    pub method: SolveMethod,
}

impl SolveResult {
    /// Displacement of vertex `label` (1-based; zero for `P1`).
    pub fn displacement(&self, label: usize) -> Vec2 {
        displacement_of(&self.u, label)
    }
}

/// Solution of one equality-constrained KKT system.
#[derive(Clone, Debug)]
pub struct EqualitySolution {
    pub u: DVector<f64>,
    /// Multipliers in the order of the input constraints.
    pub multipliers: Vec<f64>,
    /// Relative residual of the stationarity block `H U - A^T lambda = F`.
    pub stationarity_residual: f64,
    /// Relative residual of the constraint block `A U = b`.
    pub primal_residual: f64,
}

/// Solves the saddle-point system
///
/// ```text
/// [ H  A^T ] [  U      ]   [ F ]
/// [ A   0  ] [ -lambda ] = [ b ]
/// ```
///
/// where each constraint fixes one displacement coordinate: row `j` of
/// `A` selects dof `fixed[j].0` and `b_j = fixed[j].1`. Eliminates `U`
/// through a Cholesky factorization of `H` and solves the Schur
/// complement `A H^-1 A^T` on the constraints.
pub fn solve_equality(
    model: &EnergyModel,
    force: &ForceField,
    fixed: &[(usize, f64)],
) -> Result<EqualitySolution> {
    let dof = model.dof_count();
    let f = force.as_vector();
    if f.len() != dof {
        return Err(Error::DimensionMismatch {
            expected: dof,
            actual: f.len(),
        });
    }
    let chol = nalgebra::Cholesky::new(model.hessian().clone())
        .ok_or_else(|| Error::Singular("Hessian is not positive definite".into()))?;

    let base = chol.solve(&f); // H^-1 F
    if fixed.is_empty() {
        let stat = (model.hessian() * &base - &f).amax() / f.amax().max(1.0);
        return Ok(EqualitySolution {
            u: base,
            multipliers: Vec::new(),
            stationarity_residual: stat,
            primal_residual: 0.0,
        });
    }

    let m = fixed.len();
    // coordinate rows are independent iff the dofs are distinct
    let mut dofs: Vec<usize> = fixed.iter().map(|&(d, _)| d).collect();
    dofs.sort_unstable();
    if dofs.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::Singular(
            "duplicate constraint row (same dof fixed twice)".into(),
        ));
    }
    // columns of A^T: unit vectors at the fixed dofs
    let mut at = DMatrix::zeros(dof, m);
    for (j, &(d, _)) in fixed.iter().enumerate() {
        if d >= dof {
            return Err(Error::Domain(format!("constraint dof {d} out of range")));
        }
        at[(d, j)] = 1.0;
    }
    let x = chol.solve(&at); // H^-1 A^T
    let mut schur = DMatrix::zeros(m, m);
    for (i, &(di, _)) in fixed.iter().enumerate() {
        for j in 0..m {
            schur[(i, j)] = x[(di, j)];
        }
    }
    let b = DVector::from_iterator(m, fixed.iter().map(|&(_, v)| v));
    let rhs = &b - DVector::from_iterator(m, fixed.iter().map(|&(d, _)| base[d]));
    let schur_chol = nalgebra::Cholesky::new(schur).ok_or_else(|| {
        Error::Singular("Schur complement is singular (duplicate constraint?)".into())
    })?;
    let lambda = schur_chol.solve(&rhs);
    let u = &base + &x * &lambda;

    let mut stat_vec = model.hessian() * &u - &f;
    for (j, &(d, _)) in fixed.iter().enumerate() {
        stat_vec[d] -= lambda[j];
    }
    let stat = stat_vec.amax() / f.amax().max(1.0);
    let primal = fixed
        .iter()
        .map(|&(d, v)| (u[d] - v).abs())
        .fold(0.0f64, f64::max)
        / b.amax().max(1.0);
    // a near-singular Schur complement (duplicate constraints) can slip
    // through the factorization with a zero pivot; the residual contract
    // catches it
    if !stat.is_finite() || !primal.is_finite() || stat > 1e-8 || primal > 1e-8 {
        return Err(Error::Singular(format!(
            "equality KKT residuals out of contract (stationarity {stat:.3e}, primal {primal:.3e}); \
             duplicate constraint?"
        )));
    }
    Ok(EqualitySolution {
        u,
        multipliers: lambda.iter().cloned().collect(),
        stationarity_residual: stat,
        primal_residual: primal,
    })
}

fn kkt_residuals(
    model: &EnergyModel,
    force: &ForceField,
    cons: &ConstraintSet,
    u: &DVector<f64>,
    multipliers: &[f64],
) -> KktResiduals {
    let n = cons.vertex_count();
    let mut stat = model.hessian() * u - force.as_vector();
    for label in 2..=n {
        stat[vertical_dof(label)] -= multipliers[label - 2];
    }
    let mut primal = 0.0f64;
    let mut dual = 0.0f64;
    let mut comp = 0.0f64;
    for label in 2..=n {
        let gap = u[vertical_dof(label)] - cons.lower_bound(label);
        if cons.is_pinned(label) {
            primal = primal.max(gap.abs());
        } else {
            primal = primal.max(-gap);
            dual = dual.max(-multipliers[label - 2]);
            comp = comp.max((multipliers[label - 2] * gap).abs());
        }
    }
    KktResiduals {
        stationarity: stat.amax(),
        primal: primal.max(0.0),
        dual: dual.max(0.0),
        complementarity: comp,
    }
}

fn fixed_pairs(cons: &ConstraintSet, active: &BTreeSet<usize>) -> Vec<(usize, f64)> {
    let mut labels: BTreeSet<usize> = cons.pinned().clone();
    labels.extend(active.iter().copied());
    labels
        .into_iter()
        .map(|label| (vertical_dof(label), cons.lower_bound(label)))
        .collect()
}

fn result_from_fixed_solve(
    model: &EnergyModel,
    force: &ForceField,
    cons: &ConstraintSet,
    active: &BTreeSet<usize>,
    sol: EqualitySolution,
    iterations: usize,
    method: SolveMethod,
) -> SolveResult {
    let n = cons.vertex_count();
    let mut multipliers = vec![0.0; n - 1];
    let mut labels: BTreeSet<usize> = cons.pinned().clone();
    labels.extend(active.iter().copied());
    for (j, label) in labels.iter().enumerate() {
        multipliers[label - 2] = sol.multipliers[j];
    }
    let kkt = kkt_residuals(model, force, cons, &sol.u, &multipliers);
    SolveResult {
        u: sol.u,
        multipliers,
        active_set: labels,
        iterations,
        kkt,
        method,
    }
}

/// Primal-dual active set method.
///
/// Iterates: guess an active set, solve the equality-constrained KKT
/// system with those constraints (plus the permanently pinned ones),
/// then update the guess from the primal-dual indicator
/// `lambda_i + c * (b_i - u_{i,y}) > 0`. Stops when the active set
/// repeats itself and the KKT residuals pass. If the iteration revisits
/// an earlier active set without converging, it falls back to the
/// projected-gradient oracle and tags the result accordingly.
pub fn solve_pdas(
    model: &EnergyModel,
    force: &ForceField,
    cons: &ConstraintSet,
    opts: &SolverOptions,
) -> Result<SolveResult> {
    let n = cons.vertex_count();
    let free_labels: Vec<usize> = (2..=n).filter(|l| !cons.is_pinned(*l)).collect();
    let max_iters = opts.max_iters.unwrap_or(10 * n);

    let mut active: BTreeSet<usize> = if opts.start_all_active {
        free_labels.iter().copied().collect()
    } else {
        BTreeSet::new()
    };
    let mut seen: HashSet<BTreeSet<usize>> = HashSet::new();
    let mut last: Option<SolveResult> = None;

    for iter in 1..=max_iters {
        seen.insert(active.clone());
        let sol = solve_equality(model, force, &fixed_pairs(cons, &active))?;
        let result = result_from_fixed_solve(
            model,
            force,
            cons,
            &active,
            sol,
            iter,
            SolveMethod::ActiveSet,
        );

        let next: BTreeSet<usize> = free_labels
            .iter()
            .copied()
            .filter(|&label| {
                let lambda = result.multipliers[label - 2];
                let gap = cons.lower_bound(label) - result.u[vertical_dof(label)];
                lambda + opts.c_pdas * gap > 0.0
            })
            .collect();

        if next == active {
            if result.kkt.within(opts) {
                return Ok(result);
            }
            // fixed point with failing residuals: no further progress
            return Err(Error::NoConvergence {
                iterations: iter,
                residual: result.kkt.max_violation(),
                last: Box::new(result),
            });
        }
        if seen.contains(&next) {
            // the iteration cycles; hand over to the projected-gradient
            // oracle, which is globally convergent for this problem
            let mut fallback = solve_projected_gradient(model, force, cons, opts)?;
            fallback.method = SolveMethod::ProjectedGradientFallback;
            return Ok(fallback);
        }
        last = Some(result);
        active = next;
    }

    let last = last.expect("at least one PDAS iteration ran");
    Err(Error::NoConvergence {
        iterations: max_iters,
        residual: last.kkt.max_violation(),
        last: Box::new(last),
    })
}

/// Independent oracle: exhaustive enumeration over all candidate active
/// sets for small polygons, projected gradient descent for larger ones.
pub fn solve_oracle(
    model: &EnergyModel,
    force: &ForceField,
    cons: &ConstraintSet,
    opts: &SolverOptions,
) -> Result<SolveResult> {
    if cons.vertex_count() <= 8 {
        solve_enumeration(model, force, cons, opts)
    } else {
        solve_projected_gradient(model, force, cons, opts)
    }
}

/// Tries every subset of the inequality constraints as the active set,
/// solves the corresponding equality-constrained system, and returns the
/// candidate that is both primal and dual feasible (unique by strict
/// convexity).
pub fn solve_enumeration(
    model: &EnergyModel,
    force: &ForceField,
    cons: &ConstraintSet,
    opts: &SolverOptions,
) -> Result<SolveResult> {
    let n = cons.vertex_count();
    let free_labels: Vec<usize> = (2..=n).filter(|l| !cons.is_pinned(*l)).collect();
    let m = free_labels.len();
    if m > 16 {
        return Err(Error::Domain(format!(
            "enumeration oracle limited to 16 inequality constraints, got {m}"
        )));
    }

    for mask in 0u32..(1 << m) {
        let active: BTreeSet<usize> = free_labels
            .iter()
            .enumerate()
            .filter(|(j, _)| mask & (1 << j) != 0)
            .map(|(_, &l)| l)
            .collect();
        let sol = solve_equality(model, force, &fixed_pairs(cons, &active))?;
        let result = result_from_fixed_solve(
            model,
            force,
            cons,
            &active,
            sol,
            mask as usize + 1,
            SolveMethod::Enumeration,
        );
        let primal_ok = free_labels
            .iter()
            .all(|&label| result.u[vertical_dof(label)] >= cons.lower_bound(label) - opts.feas_tol);
        let dual_ok = active
            .iter()
            .all(|&label| result.multipliers[label - 2] >= -opts.feas_tol);
        if primal_ok && dual_ok {
            return Ok(result);
        }
    }
    // unreachable for a positive definite Hessian; report the
    // unconstrained solve as the best effort
    let sol = solve_equality(model, force, &fixed_pairs(cons, &BTreeSet::new()))?;
    let result = result_from_fixed_solve(
        model,
        force,
        cons,
        &BTreeSet::new(),
        sol,
        1 << m,
        SolveMethod::Enumeration,
    );
    Err(Error::NoConvergence {
        iterations: 1 << m,
        residual: result.kkt.max_violation(),
        last: Box::new(result),
    })
}

/// Projected gradient descent with fixed step `1 / lambda_max(H)`,
/// iterated until the infinity norm of the step drops below `1e-12`.
pub fn solve_projected_gradient(
    model: &EnergyModel,
    force: &ForceField,
    cons: &ConstraintSet,
    _opts: &SolverOptions,
) -> Result<SolveResult> {
    const STEP_TOL: f64 = 1e-12;
    const MAX_ITERS: usize = 5_000_000;

    let n = cons.vertex_count();
    let f = force.as_vector();
    let h = model.hessian();
    let lambda_max = h
        .symmetric_eigenvalues()
        .iter()
        .cloned()
        .fold(f64::NEG_INFINITY, f64::max);
    let step = 1.0 / lambda_max;

    let project = |x: &mut DVector<f64>| {
        for label in 2..=n {
            let d = vertical_dof(label);
            let b = cons.lower_bound(label);
            if cons.is_pinned(label) || x[d] < b {
                x[d] = b;
            }
        }
    };

    let mut x = DVector::zeros(model.dof_count());
    project(&mut x);
    let mut iterations = 0;
    loop {
        iterations += 1;
        let mut next = &x - step * (h * &x - &f);
        project(&mut next);
        let delta = (&next - &x).amax();
        x = next;
        if delta < STEP_TOL {
            break;
        }
        if iterations >= MAX_ITERS {
            let result = pg_result(model, force, cons, x, iterations);
            return Err(Error::NoConvergence {
                iterations,
                residual: result.kkt.max_violation(),
                last: Box::new(result),
            });
        }
    }
    Ok(pg_result(model, force, cons, x, iterations))
}

fn pg_result(
    model: &EnergyModel,
    force: &ForceField,
    cons: &ConstraintSet,
    u: DVector<f64>,
    iterations: usize,
) -> SolveResult {
    let n = cons.vertex_count();
    // the projection lands active coordinates exactly on their bounds
    let active: BTreeSet<usize> = (2..=n)
        .filter(|&label| u[vertical_dof(label)] <= cons.lower_bound(label) + 1e-12)
        .collect();
    let grad = model.hessian() * &u - force.as_vector();
    let mut multipliers = vec![0.0; n - 1];
    for &label in &active {
        multipliers[label - 2] = grad[vertical_dof(label)];
    }
    let kkt = kkt_residuals(model, force, cons, &u, &multipliers);
    SolveResult {
        u,
        multipliers,
        active_set: active,
        iterations,
        kkt,
        method: SolveMethod::ProjectedGradient,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::energy::{horizontal_dof, ElasticParams};
    use approx::assert_relative_eq;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn decagon_model() -> EnergyModel {
        let p = Polygon::regular(10, 1.0).unwrap();
        EnergyModel::new(p, ElasticParams::reduced())
    }

    fn random_instance(rng: &mut ChaCha8Rng, n: usize) -> (EnergyModel, ForceField, ConstraintSet) {
        let p = Polygon::regular(n, 1.0).unwrap();
        let params = ElasticParams::new(rng.gen_range(0.2..5.0), rng.gen_range(0.2..5.0)).unwrap();
        let model = EnergyModel::new(p.clone(), params);
        let forces: Vec<Vec2> = (2..=n)
            .map(|_| Vec2::new(0.0, -rng.gen_range(0.0..1.5)))
            .collect();
        let force = ForceField::from_forces(n, forces).unwrap();
        let cons = ConstraintSet::non_penetration(&p);
        (model, force, cons)
    }

    #[test]
    fn zero_force_gives_zero_displacement_in_one_iteration() {
        let model = decagon_model();
        let cons = ConstraintSet::non_penetration(model.polygon());
        let r = solve_pdas(
            &model,
            &ForceField::zero(10),
            &cons,
            &SolverOptions::default(),
        )
        .unwrap();
        assert!(r.u.amax() <= 1e-14);
        assert!(r.active_set.is_empty());
        assert_eq!(r.iterations, 1);
        assert_eq!(r.method, SolveMethod::ActiveSet);
    }

    #[test]
    fn decagon_reference_solution_is_pinned_by_the_oracle() {
        // frozen from an independent prototype cross-checked against a
        // conic solver and exhaustive enumeration
        let model = decagon_model();
        let cons = ConstraintSet::non_penetration(model.polygon());
        let force = ForceField::uniform_downward(10, 0.25).unwrap();
        let r = solve_pdas(&model, &force, &cons, &SolverOptions::default()).unwrap();
        assert_eq!(
            r.active_set.iter().copied().collect::<Vec<_>>(),
            vec![2, 10]
        );
        let expected = [
            (2, 0.561015310469, 0.0),
            (3, 1.021466413788, 0.099703873482),
            (4, 1.058477881950, 0.613900987541),
            (5, 0.602751224626, 0.970006386492),
            (6, 0.0, 1.072996379667),
        ];
        for &(label, x, y) in &expected {
            let p = model.polygon().vertex(label) + r.displacement(label);
            assert_relative_eq!(p.x, x, epsilon = 1e-9);
            assert_relative_eq!(p.y, y, epsilon = 1e-9);
        }
        assert!(r.kkt.within(&SolverOptions::default()));
    }

    #[test]
    fn pdas_matches_enumeration_on_random_instances() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let opts = SolverOptions::default();
        for _ in 0..60 {
            let n = rng.gen_range(3..=8);
            let (model, force, cons) = random_instance(&mut rng, n);
            let a = solve_pdas(&model, &force, &cons, &opts).unwrap();
            let b = solve_enumeration(&model, &force, &cons, &opts).unwrap();
            assert!(
                (&a.u - &b.u).amax() <= 1e-6,
                "n={n}: pdas and enumeration disagree by {}",
                (&a.u - &b.u).amax()
            );
            assert!(a.kkt.max_violation() <= 1e-9);
            assert_eq!(a.active_set, b.active_set);
        }
    }

    #[test]
    fn enumeration_and_projected_gradient_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let opts = SolverOptions::default();
        for _ in 0..10 {
            let (model, force, cons) = random_instance(&mut rng, 6);
            let a = solve_enumeration(&model, &force, &cons, &opts).unwrap();
            let b = solve_projected_gradient(&model, &force, &cons, &opts).unwrap();
            assert!((&a.u - &b.u).amax() <= 1e-8);
        }
    }

    #[test]
    fn oracle_dispatches_by_size_and_matches_pdas_on_the_decagon() {
        let model = decagon_model();
        let cons = ConstraintSet::non_penetration(model.polygon());
        let force = ForceField::uniform_downward(10, 0.25).unwrap();
        let opts = SolverOptions::default();
        let oracle = solve_oracle(&model, &force, &cons, &opts).unwrap();
        assert_eq!(oracle.method, SolveMethod::ProjectedGradient);
        let pdas = solve_pdas(&model, &force, &cons, &opts).unwrap();
        assert!((&oracle.u - &pdas.u).amax() <= 1e-6);
    }

    #[test]
    fn uniqueness_from_both_initial_guesses() {
        let model = decagon_model();
        let cons = ConstraintSet::non_penetration(model.polygon());
        let force = ForceField::uniform_downward(10, 0.4).unwrap();
        let empty = solve_pdas(&model, &force, &cons, &SolverOptions::default()).unwrap();
        let all = solve_pdas(
            &model,
            &force,
            &cons,
            &SolverOptions {
                start_all_active: true,
                ..Default::default()
            },
        )
        .unwrap();
        assert!((&empty.u - &all.u).amax() <= 1e-9);
    }

    #[test]
    fn variational_inequality_holds_at_the_solution() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let model = decagon_model();
        let p = model.polygon().clone();
        let cons = ConstraintSet::non_penetration(&p);
        let force = ForceField::uniform_downward(10, 0.3).unwrap();
        let r = solve_pdas(&model, &force, &cons, &SolverOptions::default()).unwrap();
        let grad_minus_f = model.gradient(&r.u).unwrap() - force.as_vector();
        let obj = |u: &DVector<f64>| model.total_energy(u).unwrap() - force.as_vector().dot(u);
        let at_solution = obj(&r.u);
        for _ in 0..1000 {
            let mut v = DVector::from_fn(p.dof_count(), |_, _| rng.gen_range(-1.0..1.0));
            for label in 2..=10 {
                let d = vertical_dof(label);
                v[d] = cons.lower_bound(label) + rng.gen_range(0.0..2.0);
            }
            let gap = grad_minus_f.dot(&(&v - &r.u));
            assert!(gap >= -1e-8, "VI violated: {gap}");
            // the solution also minimizes the objective over feasible points
            assert!(obj(&v) >= at_solution - 1e-9);
        }
    }

    #[test]
    fn equality_solve_without_constraints_is_unconstrained_minimum() {
        let model = decagon_model();
        let force = ForceField::uniform_downward(10, 0.05).unwrap();
        let sol = solve_equality(&model, &force, &[]).unwrap();
        let residual = model.hessian() * &sol.u - force.as_vector();
        assert!(residual.amax() <= 1e-10);
        assert!(sol.stationarity_residual <= 1e-10);
    }

    #[test]
    fn equality_solve_pins_verticals_and_relaxes_horizontals() {
        // pin all verticals at nonzero values with no force: the pins are
        // met exactly and the horizontal stationarity residual vanishes
        let model = decagon_model();
        let force = ForceField::zero(10);
        let fixed: Vec<(usize, f64)> = (2..=10)
            .map(|label| (vertical_dof(label), 0.01 * label as f64))
            .collect();
        let sol = solve_equality(&model, &force, &fixed).unwrap();
        for &(d, v) in &fixed {
            assert_relative_eq!(sol.u[d], v, epsilon = 1e-12);
        }
        let grad = model.gradient(&sol.u).unwrap();
        for label in 2..=10 {
            assert!(grad[horizontal_dof(label)].abs() <= 1e-10);
        }
        assert!(sol.primal_residual <= 1e-10);
        assert!(sol.stationarity_residual <= 1e-10);

        // trivial consistency: pinning at the current (zero) values keeps
        // the reference configuration
        let zero_fixed: Vec<(usize, f64)> =
            (2..=10).map(|label| (vertical_dof(label), 0.0)).collect();
        let sol = solve_equality(&model, &force, &zero_fixed).unwrap();
        assert!(sol.u.amax() <= 1e-14);
    }

    #[test]
    fn equality_solve_matches_dense_lu_oracle() {
        // n = 4 saddle-point system assembled by hand and solved by a
        // generic LU factorization
        let p = Polygon::regular(4, 1.0).unwrap();
        let model = EnergyModel::new(p, ElasticParams::new(1.7, 0.9).unwrap());
        let force = ForceField::from_forces(
            4,
            vec![
                Vec2::new(0.1, -0.4),
                Vec2::new(0.0, -0.2),
                Vec2::new(-0.1, -0.3),
            ],
        )
        .unwrap();
        let fixed = vec![(vertical_dof(2), -0.5), (vertical_dof(4), -0.25)];
        let sol = solve_equality(&model, &force, &fixed).unwrap();

        let dof = model.dof_count();
        let m = fixed.len();
        let mut kkt = DMatrix::zeros(dof + m, dof + m);
        kkt.view_mut((0, 0), (dof, dof)).copy_from(model.hessian());
        for (j, &(d, _)) in fixed.iter().enumerate() {
            kkt[(d, dof + j)] = 1.0;
            kkt[(dof + j, d)] = 1.0;
        }
        let mut rhs = DVector::zeros(dof + m);
        rhs.rows_mut(0, dof).copy_from(&force.as_vector());
        for (j, &(_, v)) in fixed.iter().enumerate() {
            rhs[dof + j] = v;
        }
        let lu = nalgebra::LU::new(kkt);
        let full = lu.solve(&rhs).expect("regular KKT system");
        for d in 0..dof {
            assert_relative_eq!(sol.u[d], full[d], epsilon = 1e-10);
        }
        for j in 0..m {
            // the saddle system solves for -lambda
            assert_relative_eq!(sol.multipliers[j], -full[dof + j], epsilon = 1e-10);
        }
    }

    #[test]
    fn duplicate_constraint_is_singular() {
        let model = decagon_model();
        // contradictory duplicate rows
        let force = ForceField::zero(10);
        let fixed = vec![(vertical_dof(3), 0.0), (vertical_dof(3), 0.1)];
        assert!(matches!(
            solve_equality(&model, &force, &fixed),
            Err(Error::Singular(_))
        ));
        // consistent duplicate rows, but a loaded system: the multiplier
        // split is not unique and the Schur factorization breaks down
        let force = ForceField::uniform_downward(10, 0.3).unwrap();
        let fixed = vec![(vertical_dof(3), -0.1), (vertical_dof(3), -0.1)];
        assert!(matches!(
            solve_equality(&model, &force, &fixed),
            Err(Error::Singular(_))
        ));
    }

    #[test]
    fn iteration_cap_reports_no_convergence_with_last_iterate() {
        let model = decagon_model();
        let cons = ConstraintSet::non_penetration(model.polygon());
        let force = ForceField::uniform_downward(10, 0.6).unwrap();
        let err = solve_pdas(
            &model,
            &force,
            &cons,
            &SolverOptions {
                max_iters: Some(1),
                ..Default::default()
            },
        )
        .unwrap_err();
        match err {
            Error::NoConvergence {
                iterations, last, ..
            } => {
                assert_eq!(iterations, 1);
                assert_eq!(last.u.len(), model.dof_count());
            }
            other => panic!("expected NoConvergence, got {other:?}"),
        }
    }

    #[test]
    fn pinned_vertices_are_held_with_free_horizontal_motion() {
        let model = decagon_model();
        let p = model.polygon().clone();
        let pinned: BTreeSet<usize> = [2, 10].into_iter().collect();
        let cons = ConstraintSet::non_penetration(&p)
            .with_pinned(pinned.clone())
            .unwrap();
        let r = solve_pdas(
            &model,
            &ForceField::zero(10),
            &cons,
            &SolverOptions::default(),
        )
        .unwrap();
        for &label in &pinned {
            let deformed_y = p.vertex(label).y + r.u[vertical_dof(label)];
            assert!(deformed_y.abs() <= 1e-12);
        }
        assert!(r.active_set.is_superset(&pinned));
        // the pinned equality multipliers may be negative (adhesion)
        assert!(r.kkt.within(&SolverOptions::default()));
    }

    #[test]
    fn pinned_label_validation() {
        let p = Polygon::regular(5, 1.0).unwrap();
        let bad: BTreeSet<usize> = [1].into_iter().collect();
        assert!(ConstraintSet::non_penetration(&p).with_pinned(bad).is_err());
        let bad: BTreeSet<usize> = [6].into_iter().collect();
        assert!(ConstraintSet::non_penetration(&p).with_pinned(bad).is_err());
    }

    #[test]
    fn downward_force_rejects_negative_magnitude() {
        assert!(ForceField::uniform_downward(5, -0.1).is_err());
        assert!(ForceField::from_forces(5, vec![Vec2::ZERO; 3]).is_err());
    }
}
