//! The two-phase experiment.
//!
//! Phase I (`indent`): a uniform downward force on every free vertex
//! presses the polygon onto the surface; the non-penetration bounds are
//! the only constraints.
//!
//! Phase II (`relax`): the force is removed. Vertices that engaged
//! contact stay on the surface (irreversible adhesion) but may slide
//! horizontally; everything else re-equilibrates, still subject to
//! non-penetration.

use crate::energy::{ElasticParams, EnergyModel};
use crate::geometry::{Polygon, Vec2};
use crate::solver::{solve_pdas, ConstraintSet, ForceField, SolveResult, SolverOptions};
use crate::{Error, Result};
use nalgebra::DVector;
use std::collections::BTreeSet;

/// Which phase produced a configuration.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Phase {
    Indented,
    Relaxed,
}

/// Options shared by the experiment drivers.
#[derive(Clone, Debug, Default)]
pub struct ContactOptions {
    /// A vertex counts as a contact when its deformed ordinate is at most
    /// this value. `None` means `1e-7 * circumradius`.
    pub contact_tol: Option<f64>,
    pub solver: SolverOptions,
}

impl ContactOptions {
    pub fn contact_tol_for(&self, polygon: &Polygon) -> f64 {
        self.contact_tol.unwrap_or(1e-7 * polygon.circumradius())
    }
}

/// A solved configuration: reference polygon, displacements, deformed
/// vertices and the detected contact set.
#[derive(Clone, Debug)]
pub struct DeformedConfig {
    polygon: Polygon,
    params: ElasticParams,
    u: DVector<f64>,
    deformed: Vec<Vec2>,
    contact_set: BTreeSet<usize>,
    phase: Phase,
    solve: SolveResult,
}

impl DeformedConfig {
    fn new(
        polygon: Polygon,
        params: ElasticParams,
        solve: SolveResult,
        phase: Phase,
        contact_tol: f64,
    ) -> Self {
        let deformed: Vec<Vec2> = (1..=polygon.vertex_count())
            .map(|label| polygon.vertex(label) + solve.displacement(label))
            .collect();
        let contact_set = detect_contacts(&deformed, contact_tol);
        DeformedConfig {
            polygon,
            params,
            u: solve.u.clone(),
            deformed,
            contact_set,
            phase,
            solve,
        }
    }

    pub fn polygon(&self) -> &Polygon {
        &self.polygon
    }

    pub fn params(&self) -> ElasticParams {
        self.params
    }

    /// Stacked displacements of `P2 .. Pn`.
    pub fn displacement(&self) -> &DVector<f64> {
        &self.u
    }

    /// Deformed vertex positions `P1' .. Pn'` (`P1'` equals `P1`).
    pub fn deformed_vertices(&self) -> &[Vec2] {
        &self.deformed
    }

    /// Deformed position of vertex `label` (1-based).
    pub fn deformed_vertex(&self, label: usize) -> Vec2 {
        self.deformed[label - 1]
    }

    /// 1-based labels of vertices on the surface (always contains 1).
    pub fn contact_set(&self) -> &BTreeSet<usize> {
        &self.contact_set
    }

    pub fn contact_count(&self) -> usize {
        self.contact_set.len()
    }

    /// Labels not in the contact set (the free sector).
    pub fn free_set(&self) -> BTreeSet<usize> {
        (1..=self.polygon.vertex_count())
            .filter(|l| !self.contact_set.contains(l))
            .collect()
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    /// Diagnostics of the solve that produced this configuration.
    pub fn solve(&self) -> &SolveResult {
        &self.solve
    }

    /// Minimum deformed ordinate; feasible configurations have this above
    /// `-feas_tol`.
    pub fn min_y(&self) -> f64 {
        self.deformed
            .iter()
            .map(|v| v.y)
            .fold(f64::INFINITY, f64::min)
    }
}

/// Contact detection: labels of vertices whose ordinate is at most `tol`.
/// For a valid configuration the fixed vertex `P1` (at the origin) always
/// qualifies.
pub fn detect_contacts(vertices: &[Vec2], tol: f64) -> BTreeSet<usize> {
    debug_assert!(tol > 0.0, "contact tolerance must be positive");
    vertices
        .iter()
        .enumerate()
        .filter(|(_, v)| v.y <= tol)
        .map(|(i, _)| i + 1)
        .collect()
}

/// Phase I: indent under uniform downward per-vertex force `f`.
pub fn indent(
    polygon: &Polygon,
    params: &ElasticParams,
    f: f64,
    opts: &ContactOptions,
) -> Result<DeformedConfig> {
    let model = EnergyModel::new(polygon.clone(), *params);
    indent_model(&model, f, opts)
}

/// Phase I on a pre-assembled energy model (sweeps reuse the assembly).
pub fn indent_model(model: &EnergyModel, f: f64, opts: &ContactOptions) -> Result<DeformedConfig> {
    if !f.is_finite() || f < 0.0 {
        return Err(Error::Domain(format!(
            "indentation force must be nonnegative, got {f}"
        )));
    }
    let polygon = model.polygon().clone();
    let n = polygon.vertex_count();
    let force = ForceField::uniform_downward(n, f)?;
    let cons = ConstraintSet::non_penetration(&polygon);
    let solve = solve_pdas(model, &force, &cons, &opts.solver)?;
    Ok(DeformedConfig::new(
        polygon.clone(),
        model.params(),
        solve,
        Phase::Indented,
        opts.contact_tol_for(&polygon),
    ))
}

/// Phase II: remove the force and let the structure re-equilibrate under
/// irreversible adhesion. Contact vertices (except the permanently fixed
/// `P1`) are pinned to the surface vertically and slide freely
/// horizontally; all other vertices keep their non-penetration bounds.
pub fn relax(cfg: &DeformedConfig, opts: &ContactOptions) -> Result<DeformedConfig> {
    let model = EnergyModel::new(cfg.polygon().clone(), cfg.params());
    relax_model(&model, cfg, opts)
}

/// Phase II on a pre-assembled energy model.
pub fn relax_model(
    model: &EnergyModel,
    cfg: &DeformedConfig,
    opts: &ContactOptions,
) -> Result<DeformedConfig> {
    if cfg.phase() != Phase::Indented {
        return Err(Error::Domain(
            "relax expects an indented configuration".into(),
        ));
    }
    let polygon = cfg.polygon().clone();
    let n = polygon.vertex_count();
    let pinned: BTreeSet<usize> = cfg
        .contact_set()
        .iter()
        .copied()
        .filter(|&l| l != 1)
        .collect();
    let cons = ConstraintSet::non_penetration(&polygon).with_pinned(pinned)?;
    let solve = solve_pdas(model, &ForceField::zero(n), &cons, &opts.solver)?;
    Ok(DeformedConfig::new(
        polygon.clone(),
        cfg.params(),
        solve,
        Phase::Relaxed,
        opts.contact_tol_for(&polygon),
    ))
}

/// Mirror-symmetry defect of a configuration under `x -> -x`:
/// `max_i |P_i' + mirror(P_i')_x|` in each coordinate.
pub fn mirror_asymmetry(cfg: &DeformedConfig) -> f64 {
    let p = cfg.polygon();
    let mut worst = 0.0f64;
    for label in 1..=p.vertex_count() {
        let a = cfg.deformed_vertex(label);
        let b = cfg.deformed_vertex(p.mirror_label(label));
        worst = worst.max((a.x + b.x).abs()).max((a.y - b.y).abs());
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn decagon() -> Polygon {
        Polygon::regular(10, 1.0).unwrap()
    }

    #[test]
    fn zero_force_keeps_the_reference_configuration() {
        let cfg = indent(
            &decagon(),
            &ElasticParams::reduced(),
            0.0,
            &ContactOptions::default(),
        )
        .unwrap();
        assert!(cfg.displacement().amax() <= 1e-14);
        assert_eq!(
            cfg.contact_set().iter().copied().collect::<Vec<_>>(),
            vec![1]
        );
        assert_eq!(cfg.phase(), Phase::Indented);
    }

    #[test]
    fn reference_case_contacts_and_feasibility() {
        // frozen model output for n=10, R0=1, k=kappa=1, f=0.25 (verified
        // against conic-solver and enumeration oracles)
        let cfg = indent(
            &decagon(),
            &ElasticParams::reduced(),
            0.25,
            &ContactOptions::default(),
        )
        .unwrap();
        assert_eq!(
            cfg.contact_set().iter().copied().collect::<Vec<_>>(),
            vec![1, 2, 10]
        );
        assert!(cfg.min_y() >= -1e-9);
        let apex = cfg.deformed_vertex(6);
        assert_relative_eq!(apex.y, 1.072996379667, epsilon = 1e-9);
    }

    #[test]
    fn detect_contacts_cases() {
        let p = decagon();
        let reference: Vec<Vec2> = p.vertices().to_vec();
        assert_eq!(
            detect_contacts(&reference, 1e-9)
                .into_iter()
                .collect::<Vec<_>>(),
            vec![1]
        );
        let flat: Vec<Vec2> = (0..10).map(|i| Vec2::new(i as f64, 0.0)).collect();
        assert_eq!(detect_contacts(&flat, 1e-9).len(), 10);
    }

    #[test]
    fn relax_without_extra_contacts_returns_to_reference() {
        let cfg = indent(
            &decagon(),
            &ElasticParams::reduced(),
            0.0,
            &ContactOptions::default(),
        )
        .unwrap();
        let relaxed = relax(&cfg, &ContactOptions::default()).unwrap();
        assert!(relaxed.displacement().amax() <= 1e-14);
        assert_eq!(relaxed.phase(), Phase::Relaxed);
    }

    #[test]
    fn relax_keeps_contacts_on_the_surface_and_lets_them_slide() {
        let opts = ContactOptions::default();
        let params = ElasticParams::reduced();
        let cfg = indent(&decagon(), &params, 0.25, &opts).unwrap();
        let relaxed = relax(&cfg, &opts).unwrap();

        for &label in cfg.contact_set() {
            let v = relaxed.deformed_vertex(label);
            assert!(
                v.y.abs() <= 1e-12,
                "contact {label} left the surface: y = {}",
                v.y
            );
        }
        // the outer contacts slid horizontally during relaxation
        let before = cfg.deformed_vertex(2).x;
        let after = relaxed.deformed_vertex(2).x;
        assert!(
            (before - after).abs() > 1e-6,
            "expected horizontal sliding, got {before} -> {after}"
        );
        assert!(relaxed.min_y() >= -1e-9);

        // energy never increases across relaxation (forces removed)
        let model = EnergyModel::new(decagon(), params);
        let e_ind = model.total_energy(cfg.displacement()).unwrap();
        let e_rel = model.total_energy(relaxed.displacement()).unwrap();
        assert!(e_rel <= e_ind + 1e-12);
    }

    #[test]
    fn relax_rejects_wrong_phase() {
        let opts = ContactOptions::default();
        let cfg = indent(&decagon(), &ElasticParams::reduced(), 0.25, &opts).unwrap();
        let relaxed = relax(&cfg, &opts).unwrap();
        assert!(matches!(relax(&relaxed, &opts), Err(Error::Domain(_))));
    }

    #[test]
    fn uniform_load_preserves_mirror_symmetry() {
        let opts = ContactOptions::default();
        for f in [0.1, 0.25, 0.6] {
            let cfg = indent(&decagon(), &ElasticParams::reduced(), f, &opts).unwrap();
            assert!(mirror_asymmetry(&cfg) <= 1e-9, "f={f}");
            // apex vertex stays on the axis for even n
            assert!(cfg.deformed_vertex(6).x.abs() <= 1e-9);
            let relaxed = relax(&cfg, &opts).unwrap();
            assert!(mirror_asymmetry(&relaxed) <= 1e-9, "relaxed f={f}");
        }
    }

    #[test]
    fn contacts_nondecreasing_and_height_nonincreasing_on_a_grid() {
        let opts = ContactOptions::default();
        let model = EnergyModel::new(decagon(), ElasticParams::reduced());
        let mut last_contacts = 0;
        let mut last_height = f64::INFINITY;
        for i in 0..=20 {
            let f = i as f64 * 0.05;
            let cfg = indent_model(&model, f, &opts).unwrap();
            let height = cfg
                .deformed_vertices()
                .iter()
                .map(|v| v.y)
                .fold(f64::NEG_INFINITY, f64::max);
            assert!(
                cfg.contact_count() >= last_contacts,
                "contacts dropped at f={f}"
            );
            assert!(height <= last_height + 1e-12, "height rose at f={f}");
            assert!(cfg.min_y() >= -1e-9 * model.polygon().circumradius());
            last_contacts = cfg.contact_count();
            last_height = height;
        }
        assert!(last_contacts >= 5);
    }
}
