//! Derived observables: apparent height, RMS circle fits of the free
//! perimeter, force sweeps, the relaxation study (contact count vs fitted
//! radius) and the continuum-limit convergence study.

use crate::contact::{indent_model, relax_model, ContactOptions, DeformedConfig};
use crate::energy::{ElasticParams, EnergyModel};
use crate::geometry::{Polygon, Vec2};
use crate::{Error, Result};
use rayon::prelude::*;

/// Number of arc-length samples used when comparing deformed shapes.
pub const RESAMPLE_POINTS: usize = 256;

/// Geometric least-squares circle through a point set.
#[derive(Clone, Copy, Debug)]
pub struct CircleFit {
    pub center: Vec2,
    pub radius: f64,
    /// `sqrt(mean((|p - center| - radius)^2))` over the fitted points.
    pub rms_residual: f64,
    pub point_count: usize,
}

/// Fits a circle in the geometric least-squares sense: an algebraic
/// (Kasa) fit provides the initial guess, then Gauss-Newton iterations on
/// the geometric distance `sum (|p_i - c| - r)^2` refine it until the
/// step drops below `1e-12` (at most 50 iterations).
pub fn fit_circle(points: &[Vec2]) -> Result<CircleFit> {
    if points.len() < 3 {
        return Err(Error::Domain(format!(
            "circle fit needs at least 3 points, got {}",
            points.len()
        )));
    }

    // Kasa: |p|^2 = 2 c.x x + 2 c.y y + (r^2 - |c|^2), linear in the
    // unknowns; solve the 3x3 normal equations.
    let mut ata = [[0.0f64; 3]; 3];
    let mut atb = [0.0f64; 3];
    for p in points {
        let row = [2.0 * p.x, 2.0 * p.y, 1.0];
        let rhs = p.norm_squared();
        for i in 0..3 {
            for j in 0..3 {
                ata[i][j] += row[i] * row[j];
            }
            atb[i] += row[i] * rhs;
        }
    }
    let m = nalgebra::Matrix3::from_fn(|i, j| ata[i][j]);
    let b = nalgebra::Vector3::from_row_slice(&atb);
    let sol = nalgebra::Cholesky::new(m)
        .map(|c| c.solve(&b))
        .ok_or_else(|| Error::Degenerate("collinear points in circle fit".into()))?;
    let mut cx = sol[0];
    let mut cy = sol[1];
    let r2 = sol[2] + cx * cx + cy * cy;
    if !r2.is_finite() || r2 <= 0.0 {
        return Err(Error::Degenerate("collinear points in circle fit".into()));
    }
    let mut r = r2.sqrt();

    // Gauss-Newton on the geometric residuals
    for _ in 0..50 {
        let mut jtj = [[0.0f64; 3]; 3];
        let mut jtr = [0.0f64; 3];
        for p in points {
            let dx = p.x - cx;
            let dy = p.y - cy;
            let d = (dx * dx + dy * dy).sqrt();
            if d < 1e-14 {
                continue;
            }
            let res = d - r;
            let row = [-dx / d, -dy / d, -1.0];
            for i in 0..3 {
                for j in 0..3 {
                    jtj[i][j] += row[i] * row[j];
                }
                jtr[i] += row[i] * res;
            }
        }
        let m = nalgebra::Matrix3::from_fn(|i, j| jtj[i][j]);
        let g = nalgebra::Vector3::from_row_slice(&jtr);
        let step = match nalgebra::Cholesky::new(m) {
            Some(c) => -c.solve(&g),
            None => break,
        };
        cx += step[0];
        cy += step[1];
        r += step[2];
        if step.amax() < 1e-12 {
            break;
        }
    }

    if !r.is_finite() || r <= 0.0 {
        return Err(Error::Degenerate("circle fit diverged".into()));
    }
    let center = Vec2::new(cx, cy);
    let mse = points
        .iter()
        .map(|p| {
            let e = (*p - center).norm() - r;
            e * e
        })
        .sum::<f64>()
        / points.len() as f64;
    Ok(CircleFit {
        center,
        radius: r,
        rms_residual: mse.sqrt(),
        point_count: points.len(),
    })
}

/// Apparent height of a configuration: the maximum deformed ordinate.
pub fn apparent_height(cfg: &DeformedConfig) -> f64 {
    cfg.deformed_vertices()
        .iter()
        .map(|v| v.y)
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Circle fit over the free sector (vertices not in the contact set), or
/// `None` when fewer than three vertices are free.
pub fn fit_free_sector(cfg: &DeformedConfig) -> Option<CircleFit> {
    let pts: Vec<Vec2> = cfg
        .free_set()
        .iter()
        .map(|&l| cfg.deformed_vertex(l))
        .collect();
    if pts.len() < 3 {
        return None;
    }
    fit_circle(&pts).ok()
}

/// One force level of a sweep.
#[derive(Clone, Debug)]
pub struct SweepRecord {
    pub f: f64,
    pub height: f64,
    pub height_drop: f64,
    pub contacts: usize,
    pub fit: Option<CircleFit>,
}

/// Solves the indentation problem at every grid point (grid must be
/// sorted ascending and nonnegative). Grid points run in parallel;
/// records come back in grid order.
pub fn force_sweep(
    polygon: &Polygon,
    params: &ElasticParams,
    f_grid: &[f64],
    opts: &ContactOptions,
) -> Result<Vec<SweepRecord>> {
    if f_grid.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::Domain("force grid must be sorted ascending".into()));
    }
    if f_grid.first().is_some_and(|&f| f < 0.0) {
        return Err(Error::Domain("force grid must be nonnegative".into()));
    }
    let model = EnergyModel::new(polygon.clone(), *params);
    let reference_height = polygon.height();
    f_grid
        .par_iter()
        .map(|&f| {
            let cfg = indent_model(&model, f, opts)
                .map_err(|e| Error::Domain(format!("sweep failed at f = {f}: {e}")))?;
            let height = apparent_height(&cfg);
            Ok(SweepRecord {
                f,
                height,
                height_drop: reference_height - height,
                contacts: cfg.contact_count(),
                fit: fit_free_sector(&cfg),
            })
        })
        .collect()
}

/// One row of the relaxation study.
#[derive(Clone, Copy, Debug)]
pub struct RelaxationRow {
    /// Contact count this row was targeted at (and reached).
    pub contacts: usize,
    /// Smallest force reaching that count.
    pub f_used: f64,
    /// Fitted free-sector radius of the relaxed shape over the
    /// circumradius.
    pub r_over_r0: f64,
    /// RMS residual of that fit.
    pub rms: f64,
}

/// Smallest force whose indented contact count reaches at least `target`,
/// resolved by bisection to `1e-6` relative. Returns `None` when the
/// count is not attained exactly (the staircase may jump past it).
fn min_force_for_contacts(
    model: &EnergyModel,
    target: usize,
    opts: &ContactOptions,
) -> Result<Option<f64>> {
    let count_at = |f: f64| -> Result<usize> { Ok(indent_model(model, f, opts)?.contact_count()) };
    if target <= 1 {
        return Ok(Some(0.0));
    }
    if target > model.polygon().vertex_count() {
        return Ok(None);
    }
    let mut lo = 0.0f64;
    let mut hi = 0.01f64;
    while count_at(hi)? < target {
        lo = hi;
        hi *= 2.0;
        if hi > 1e9 {
            return Ok(None);
        }
    }
    while hi - lo > 1e-6 * hi {
        let mid = 0.5 * (lo + hi);
        if count_at(mid)? >= target {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    if count_at(hi)? == target {
        Ok(Some(hi))
    } else {
        Ok(None) // the staircase jumped past the target
    }
}

/// For each target contact count: find the smallest force reaching it,
/// indent, relax under irreversible adhesion, and fit the relaxed free
/// sector. Unreachable counts are skipped (absent rows), not errors.
pub fn relaxation_study(
    polygon: &Polygon,
    params: &ElasticParams,
    target_counts: &[usize],
    opts: &ContactOptions,
) -> Result<Vec<RelaxationRow>> {
    let model = EnergyModel::new(polygon.clone(), *params);
    let mut rows = Vec::new();
    for &target in target_counts {
        let Some(f_used) = min_force_for_contacts(&model, target, opts)? else {
            continue;
        };
        let indented = indent_model(&model, f_used, opts)?;
        let relaxed = relax_model(&model, &indented, opts)?;
        let Some(fit) = fit_free_sector(&relaxed) else {
            continue;
        };
        rows.push(RelaxationRow {
            contacts: target,
            f_used,
            r_over_r0: fit.radius / polygon.circumradius(),
            rms: fit.rms_residual,
        });
    }
    Ok(rows)
}

/// One vertex count of the convergence study.
#[derive(Clone, Debug)]
pub struct ConvergenceRecord {
    pub n: usize,
    pub apex_height: f64,
    /// Symmetric Hausdorff distance to the largest-n shape, after
    /// arc-length resampling of both closed chains to
    /// [`RESAMPLE_POINTS`] points.
    pub discrepancy: f64,
    /// Deformed vertex chain.
    pub shape: Vec<Vec2>,
}

/// Applies the same total vertical force to polygons of increasing vertex
/// count (per-vertex force `total_force / (n - 1)`) and measures how the
/// deformed shape changes relative to the largest `n`.
pub fn convergence_study(
    n_list: &[usize],
    total_force: f64,
    circumradius: f64,
    params: &ElasticParams,
    opts: &ContactOptions,
) -> Result<Vec<ConvergenceRecord>> {
    if n_list.is_empty() {
        return Err(Error::Domain("empty vertex-count list".into()));
    }
    if n_list.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::Domain(
            "vertex-count list must be sorted ascending".into(),
        ));
    }
    if !total_force.is_finite() || total_force < 0.0 {
        return Err(Error::Domain("total force must be nonnegative".into()));
    }

    let shapes: Vec<(usize, f64, Vec<Vec2>)> = n_list
        .par_iter()
        .map(|&n| {
            let polygon = Polygon::regular(n, circumradius)?;
            let model = EnergyModel::new(polygon, *params);
            let f = total_force / (n as f64 - 1.0);
            let cfg = indent_model(&model, f, opts)?;
            Ok((n, apparent_height(&cfg), cfg.deformed_vertices().to_vec()))
        })
        .collect::<Result<_>>()?;

    let reference = resample_closed_chain(&shapes.last().unwrap().2, RESAMPLE_POINTS);
    Ok(shapes
        .into_iter()
        .map(|(n, apex_height, shape)| {
            let sampled = resample_closed_chain(&shape, RESAMPLE_POINTS);
            ConvergenceRecord {
                n,
                apex_height,
                discrepancy: hausdorff_distance(&sampled, &reference),
                shape,
            }
        })
        .collect())
}

/// Resamples a closed polygonal chain to `samples` points spaced
/// uniformly in arc length, starting at the first input point.
pub fn resample_closed_chain(points: &[Vec2], samples: usize) -> Vec<Vec2> {
    assert!(points.len() >= 2 && samples >= 1);
    let n = points.len();
    let mut cumulative = Vec::with_capacity(n + 1);
    cumulative.push(0.0);
    for i in 0..n {
        let seg = (points[(i + 1) % n] - points[i]).norm();
        cumulative.push(cumulative[i] + seg);
    }
    let total = cumulative[n];
    let mut out = Vec::with_capacity(samples);
    let mut seg_idx = 0;
    for j in 0..samples {
        let target = total * j as f64 / samples as f64;
        while cumulative[seg_idx + 1] < target {
            seg_idx += 1;
        }
        let seg_len = cumulative[seg_idx + 1] - cumulative[seg_idx];
        let t = if seg_len > 0.0 {
            (target - cumulative[seg_idx]) / seg_len
        } else {
            0.0
        };
        let a = points[seg_idx];
        let b = points[(seg_idx + 1) % n];
        out.push(a + (b - a) * t);
    }
    out
}

/// Symmetric Hausdorff distance between two point sets.
pub fn hausdorff_distance(a: &[Vec2], b: &[Vec2]) -> f64 {
    fn directed(from: &[Vec2], to: &[Vec2]) -> f64 {
        from.iter()
            .map(|p| {
                to.iter()
                    .map(|q| (*p - *q).norm_squared())
                    .fold(f64::INFINITY, f64::min)
            })
            .fold(0.0f64, f64::max)
            .sqrt()
    }
    directed(a, b).max(directed(b, a))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contact::indent;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn decagon() -> Polygon {
        Polygon::regular(10, 1.0).unwrap()
    }

    #[test]
    fn fit_circle_recovers_points_on_unit_circle() {
        let pts: Vec<Vec2> = [0.0, 0.5, 1.0, 1.5]
            .iter()
            .map(|t| {
                let a = t * std::f64::consts::PI;
                Vec2::new(a.cos(), a.sin())
            })
            .collect();
        let fit = fit_circle(&pts).unwrap();
        assert_relative_eq!(fit.radius, 1.0, epsilon = 1e-12);
        assert!(fit.center.norm() <= 1e-12);
        assert!(fit.rms_residual <= 1e-12);
        assert_eq!(fit.point_count, 4);
    }

    #[test]
    fn fit_circle_on_a_regular_polygon_recovers_the_circumcircle() {
        let p = decagon();
        let fit = fit_circle(p.vertices()).unwrap();
        assert_relative_eq!(fit.radius, 1.0, epsilon = 1e-12);
        assert_relative_eq!(fit.center.y, 1.0, epsilon = 1e-12);
        assert!(fit.center.x.abs() <= 1e-12);
        assert!(fit.rms_residual <= 1e-12);
    }

    #[test]
    fn fit_circle_rejects_degenerate_input() {
        let two = [Vec2::ZERO, Vec2::new(1.0, 0.0)];
        assert!(matches!(fit_circle(&two), Err(Error::Domain(_))));
        let collinear: Vec<Vec2> = (0..5)
            .map(|i| Vec2::new(i as f64, 2.0 * i as f64))
            .collect();
        assert!(matches!(fit_circle(&collinear), Err(Error::Degenerate(_))));
    }

    #[test]
    fn apparent_height_of_reference_configurations() {
        let opts = ContactOptions::default();
        let cfg = indent(&decagon(), &ElasticParams::reduced(), 0.0, &opts).unwrap();
        assert_relative_eq!(apparent_height(&cfg), 2.0, epsilon = 1e-14);
        // reference case, frozen model output
        let cfg = indent(&decagon(), &ElasticParams::reduced(), 0.25, &opts).unwrap();
        assert_relative_eq!(apparent_height(&cfg), 1.072996379667, epsilon = 1e-9);
        let fit = fit_free_sector(&cfg).unwrap();
        assert_relative_eq!(fit.radius, 1.080228867614, epsilon = 1e-8);
    }

    #[test]
    fn flattened_polygon_has_zero_height() {
        // a crushing force drives every vertex onto the surface exactly
        let cfg = indent(
            &decagon(),
            &ElasticParams::reduced(),
            50.0,
            &ContactOptions::default(),
        )
        .unwrap();
        assert_eq!(cfg.contact_count(), 10);
        assert!(apparent_height(&cfg).abs() <= 1e-12);
    }

    #[test]
    fn sweep_single_zero_point() {
        let recs = force_sweep(
            &decagon(),
            &ElasticParams::reduced(),
            &[0.0],
            &ContactOptions::default(),
        )
        .unwrap();
        assert_eq!(recs.len(), 1);
        assert_relative_eq!(recs[0].height, 2.0, epsilon = 1e-14);
        assert_eq!(recs[0].contacts, 1);
        assert_relative_eq!(recs[0].height_drop, 0.0, epsilon = 1e-14);
    }

    #[test]
    fn sweep_monotonicity_properties() {
        let grid: Vec<f64> = (0..=30).map(|i| i as f64 / 30.0).collect();
        let recs = force_sweep(
            &decagon(),
            &ElasticParams::reduced(),
            &grid,
            &ContactOptions::default(),
        )
        .unwrap();
        for w in recs.windows(2) {
            assert!(w[1].height <= w[0].height + 1e-12);
            assert!(w[1].contacts >= w[0].contacts);
        }
        let plateaus: std::collections::BTreeSet<usize> = recs.iter().map(|r| r.contacts).collect();
        assert!(plateaus.len() >= 3, "plateaus: {plateaus:?}");
    }

    #[test]
    fn sweep_rejects_bad_grids() {
        let p = decagon();
        let params = ElasticParams::reduced();
        let opts = ContactOptions::default();
        assert!(force_sweep(&p, &params, &[0.2, 0.1], &opts).is_err());
        assert!(force_sweep(&p, &params, &[-0.1, 0.2], &opts).is_err());
    }

    #[test]
    fn relaxation_study_count_one_is_exact() {
        let rows = relaxation_study(
            &decagon(),
            &ElasticParams::reduced(),
            &[1],
            &ContactOptions::default(),
        )
        .unwrap();
        assert_eq!(rows.len(), 1);
        assert_relative_eq!(rows[0].r_over_r0, 1.0, epsilon = 1e-12);
        assert_eq!(rows[0].f_used, 0.0);
        assert!(rows[0].rms <= 1e-12);
    }

    #[test]
    fn relaxation_study_decagon_rows() {
        // frozen model outputs (independent prototype agreement to 1e-5)
        let rows = relaxation_study(
            &decagon(),
            &ElasticParams::reduced(),
            &[2, 3, 5, 7],
            &ContactOptions::default(),
        )
        .unwrap();
        // count 2 is unreachable on the decagon (contacts appear in
        // mirror pairs around P1): absent, not an error
        assert_eq!(rows.len(), 3);
        let by_count: Vec<usize> = rows.iter().map(|r| r.contacts).collect();
        assert_eq!(by_count, vec![3, 5, 7]);
        assert_relative_eq!(rows[0].r_over_r0, 1.0266873, epsilon = 1e-4);
        assert_relative_eq!(rows[1].r_over_r0, 1.2359158, epsilon = 1e-4);
        assert_relative_eq!(rows[2].r_over_r0, 1.6011136, epsilon = 1e-4);
        assert_relative_eq!(rows[0].f_used, 0.0674168, epsilon = 1e-4);
        assert_relative_eq!(rows[1].f_used, 0.3088582, epsilon = 1e-4);
        assert_relative_eq!(rows[2].f_used, 0.7895287, epsilon = 1e-4);
        for row in &rows {
            assert!(row.rms.is_finite());
        }
    }

    #[test]
    fn convergence_study_duplicated_n_has_zero_discrepancy() {
        let recs = convergence_study(
            &[12, 12],
            2.25,
            1.0,
            &ElasticParams::reduced(),
            &ContactOptions::default(),
        )
        .unwrap();
        assert_eq!(recs.len(), 2);
        assert!(recs[0].discrepancy <= 1e-12);
        assert!(recs[1].discrepancy <= 1e-12);
    }

    #[test]
    fn convergence_study_matches_frozen_reference() {
        let recs = convergence_study(
            &[10, 20, 40],
            2.25,
            1.0,
            &ElasticParams::reduced(),
            &ContactOptions::default(),
        )
        .unwrap();
        // frozen from the independent prototype
        assert_relative_eq!(recs[0].apex_height, 1.072996, epsilon = 1e-5);
        assert_relative_eq!(recs[1].apex_height, 0.552790, epsilon = 1e-5);
        assert_relative_eq!(recs[2].apex_height, 0.163167, epsilon = 1e-5);
        assert_relative_eq!(recs[0].discrepancy, 1.072996, epsilon = 1e-4);
        assert_relative_eq!(recs[1].discrepancy, 0.540434, epsilon = 1e-4);
        assert_relative_eq!(recs[2].discrepancy, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn resample_square_chain() {
        let square = [
            Vec2::new(0.0, 0.0),
            Vec2::new(1.0, 0.0),
            Vec2::new(1.0, 1.0),
            Vec2::new(0.0, 1.0),
        ];
        let pts = resample_closed_chain(&square, 8);
        assert_eq!(pts.len(), 8);
        assert_eq!(pts[0], Vec2::new(0.0, 0.0));
        assert_relative_eq!(pts[1].x, 0.5, epsilon = 1e-14);
        assert_relative_eq!(pts[1].y, 0.0, epsilon = 1e-14);
        assert_relative_eq!(pts[5].x, 0.5, epsilon = 1e-14);
        assert_relative_eq!(pts[5].y, 1.0, epsilon = 1e-14);
    }

    #[test]
    fn hausdorff_hand_cases() {
        let a = [Vec2::new(0.0, 0.0), Vec2::new(1.0, 0.0)];
        let b = [
            Vec2::new(0.0, 0.0),
            Vec2::new(1.0, 0.0),
            Vec2::new(2.0, 0.0),
        ];
        assert_relative_eq!(hausdorff_distance(&a, &b), 1.0, epsilon = 1e-14);
        assert_relative_eq!(
            hausdorff_distance(&b, &a),
            hausdorff_distance(&a, &b),
            epsilon = 1e-14
        );
        assert_eq!(hausdorff_distance(&a, &a), 0.0);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn fit_circle_recovers_random_circles(
            cx in -5.0f64..5.0,
            cy in -5.0f64..5.0,
            r in 0.1f64..10.0,
            k in 3usize..40,
            phase in 0.0f64..std::f64::consts::PI,
        ) {
            let pts: Vec<Vec2> = (0..k)
                .map(|i| {
                    let a = phase + 2.0 * std::f64::consts::PI * i as f64 / k as f64;
                    Vec2::new(cx + r * a.cos(), cy + r * a.sin())
                })
                .collect();
            let fit = fit_circle(&pts).unwrap();
            prop_assert!((fit.radius - r).abs() <= 1e-10 * r.max(1.0));
            prop_assert!((fit.center.x - cx).abs() <= 1e-9);
            prop_assert!((fit.center.y - cy).abs() <= 1e-9);
            prop_assert!(fit.rms_residual <= 1e-10);
        }

        #[test]
        fn fit_circle_is_rigid_motion_invariant(
            angle in 0.0f64..std::f64::consts::PI,
            tx in -3.0f64..3.0,
            ty in -3.0f64..3.0,
        ) {
            // a fixed non-circular point cloud
            let pts = [
                Vec2::new(1.0, 0.1),
                Vec2::new(0.2, 0.9),
                Vec2::new(-0.9, 0.3),
                Vec2::new(-0.4, -0.8),
                Vec2::new(0.7, -0.6),
            ];
            let fit0 = fit_circle(&pts).unwrap();
            let (s, c) = angle.sin_cos();
            let moved: Vec<Vec2> = pts
                .iter()
                .map(|p| Vec2::new(c * p.x - s * p.y + tx, s * p.x + c * p.y + ty))
                .collect();
            let fit1 = fit_circle(&moved).unwrap();
            prop_assert!((fit0.radius - fit1.radius).abs() <= 1e-10);
            prop_assert!((fit0.rms_residual - fit1.rms_residual).abs() <= 1e-10);
            // center transforms with the motion
            let cx = c * fit0.center.x - s * fit0.center.y + tx;
            let cy = s * fit0.center.x + c * fit0.center.y + ty;
            prop_assert!((fit1.center.x - cx).abs() <= 1e-9);
            prop_assert!((fit1.center.y - cy).abs() <= 1e-9);
        }
    }
}
