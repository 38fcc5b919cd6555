//! Elastic energy assembly: the stretching matrix, the bending matrix, and
//! the total Hessian `H = k S^T S + kappa C^2 T^T T`.
//!
//! The displacement vector `U` stacks the free-vertex displacements
//! `u_2 .. u_n` (x then y per vertex; `u_1 = 0` by assumption), so `U` has
//! length `2n - 2`. Total energy is `J(U) = 1/2 U^T H U`, a strictly
//! convex quadratic: `S^T S` is positive definite because `S` has the
//! structure of a discrete gradient with one end fixed, and `T^T T` is
//! nonnegative definite.

use crate::geometry::{Polygon, Vec2};
use crate::{Error, Result};
use nalgebra::{DMatrix, DVector};

/// Index of the horizontal displacement component of vertex `label`
/// (1-based; valid for `label >= 2`).
pub fn horizontal_dof(label: usize) -> usize {
    2 * (label - 2)
}

/// Index of the vertical displacement component of vertex `label`
/// (1-based; valid for `label >= 2`).
pub fn vertical_dof(label: usize) -> usize {
    2 * (label - 2) + 1
}

/// Displacement of vertex `label` read out of a stacked displacement
/// vector (`u_1` is identically zero).
pub fn displacement_of(u: &DVector<f64>, label: usize) -> Vec2 {
    if label == 1 {
        Vec2::ZERO
    } else {
        Vec2::new(u[horizontal_dof(label)], u[vertical_dof(label)])
    }
}

/// Elastic constants: `stretching` weighs the per-edge Hooke term,
/// `bending` the angle-variation term.
#[derive(Clone, Copy, Debug)]
pub struct ElasticParams {
    pub stretching: f64,
    pub bending: f64,
}

impl ElasticParams {
    pub fn new(stretching: f64, bending: f64) -> Result<Self> {
        if !stretching.is_finite() || stretching <= 0.0 {
            return Err(Error::Domain(format!(
                "stretching constant must be positive, got {stretching}"
            )));
        }
        if !bending.is_finite() || bending <= 0.0 {
            return Err(Error::Domain(format!(
                "bending constant must be positive, got {bending}"
            )));
        }
        Ok(ElasticParams {
            stretching,
            bending,
        })
    }

    /// Reduced units: both constants equal to one.
    pub fn reduced() -> Self {
        ElasticParams {
            stretching: 1.0,
            bending: 1.0,
        }
    }
}

/// Which vertex angles contribute bending rows.
///
/// `All` keeps one row per vertex (the row for the angle at the fixed
/// vertex `P1` involves only `u_2` and `u_n`). `FreeOnly` drops that row,
/// keeping the `n - 1` angles at the free vertices.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum BendingRows {
    #[default]
    All,
    FreeOnly,
}

/// Stretching matrix: `2n x (2n-2)`, block-bidiagonal in 2x2 blocks.
/// Block row `r` (0-based, one per edge) carries `-I` at block column `r`
/// and `+I` at block column `r - 1` where those columns exist (block
/// column `c` indexes `u_{c+2}`). Applied to `U` it stacks the per-edge
/// displacement differences with `u_1 = 0`.
pub fn assemble_sigma(polygon: &Polygon) -> DMatrix<f64> {
    let n = polygon.vertex_count();
    let mut sigma = DMatrix::zeros(2 * n, 2 * n - 2);
    for r in 0..n {
        if r + 1 < n {
            sigma[(2 * r, 2 * r)] = -1.0;
            sigma[(2 * r + 1, 2 * r + 1)] = -1.0;
        }
        if r >= 1 {
            sigma[(2 * r, 2 * (r - 1))] = 1.0;
            sigma[(2 * r + 1, 2 * (r - 1) + 1)] = 1.0;
        }
    }
    sigma
}

/// Bending matrix: one row per vertex angle, columns over `u_2 .. u_n`.
///
/// The row for the angle at vertex `i` carries, with `e_i` the undeformed
/// edge `P_i -> P_{i+1}`:
/// `-e_i^T` on `u_{i-1}`, `(e_i - e_{i-1})^T` on `u_i`, `e_{i-1}^T` on
/// `u_{i+1}` (indices modulo `n`; columns for `u_1` are absent). Rows are
/// ordered by vertex label. Only `T^T T` enters the energy, so any
/// per-row global sign is immaterial; the signs here match the squared
/// summand of the bending energy.
pub fn assemble_theta(polygon: &Polygon, rows: BendingRows) -> DMatrix<f64> {
    let n = polygon.vertex_count();
    let edges = polygon.edge_vectors();
    let labels: Vec<usize> = match rows {
        BendingRows::All => (1..=n).collect(),
        BendingRows::FreeOnly => (2..=n).collect(),
    };
    let mut theta = DMatrix::zeros(labels.len(), 2 * n - 2);
    for (row, &i) in labels.iter().enumerate() {
        let e_cur = edges[i - 1]; // P_i -> P_{i+1}
        let e_prev = edges[(i + n - 2) % n]; // P_{i-1} -> P_i
        let prev_label = if i == 1 { n } else { i - 1 };
        let next_label = if i == n { 1 } else { i + 1 };
        let mut add = |label: usize, coeff: Vec2| {
            if label == 1 {
                return; // u_1 = 0, column absent
            }
            theta[(row, horizontal_dof(label))] += coeff.x;
            theta[(row, vertical_dof(label))] += coeff.y;
        };
        add(prev_label, -e_cur);
        add(i, e_cur - e_prev);
        add(next_label, e_prev);
    }
    theta
}

/// Assembled energy model for one polygon: matrices, the bending constant
/// `C`, and the total Hessian. Immutable after construction.
#[derive(Clone, Debug)]
pub struct EnergyModel {
    polygon: Polygon,
    params: ElasticParams,
    sigma: DMatrix<f64>,
    theta: DMatrix<f64>,
    bending_constant: f64,
    hessian: DMatrix<f64>,
}

impl EnergyModel {
    pub fn new(polygon: Polygon, params: ElasticParams) -> Self {
        Self::with_bending_rows(polygon, params, BendingRows::All)
    }

    pub fn with_bending_rows(polygon: Polygon, params: ElasticParams, rows: BendingRows) -> Self {
        let sigma = assemble_sigma(&polygon);
        let theta = assemble_theta(&polygon, rows);
        let c = polygon.bending_constant();
        let hessian = params.stretching * sigma.transpose() * &sigma
            + params.bending * c * c * theta.transpose() * &theta;
        EnergyModel {
            polygon,
            params,
            sigma,
            theta,
            bending_constant: c,
            hessian,
        }
    }

    pub fn polygon(&self) -> &Polygon {
        &self.polygon
    }

    pub fn params(&self) -> ElasticParams {
        self.params
    }

    pub fn sigma(&self) -> &DMatrix<f64> {
        &self.sigma
    }

    pub fn theta(&self) -> &DMatrix<f64> {
        &self.theta
    }

    pub fn bending_constant(&self) -> f64 {
        self.bending_constant
    }

    /// Total Hessian `H = k S^T S + kappa C^2 T^T T`, size
    /// `(2n-2) x (2n-2)`, symmetric positive definite.
    pub fn hessian(&self) -> &DMatrix<f64> {
        &self.hessian
    }

    pub fn dof_count(&self) -> usize {
        self.polygon.dof_count()
    }

    fn check_dim(&self, u: &DVector<f64>) -> Result<()> {
        if u.len() != self.dof_count() {
            return Err(Error::DimensionMismatch {
                expected: self.dof_count(),
                actual: u.len(),
            });
        }
        Ok(())
    }

    /// Stretching energy `(k/2) U^T S^T S U`.
    pub fn stretching_energy(&self, u: &DVector<f64>) -> Result<f64> {
        self.check_dim(u)?;
        let su = &self.sigma * u;
        Ok(0.5 * self.params.stretching * su.norm_squared())
    }

    /// Bending energy `(kappa C^2 / 2) U^T T^T T U`.
    pub fn bending_energy(&self, u: &DVector<f64>) -> Result<f64> {
        self.check_dim(u)?;
        let tu = &self.theta * u;
        let c = self.bending_constant;
        Ok(0.5 * self.params.bending * c * c * tu.norm_squared())
    }

    /// Total elastic energy `J(U) = 1/2 U^T H U`.
    pub fn total_energy(&self, u: &DVector<f64>) -> Result<f64> {
        self.check_dim(u)?;
        Ok(0.5 * (&self.hessian * u).dot(u))
    }

    /// Gradient of the total energy, `H U`.
    pub fn gradient(&self, u: &DVector<f64>) -> Result<DVector<f64>> {
        self.check_dim(u)?;
        Ok(&self.hessian * u)
    }
}

/// Stretching energy evaluated by the explicit double sum
/// `(k/4) sum_i sum_{j in {i-1, i+1}} |u_i - u_j|^2` with indices modulo
/// `n` and `u_1 = 0`. Independent of the matrix route; used as an oracle.
pub fn stretching_energy_sum(polygon: &Polygon, k: f64, u: &DVector<f64>) -> Result<f64> {
    let n = polygon.vertex_count();
    if u.len() != polygon.dof_count() {
        return Err(Error::DimensionMismatch {
            expected: polygon.dof_count(),
            actual: u.len(),
        });
    }
    let disp = |label: usize| displacement_of(u, label);
    let mut acc = 0.0;
    for i in 1..=n {
        let prev = if i == 1 { n } else { i - 1 };
        let next = if i == n { 1 } else { i + 1 };
        for j in [prev, next] {
            acc += (disp(i) - disp(j)).norm_squared();
        }
    }
    Ok(0.25 * k * acc)
}

/// Bending energy evaluated by the explicit sum of squared linearized
/// angle variations. Independent of the matrix route; used as an oracle.
pub fn bending_energy_sum(
    polygon: &Polygon,
    kappa: f64,
    rows: BendingRows,
    u: &DVector<f64>,
) -> Result<f64> {
    let n = polygon.vertex_count();
    if u.len() != polygon.dof_count() {
        return Err(Error::DimensionMismatch {
            expected: polygon.dof_count(),
            actual: u.len(),
        });
    }
    let edges = polygon.edge_vectors();
    let disp = |label: usize| displacement_of(u, label);
    let first = match rows {
        BendingRows::All => 1,
        BendingRows::FreeOnly => 2,
    };
    let c = polygon.bending_constant();
    let mut acc = 0.0;
    for i in first..=n {
        let e_cur = edges[i - 1];
        let e_prev = edges[(i + n - 2) % n];
        let prev = if i == 1 { n } else { i - 1 };
        let next = if i == n { 1 } else { i + 1 };
        let s = e_prev.dot(disp(next)) + (e_cur - e_prev).dot(disp(i)) - e_cur.dot(disp(prev));
        acc += s * s;
    }
    Ok(0.5 * kappa * c * c * acc)
}
