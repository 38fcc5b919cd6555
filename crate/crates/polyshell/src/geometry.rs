//! Reference configuration: a regular n-gon resting on the surface `y = 0`
//! at exactly one vertex.
//!
//! Vertices are labelled `P1..Pn` counter-clockwise, with `P1` at the
//! origin and the polygon center directly above it at `(0, R)`, so the
//! surface is the line `y = 0` and the non-penetration constraint is
//! simply `y >= 0`. Documentation and I/O use these 1-based labels;
//! internal arrays are 0-based.

use crate::{Error, Result};
use std::ops::{Add, Mul, Neg, Sub};

/// A point or vector in the plane.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    pub fn new(x: f64, y: f64) -> Self {
        Vec2 { x, y }
    }

    pub fn dot(self, other: Vec2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// z-component of the 3D cross product of the two vectors embedded in
    /// the plane.
    pub fn cross(self, other: Vec2) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn norm_squared(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.norm_squared().sqrt()
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x - o.x, self.y - o.y)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, s: f64) -> Vec2 {
        Vec2::new(self.x * s, self.y * s)
    }
}

impl Mul<Vec2> for f64 {
    type Output = Vec2;
    fn mul(self, v: Vec2) -> Vec2 {
        v * self
    }
}

/// Undeformed regular polygon with `n` vertices, resting on `y = 0` at `P1`.
#[derive(Clone, Debug)]
pub struct Polygon {
    n: usize,
    circumradius: f64,
    vertices: Vec<Vec2>,
}

impl Polygon {
    /// Builds the regular n-gon of the given circumradius, centered at
    /// `(0, R)` with vertex `i` (1-based) at angle `-pi/2 + 2*pi*(i-1)/n`
    /// from the center. This puts `P1` at the origin and orders the
    /// vertices counter-clockwise.
    pub fn regular(n: usize, circumradius: f64) -> Result<Self> {
        if n < 3 {
            return Err(Error::Domain(format!(
                "polygon needs at least 3 vertices, got {n}"
            )));
        }
        if !circumradius.is_finite() || circumradius <= 0.0 {
            return Err(Error::Domain(format!(
                "circumradius must be positive and finite, got {circumradius}"
            )));
        }
        let mut vertices = Vec::with_capacity(n);
        for i in 0..n {
            let angle =
                -std::f64::consts::FRAC_PI_2 + 2.0 * std::f64::consts::PI * i as f64 / n as f64;
            vertices.push(Vec2::new(
                circumradius * angle.cos(),
                circumradius + circumradius * angle.sin(),
            ));
        }
        // P1 lies on the surface exactly; kill the rounding residue so the
        // constraint y >= 0 holds without tolerance at the fixed vertex.
        vertices[0] = Vec2::ZERO;
        Ok(Polygon {
            n,
            circumradius,
            vertices,
        })
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn circumradius(&self) -> f64 {
        self.circumradius
    }

    /// Vertices in counter-clockwise order, starting at `P1 = (0, 0)`.
    pub fn vertices(&self) -> &[Vec2] {
        &self.vertices
    }

    /// Vertex by 1-based label.
    pub fn vertex(&self, label: usize) -> Vec2 {
        self.vertices[label - 1]
    }

    /// Number of displacement degrees of freedom (`2n - 2`; `P1` is fixed).
    pub fn dof_count(&self) -> usize {
        2 * self.n - 2
    }

    /// Edge vectors `P_i -> P_{i+1}`, the last one closing `P_n -> P_1`.
    /// Their sum is exactly the zero vector up to rounding.
    pub fn edge_vectors(&self) -> Vec<Vec2> {
        (0..self.n)
            .map(|i| self.vertices[(i + 1) % self.n] - self.vertices[i])
            .collect()
    }

    /// Common edge length `l = 2 R sin(pi/n)`.
    pub fn edge_length(&self) -> f64 {
        2.0 * self.circumradius * (std::f64::consts::PI / self.n as f64).sin()
    }

    /// The geometric constant `C = sin(2*pi/n) / l^2` entering the bending
    /// energy. For the regular polygon it equals
    /// `|e_i x e_{i-1}| / (|e_i|^2 |e_{i-1}|^2)` at every vertex index.
    pub fn bending_constant(&self) -> f64 {
        let l = self.edge_length();
        (2.0 * std::f64::consts::PI / self.n as f64).sin() / (l * l)
    }

    /// Signed area (positive for the counter-clockwise orientation).
    pub fn signed_area(&self) -> f64 {
        let mut acc = 0.0;
        for i in 0..self.n {
            let a = self.vertices[i];
            let b = self.vertices[(i + 1) % self.n];
            acc += a.cross(b);
        }
        0.5 * acc
    }

    /// Apparent height of the undeformed polygon (max vertex ordinate).
    pub fn height(&self) -> f64 {
        self.vertices
            .iter()
            .map(|v| v.y)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Label of the mirror image of vertex `label` under `x -> -x`
    /// (`P1` maps to itself, `P_i` to `P_{n+2-i}`).
    pub fn mirror_label(&self, label: usize) -> usize {
        if label == 1 {
            1
        } else {
            self.n + 2 - label
        }
    }
}
