//! Geometry kernel over the uncertainty polyhedron `P_t`.
//!
//! Every halfspace is stored as `aᵀx ≤ b` with `‖a‖ = 1`, so slacks are
//! Euclidean distances to the bounding hyperplanes.

mod analytic;
mod lp;
mod sampling;

pub use analytic::{analytic_center, AnalyticCenter, NewtonParams};
pub use lp::{chebyshev_center, lp_solve, maximize, LpSolution, Sense};
pub use sampling::{center_of_gravity, hit_and_run, hit_and_run_scaled, CgParams};

use thiserror::Error;

use crate::constraints::ConstraintSet;
use crate::units::norm;

/// LP optimality and feasibility tolerance.
pub const LP_TOL: f64 = 1e-9;
/// Minimum slack for a point to count as strictly interior.
pub const INTERIOR_SLACK: f64 = 1e-12;
/// Chebyshev radius at or below which a polyhedron is treated as degenerate.
pub const DEGENERATE_RADIUS: f64 = 1e-12;
/// Hit-and-Run chord length below which the walk gives up.
pub const MIN_CHORD: f64 = 1e-14;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("polyhedron is empty")]
    EmptyPolyhedron,
    #[error("linear program is unbounded")]
    Unbounded,
    #[error("polyhedron has no usable interior (Chebyshev radius {radius:e})")]
    DegeneratePolyhedron { radius: f64 },
    #[error("Hit-and-Run chord collapsed")]
    ChordCollapse,
    #[error("start point is not strictly interior")]
    NotInterior,
    #[error("simplex exceeded its iteration limit")]
    LpIterationLimit,
    #[error("Newton iteration limit reached")]
    MaxIterationsExceeded { best: Vec<f64> },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Le,
    Ge,
}

/// Intersection of halfspaces in `R^dim`.
#[derive(Clone, Debug, PartialEq)]
pub struct Polyhedron {
    dim: usize,
    a: Vec<f64>,
    b: Vec<f64>,
    /// Set when a degenerate row such as `0 ≤ −1` was added.
    infeasible: bool,
}

impl Polyhedron {
    pub fn new(dim: usize) -> Self {
        Self { dim, a: Vec::new(), b: Vec::new(), infeasible: false }
    }

    /// `{x : 0 ≤ x_i ≤ ub}`.
    pub fn prior_box(dim: usize, ub: f64) -> Self {
        let mut p = Self::new(dim);
        let mut e = vec![0.0; dim];
        for i in 0..dim {
            e[i] = 1.0;
            p.push(&e, Side::Ge, 0.0);
            p.push(&e, Side::Le, ub);
            e[i] = 0.0;
        }
        p
    }

    /// Prior box plus every stored inequality.
    pub fn from_constraints(set: &ConstraintSet, dim: usize, prior_ub: f64) -> Self {
        let mut p = Self::prior_box(dim, prior_ub);
        for pair in set.pairs() {
            if let Some(u) = &pair.upper {
                p.push(u, Side::Ge, 1.0);
            }
            if let Some(l) = &pair.lower {
                p.push(l, Side::Le, 1.0);
            }
        }
        p
    }

    /// Adds `normalᵀx (≤|≥) offset`.
    pub fn push(&mut self, normal: &[f64], side: Side, offset: f64) {
        assert_eq!(normal.len(), self.dim, "halfspace dimension mismatch");
        let (sign, off) = match side {
            Side::Le => (1.0, offset),
            Side::Ge => (-1.0, -offset),
        };
        let scale = norm(normal);
        if scale == 0.0 || !scale.is_finite() {
            if off < 0.0 {
                self.infeasible = true;
            }
            return;
        }
        self.a.extend(normal.iter().map(|v| sign * v / scale));
        self.b.push(off / scale);
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_rows(&self) -> usize {
        self.b.len()
    }

    pub fn row(&self, i: usize) -> (&[f64], f64) {
        (&self.a[i * self.dim..(i + 1) * self.dim], self.b[i])
    }

    pub fn rows(&self) -> impl Iterator<Item = (&[f64], f64)> + '_ {
        self.a.chunks_exact(self.dim.max(1)).zip(self.b.iter().copied())
    }

    pub fn is_trivially_infeasible(&self) -> bool {
        self.infeasible
    }

    pub(crate) fn matrix(&self) -> (&[f64], &[f64]) {
        (&self.a, &self.b)
    }

    /// `b − Ax` per row.
    pub fn slacks(&self, x: &[f64]) -> Vec<f64> {
        self.rows().map(|(a, b)| b - crate::units::dot(a, x)).collect()
    }

    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        !self.infeasible && self.rows().all(|(a, b)| crate::units::dot(a, x) <= b + tol)
    }

    pub fn is_interior(&self, x: &[f64]) -> bool {
        !self.infeasible && self.rows().all(|(a, b)| b - crate::units::dot(a, x) > INTERIOR_SLACK)
    }

    /// Image under `y_i = (x_i − origin_i) / scale_i`.
    pub fn rescaled(&self, origin: &[f64], scale: &[f64]) -> Polyhedron {
        let mut out = Polyhedron::new(self.dim);
        out.infeasible = self.infeasible;
        let mut row = vec![0.0; self.dim];
        for (a, b) in self.rows() {
            for i in 0..self.dim {
                row[i] = a[i] * scale[i];
            }
            out.push(&row, Side::Le, b - crate::units::dot(a, origin));
        }
        out
    }
}

/// Axis-aligned box `[lo, hi]` enclosing a polyhedron.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundingBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl BoundingBox {
    pub fn widths(&self) -> Vec<f64> {
        self.lo.iter().zip(&self.hi).map(|(l, h)| h - l).collect()
    }

    pub fn volume(&self) -> f64 {
        self.widths().iter().product()
    }

    pub fn center(&self) -> Vec<f64> {
        self.lo.iter().zip(&self.hi).map(|(l, h)| 0.5 * (l + h)).collect()
    }
}

/// Per-coordinate extremes via `2N` linear programs.
pub fn bounding_box(poly: &Polyhedron) -> Result<BoundingBox, GeometryError> {
    let mut bb = extremes(poly)?;
    for i in 0..poly.dim() {
        bb.lo[i] = bb.lo[i].max(0.0);
        bb.hi[i] = bb.hi[i].max(bb.lo[i]);
    }
    Ok(bb)
}

/// As [`bounding_box`] without clamping at zero, for shifted coordinates.
pub fn extremes(poly: &Polyhedron) -> Result<BoundingBox, GeometryError> {
    let n = poly.dim();
    let mut lo = vec![0.0; n];
    let mut hi = vec![0.0; n];
    let mut e = vec![0.0; n];
    for i in 0..n {
        e[i] = 1.0;
        let max = lp_solve(&e, Sense::Max, poly)?.value;
        let min = lp_solve(&e, Sense::Min, poly)?.value;
        e[i] = 0.0;
        lo[i] = min;
        hi[i] = max.max(min);
    }
    Ok(BoundingBox { lo, hi })
}

/// Largest distance from `center` to a vertex of `bbox`, without
/// enumerating the `2^N` vertices.
pub fn d_max(center: &[f64], bbox: &BoundingBox) -> f64 {
    center
        .iter()
        .zip(bbox.lo.iter().zip(&bbox.hi))
        .map(|(c, (l, h))| {
            let far = (c - l).abs().max((c - h).abs());
            far * far
        })
        .sum::<f64>()
        .sqrt()
}
