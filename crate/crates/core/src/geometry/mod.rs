//! Directions, hyperplanes, halfspaces and convex polytopes.
//!
//! Conventions used throughout the crate:
//! - A direction is a unit vector `u` in `R^k`; its orthonormal complement
//!   `Gamma_u` is a `k x (k-1)` matrix built deterministically from a
//!   Householder reflection that sends `e1` to `u` (first column dropped).
//! - A hyperplane is `{z : c'z = a}`. Its *lower* halfspace `{c'z < a}` is
//!   open and its *upper* halfspace `{c'z >= a}` is closed.
//! - A [`Halfspace`] is the closed set `{x : normal'x >= offset}`.

mod hull;
mod polytope;

pub use hull::{convex_hull, HullFacet};
pub use polytope::{intersect_halfspaces, Facet, Polytope};

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Algebraic tolerance for feasibility and tightness tests.
pub const ALG_TOL: f64 = 1e-10;
/// Tolerance under which two vertices are the same point.
pub const VERTEX_TOL: f64 = 1e-8;

/// A unit vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Direction(DVector<f64>);

impl Direction {
    /// Normalises `v`; rejects zero and non-finite vectors.
    pub fn new(v: DVector<f64>) -> Result<Self> {
        if v.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidInput("direction has non-finite entries".into()));
        }
        let norm = v.norm();
        if norm == 0.0 || norm < 1e-300 {
            return Err(Error::ZeroDirection);
        }
        Ok(Direction(v / norm))
    }

    pub fn from_slice(v: &[f64]) -> Result<Self> {
        Self::new(DVector::from_column_slice(v))
    }

    /// The direction at angle `theta` in the plane.
    pub fn from_angle(theta: f64) -> Self {
        Direction(DVector::from_vec(vec![theta.cos(), theta.sin()]))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_vector(&self) -> &DVector<f64> {
        &self.0
    }

    pub fn into_vector(self) -> DVector<f64> {
        self.0
    }

    pub fn negate(&self) -> Self {
        Direction(-&self.0)
    }

    /// Polar angle; only meaningful for `k = 2`.
    pub fn angle(&self) -> f64 {
        self.0[1].atan2(self.0[0])
    }
}

/// Orthonormal complement of `u`: a `k x (k-1)` matrix `G` with `G'u = 0`,
/// `G'G = I` and `G G' = I - u u'`.
pub fn orthobasis(u: &Direction) -> DMatrix<f64> {
    let k = u.dim();
    let uv = u.as_vector();
    let mut v = -uv.clone();
    v[0] += 1.0;
    let vv = v.norm_squared();
    let mut g = DMatrix::zeros(k, k.saturating_sub(1));
    if vv < 1e-30 {
        // u == e1: the reflection is the identity.
        for j in 1..k {
            g[(j, j - 1)] = 1.0;
        }
        return g;
    }
    // Columns 2..k of I - 2 v v' / v'v.
    for j in 1..k {
        for i in 0..k {
            let id = if i == j { 1.0 } else { 0.0 };
            g[(i, j - 1)] = id - 2.0 * v[i] * v[j] / vv;
        }
    }
    g
}

/// The hyperplane `{z : c'z = a}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Hyperplane {
    pub c: DVector<f64>,
    pub a: f64,
}

impl Hyperplane {
    pub fn new(c: DVector<f64>, a: f64) -> Self {
        Hyperplane { c, a }
    }

    pub fn dim(&self) -> usize {
        self.c.len()
    }

    /// `c'z - a`.
    pub fn residual(&self, z: &[f64]) -> f64 {
        self.c.iter().zip(z).map(|(c, z)| c * z).sum::<f64>() - self.a
    }

    /// Membership in the open lower halfspace `{c'z < a}`.
    pub fn lower_contains(&self, z: &[f64]) -> bool {
        self.residual(z) < 0.0
    }

    /// Membership in the closed upper halfspace `{c'z >= a}`.
    pub fn upper_contains(&self, z: &[f64]) -> bool {
        self.residual(z) >= 0.0
    }

    /// The closed upper halfspace as a [`Halfspace`].
    pub fn upper(&self) -> Halfspace {
        Halfspace::new(self.c.clone(), self.a)
    }

    /// Rescaled so that `||c|| = 1`.
    pub fn normalized(&self) -> Self {
        let n = self.c.norm();
        Hyperplane { c: &self.c / n, a: self.a / n }
    }
}

/// The closed halfspace `{x : normal'x >= offset}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Halfspace {
    pub normal: DVector<f64>,
    pub offset: f64,
}

impl Halfspace {
    pub fn new(normal: DVector<f64>, offset: f64) -> Self {
        Halfspace { normal, offset }
    }

    pub fn dim(&self) -> usize {
        self.normal.len()
    }

    pub fn slack(&self, x: &DVector<f64>) -> f64 {
        self.normal.dot(x) - self.offset
    }

    pub fn contains(&self, x: &DVector<f64>, tol: f64) -> bool {
        self.slack(x) >= -tol
    }

    pub fn normalized(&self) -> Option<Self> {
        let n = self.normal.norm();
        (n > 0.0).then(|| Halfspace { normal: &self.normal / n, offset: self.offset / n })
    }
}

/// Symmetric Hausdorff distance between two finite point sets.
pub fn vertex_hausdorff(a: &[DVector<f64>], b: &[DVector<f64>]) -> f64 {
    if a.is_empty() && b.is_empty() {
        return 0.0;
    }
    if a.is_empty() || b.is_empty() {
        return f64::INFINITY;
    }
    let one_sided = |p: &[DVector<f64>], q: &[DVector<f64>]| {
        p.iter()
            .map(|x| q.iter().map(|y| (x - y).norm()).fold(f64::INFINITY, f64::min))
            .fold(0.0, f64::max)
    };
    one_sided(a, b).max(one_sided(b, a))
}
