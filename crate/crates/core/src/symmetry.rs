//! Directional scale maps `u -> lambda(u) / sup lambda` and
//! `u -> |c(u)| / sup |c|`, and the symmetry functional `T`: the discrepancy
//! of the normalised lambda map from 1, averaged over directions and a grid
//! of tau levels.
//!
//! Inside a cone with unit normal `t` and mean check loss `L`, the fit is
//! `c = t / t'u` and `lambda = L / t'u`, so both maps are exact reciprocals
//! of `t'u` cone by cone.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::density::gauss_legendre;
use crate::error::{Error, Result};
use crate::solver::is_integer_level;
use crate::sweep::{spherical_triangle_area, sweep, Cone};

/// Midpoint subdivision depth used on spherical patches.
const PATCH_SUBDIVISION: usize = 4;
/// Gauss-Legendre order used on arcs for non-closed-form discrepancies.
const ARC_ORDER: usize = 32;

/// A cell of the direction sphere.
#[derive(Debug, Clone)]
pub enum Cell {
    /// Counter-clockwise angular interval `[lo, hi]` of planar directions.
    Arc { lo: f64, hi: f64 },
    /// Spherical polygon with cyclically ordered unit rays and an interior unit point.
    Patch { center: DVector<f64>, rays: Vec<DVector<f64>> },
}

impl Cell {
    fn from_cone(cone: &Cone) -> Option<Cell> {
        match cone.center.len() {
            2 => cone.angular_interval().map(|(lo, hi)| Cell::Arc { lo, hi }),
            3 => Some(Cell::Patch { center: cone.center.clone(), rays: cone.rays.clone() }),
            _ => None,
        }
    }

    pub fn measure(&self) -> f64 {
        match self {
            Cell::Arc { lo, hi } => hi - lo,
            Cell::Patch { center, rays } => fan(center, rays).map(|(a, b, c)| spherical_triangle_area(a, b, c)).sum(),
        }
    }

    /// Strict interior test for a unit direction.
    pub fn contains(&self, u: &DVector<f64>) -> bool {
        match self {
            Cell::Arc { lo, hi } => {
                let theta = u[1].atan2(u[0]);
                let shifted = lo + (theta - lo).rem_euclid(2.0 * PI);
                shifted > *lo && shifted < *hi
            }
            Cell::Patch { center, rays } => (0..rays.len()).all(|i| {
                let (a, b) = (&rays[i], &rays[(i + 1) % rays.len()]);
                let n = a.cross(b);
                (n.dot(u) > 0.0) == (n.dot(center) > 0.0) && n.dot(u).abs() > 1e-14
            }),
        }
    }
}

fn fan<'a>(
    center: &'a DVector<f64>,
    rays: &'a [DVector<f64>],
) -> impl Iterator<Item = (&'a DVector<f64>, &'a DVector<f64>, &'a DVector<f64>)> + 'a {
    (0..rays.len()).map(move |i| (center, &rays[i], &rays[(i + 1) % rays.len()]))
}

/// Value of a map on one cell.
#[derive(Debug, Clone)]
pub enum PieceValue {
    Constant(f64),
    /// `scale / normal'u`.
    Reciprocal { scale: f64, normal: DVector<f64> },
}

impl PieceValue {
    pub fn at(&self, u: &DVector<f64>) -> f64 {
        match self {
            PieceValue::Constant(v) => *v,
            PieceValue::Reciprocal { scale, normal } => scale / normal.dot(u),
        }
    }
}

/// Discrepancy `delta(value, 1)`.
#[derive(Debug, Clone, Copy)]
pub enum Discrepancy {
    Squared,
    Custom(fn(f64, f64) -> f64),
}

impl Discrepancy {
    fn eval(&self, x: f64) -> f64 {
        match self {
            Discrepancy::Squared => (x - 1.0).powi(2),
            Discrepancy::Custom(f) => f(x, 1.0),
        }
    }
}

#[derive(Debug, Clone)]
pub struct MapEntry {
    /// Source cone in the sweep, if any.
    pub cone: Option<usize>,
    pub cell: Cell,
    /// Normalised lambda map on the cell.
    pub lambda: PieceValue,
    /// Normalised `|c|` map on the cell.
    pub cnorm: PieceValue,
    pub lambda_center: f64,
    pub cnorm_center: f64,
    /// Suprema over the cell closure.
    pub lambda_max: f64,
    pub cnorm_max: f64,
}

/// Piecewise exact directional maps at one tau. Every normalised value lies
/// in `(0, 1]` and the largest `lambda_max` (and `cnorm_max`) equals 1.
#[derive(Debug, Clone)]
pub struct DirectionalMap {
    pub tau: f64,
    /// Unnormalised suprema of lambda and of `|c|` over all directions.
    pub lambda_sup: f64,
    pub c_sup: f64,
    pub entries: Vec<MapEntry>,
}

/// One polar plot sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarSample {
    pub angle: f64,
    pub lambda: f64,
    pub cnorm: f64,
}

impl DirectionalMap {
    /// A map whose unnormalised value is `value` everywhere on the given
    /// cells; the stored normalised maps are identically 1.
    pub fn constant(tau: f64, cells: Vec<Cell>, value: f64) -> Self {
        let entries = cells
            .into_iter()
            .map(|cell| MapEntry {
                cone: None,
                cell,
                lambda: PieceValue::Constant(1.0),
                cnorm: PieceValue::Constant(1.0),
                lambda_center: 1.0,
                cnorm_center: 1.0,
                lambda_max: 1.0,
                cnorm_max: 1.0,
            })
            .collect();
        DirectionalMap { tau, lambda_sup: value, c_sup: value, entries }
    }

    /// Normalised `(lambda, |c|)` at a unit direction; `None` on cell boundaries.
    pub fn value_at(&self, u: &DVector<f64>) -> Option<(f64, f64)> {
        self.entries.iter().find(|e| e.cell.contains(u)).map(|e| (e.lambda.at(u), e.cnorm.at(u)))
    }

    /// Average of `delta(lambda_map(u), 1)` under the normalised uniform
    /// measure on the union of the cells.
    pub fn discrepancy(&self, delta: Discrepancy) -> f64 {
        let total: f64 = self.entries.iter().map(|e| e.cell.measure()).sum();
        let integral: f64 = self.entries.iter().map(|e| integrate(&e.cell, &e.lambda, delta)).sum();
        integral / total
    }

    /// Polar samples of both maps, `per_cell` points per planar cell
    /// including its end points.
    pub fn polar_samples(&self, per_cell: usize) -> Result<Vec<PolarSample>> {
        let per_cell = per_cell.max(2);
        let mut out = Vec::with_capacity(per_cell * self.entries.len());
        for e in &self.entries {
            let Cell::Arc { lo, hi } = e.cell else {
                return Err(Error::InvalidInput("polar samples need planar directions".into()));
            };
            for i in 0..per_cell {
                let angle = lo + (hi - lo) * i as f64 / (per_cell - 1) as f64;
                let u = DVector::from_vec(vec![angle.cos(), angle.sin()]);
                out.push(PolarSample { angle, lambda: e.lambda.at(&u), cnorm: e.cnorm.at(&u) });
            }
        }
        Ok(out)
    }
}

fn integrate(cell: &Cell, value: &PieceValue, delta: Discrepancy) -> f64 {
    if let PieceValue::Constant(v) = value {
        return delta.eval(*v) * cell.measure();
    }
    match (cell, value, delta) {
        (Cell::Arc { lo, hi }, PieceValue::Reciprocal { scale, normal }, Discrepancy::Squared) => {
            // With x the angle from the normal, integrate (s sec x - 1)^2.
            let phi = normal[1].atan2(normal[0]);
            let x0 = wrap(lo - phi);
            let x1 = x0 + (hi - lo);
            let anti = |x: f64| scale * scale * x.tan() - 2.0 * scale * x.tan().asinh() + x;
            anti(x1) - anti(x0)
        }
        (Cell::Arc { lo, hi }, _, _) => {
            let (nodes, weights) = gauss_legendre(ARC_ORDER);
            let half = 0.5 * (hi - lo);
            let mid = 0.5 * (hi + lo);
            nodes
                .iter()
                .zip(&weights)
                .map(|(x, w)| {
                    let th = mid + half * x;
                    w * half * delta.eval(value.at(&DVector::from_vec(vec![th.cos(), th.sin()])))
                })
                .sum()
        }
        (Cell::Patch { center, rays }, _, _) => fan(center, rays)
            .map(|(a, b, c)| integrate_triangle(a, b, c, PATCH_SUBDIVISION, &|u| delta.eval(value.at(u))))
            .sum(),
    }
}

fn wrap(x: f64) -> f64 {
    (x + PI).rem_euclid(2.0 * PI) - PI
}

fn integrate_triangle(
    a: &DVector<f64>,
    b: &DVector<f64>,
    c: &DVector<f64>,
    depth: usize,
    f: &dyn Fn(&DVector<f64>) -> f64,
) -> f64 {
    if depth == 0 {
        let mid = (a + b + c).normalize();
        return f(&mid) * spherical_triangle_area(a, b, c);
    }
    let ab = (a + b).normalize();
    let bc = (b + c).normalize();
    let ca = (c + a).normalize();
    integrate_triangle(a, &ab, &ca, depth - 1, f)
        + integrate_triangle(&ab, b, &bc, depth - 1, f)
        + integrate_triangle(&ca, &bc, c, depth - 1, f)
        + integrate_triangle(&ab, &bc, &ca, depth - 1, f)
}

/// Exact piecewise maps from one sweep. The reciprocal of `t'u` is
/// quasi-convex on a cone, so its supremum sits at an extreme ray.
pub fn directional_map(data: &DMatrix<f64>, tau: f64) -> Result<DirectionalMap> {
    let k = data.ncols();
    if !(2..=3).contains(&k) {
        return Err(Error::InvalidInput(format!("directional maps need k = 2 or 3, got {k}")));
    }
    let s = sweep(data, tau)?;
    let mut raw = Vec::with_capacity(s.cones.len());
    for (i, cone) in s.cones.iter().enumerate() {
        let cell = Cell::from_cone(cone).ok_or_else(|| Error::Numerical(format!("cone {i} has no cell")))?;
        let min_tu = cone.rays.iter().map(|r| cone.normal.dot(r)).fold(f64::INFINITY, f64::min);
        if min_tu <= 1e-12 {
            return Err(Error::Numerical(format!("cone {i} reaches a direction orthogonal to its normal")));
        }
        raw.push((i, cell, min_tu));
    }
    let lambda_sup = raw.iter().map(|(i, _, m)| s.cones[*i].loss / m).fold(0.0, f64::max);
    let c_sup = raw.iter().map(|(_, _, m)| 1.0 / m).fold(0.0, f64::max);
    let entries = raw
        .into_iter()
        .map(|(i, cell, min_tu)| {
            let cone = &s.cones[i];
            let lambda = PieceValue::Reciprocal { scale: cone.loss / lambda_sup, normal: cone.normal.clone() };
            let cnorm = PieceValue::Reciprocal { scale: 1.0 / c_sup, normal: cone.normal.clone() };
            MapEntry {
                cone: Some(i),
                lambda_center: lambda.at(&cone.center),
                cnorm_center: cnorm.at(&cone.center),
                lambda_max: cone.loss / min_tu / lambda_sup,
                cnorm_max: 1.0 / min_tu / c_sup,
                cell,
                lambda,
                cnorm,
            }
        })
        .collect();
    Ok(DirectionalMap { tau, lambda_sup, c_sup, entries })
}

/// Weighted sum of map discrepancies; weights are normalised to sum to 1.
pub fn t_from_maps(maps: &[DirectionalMap], weights: Option<&[f64]>, delta: Discrepancy) -> Result<f64> {
    let w = normalized_weights(maps.len(), weights)?;
    Ok(maps.iter().zip(w).map(|(m, w)| w * m.discrepancy(delta)).sum())
}

/// `T` with squared discrepancy and uniform weight over the tau grid.
pub fn t_statistic(data: &DMatrix<f64>, taus: &[f64]) -> Result<f64> {
    t_statistic_with(data, taus, None, Discrepancy::Squared)
}

pub fn t_statistic_with(data: &DMatrix<f64>, taus: &[f64], weights: Option<&[f64]>, delta: Discrepancy) -> Result<f64> {
    if let Some(&t) = taus.iter().find(|&&t| is_integer_level(data.nrows(), t)) {
        return Err(Error::Nonunique(t * data.nrows() as f64));
    }
    let maps = taus.par_iter().map(|&t| directional_map(data, t)).collect::<Result<Vec<_>>>()?;
    t_from_maps(&maps, weights, delta)
}

fn normalized_weights(len: usize, weights: Option<&[f64]>) -> Result<Vec<f64>> {
    if len == 0 {
        return Err(Error::InvalidInput("empty tau grid".into()));
    }
    match weights {
        None => Ok(vec![1.0 / len as f64; len]),
        Some(w) => {
            if w.len() != len {
                return Err(Error::DimensionMismatch { expected: len, found: w.len() });
            }
            let total: f64 = w.iter().sum();
            if w.iter().any(|x| !x.is_finite() || *x < 0.0) || total <= 0.0 {
                return Err(Error::InvalidInput("weights must be nonnegative with positive sum".into()));
            }
            Ok(w.iter().map(|x| x / total).collect())
        }
    }
}
