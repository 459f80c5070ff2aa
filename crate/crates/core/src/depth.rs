//! Quantile regions at fixed `tau`, halfspace-depth regions and their
//! brute-force oracles.
//!
//! The region of order `tau` is the intersection of all upper quantile
//! halfspaces. For `tau` in `((l - 1)/n, l/n)` it coincides with the depth
//! region of level `l` (points of Tukey depth at least `l/n`) whenever that
//! region has an interior.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::geometry::{intersect_halfspaces, vertex_hausdorff, Direction, Halfspace, Polytope, VERTEX_TOL};
use crate::quantile;
use crate::solver;
use crate::sweep::{self, SweepResult};

/// A convex region together with the halfspaces that generate it.
#[derive(Debug, Clone)]
pub struct DepthRegion {
    /// Quantile level, when built from quantile halfspaces.
    pub tau: Option<f64>,
    /// Depth level `l` (the region holds points of depth `>= l/n`).
    pub level: Option<usize>,
    pub polytope: Polytope,
    /// Generating upper halfspaces with the number of observations each cuts off.
    pub halfspaces: Vec<(Halfspace, usize)>,
    /// Agreement with the brute-force oracle, when cross-checked.
    pub verified: Option<bool>,
}

impl DepthRegion {
    pub fn is_empty(&self) -> bool {
        self.polytope.empty
    }

    pub fn is_degenerate(&self) -> bool {
        self.polytope.degenerate
    }

    fn from_halfspaces(hs: Vec<(Halfspace, usize)>, dim: usize, tau: Option<f64>, level: Option<usize>) -> Result<Self> {
        let only: Vec<Halfspace> = hs.iter().map(|(h, _)| h.clone()).collect();
        let polytope = intersect_halfspaces(&only, dim)?;
        Ok(DepthRegion { tau, level, polytope, halfspaces: hs, verified: None })
    }
}

/// Quantile region of order `tau`.
pub fn region(data: &DMatrix<f64>, tau: f64) -> Result<DepthRegion> {
    let s = sweep::sweep(data, tau)?;
    region_from_sweep(&s, data.ncols())
}

/// Intersection of every upper halfspace found by a sweep.
pub fn region_from_sweep(s: &SweepResult, dim: usize) -> Result<DepthRegion> {
    let hs = s.hyperplanes.iter().map(|h| (h.upper(), h.cut_off)).collect();
    let level = (s.n as f64 * s.tau).ceil() as usize;
    DepthRegion::from_halfspaces(hs, dim, Some(s.tau), Some(level))
}

/// Depth levels recoverable from one sweep at `tau`: `min(k, floor(n tau) + 1)`
/// consecutive levels ending at `ceil(n tau)`.
pub fn contour_levels(n: usize, k: usize, tau: f64) -> Vec<usize> {
    let top = (n as f64 * tau).ceil() as usize;
    let count = k.min((n as f64 * tau).floor() as usize + 1);
    (top + 1 - count..=top).collect()
}

/// Depth region of level `l` from the hyperplanes of a sweep: those that cut
/// off at most `l - 1` observations. Cross-checked against the oracle.
pub fn contour_at_level(s: &SweepResult, data: &DMatrix<f64>, level: usize) -> Result<DepthRegion> {
    let (n, k) = data.shape();
    if n != s.n {
        return Err(Error::DimensionMismatch { expected: s.n, found: n });
    }
    let levels = contour_levels(n, k, s.tau);
    if !levels.contains(&level) {
        return Err(Error::InvalidInput(format!(
            "level {level} outside the range {}..={} recoverable at tau = {}",
            levels[0],
            levels[levels.len() - 1],
            s.tau
        )));
    }
    let hs = s
        .hyperplanes
        .iter()
        .filter(|h| h.cut_off < level)
        .map(|h| (h.upper(), h.cut_off))
        .collect();
    let mut out = DepthRegion::from_halfspaces(hs, k, Some(s.tau), Some(level))?;
    let oracle = brute_force_region(data, level)?;
    out.verified = Some(same_region(&out, &oracle));
    Ok(out)
}

/// All depth contours recoverable from one sweep, lowest level first.
pub fn extract_adjacent_contours(s: &SweepResult, data: &DMatrix<f64>) -> Result<Vec<DepthRegion>> {
    contour_levels(s.n, data.ncols(), s.tau)
        .into_iter()
        .map(|l| contour_at_level(s, data, l))
        .collect()
}

/// Regions agree when both are empty or their vertex sets coincide.
pub fn same_region(a: &DepthRegion, b: &DepthRegion) -> bool {
    match (a.is_empty(), b.is_empty()) {
        (true, true) => true,
        (false, false) => vertex_hausdorff(&a.polytope.vertices, &b.polytope.vertices) < VERTEX_TOL,
        _ => false,
    }
}

fn scale_of(data: &DMatrix<f64>) -> f64 {
    data.amax().max(1.0)
}

/// Unit normal of the hyperplane through the given points (rows of `pts`),
/// or `None` when they are affinely dependent.
fn normal_through(pts: &[DVector<f64>]) -> Option<DVector<f64>> {
    let k = pts[0].len();
    let mut diffs = DMatrix::zeros(k, k);
    for (r, p) in pts.iter().enumerate().skip(1) {
        diffs.set_row(r - 1, &(p - &pts[0]).transpose());
    }
    // Last row stays zero; the normal spans the null space of the first k-1.
    let svd = diffs.svd(false, true);
    let v_t = svd.v_t?;
    let sv = &svd.singular_values;
    let (imin, _) = sv.iter().enumerate().fold((0, f64::INFINITY), |acc, (i, &s)| if s < acc.1 { (i, s) } else { acc });
    let smax = sv.max();
    // Exactly one zero singular value (the padding row) is expected.
    let second = sv.iter().enumerate().filter(|&(i, _)| i != imin).map(|(_, &s)| s).fold(f64::INFINITY, f64::min);
    if k > 1 && second <= 1e-12 * smax.max(1e-300) {
        return None;
    }
    Some(v_t.row(imin).transpose().normalize())
}

fn combinations(n: usize, k: usize, mut f: impl FnMut(&[usize])) {
    if k > n {
        return;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        f(&idx);
        let mut i = k;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            if idx[i] < n - k + i {
                idx[i] += 1;
                for j in i + 1..k {
                    idx[j] = idx[j - 1] + 1;
                }
                break;
            }
        }
    }
}

/// Depth region of level `l` by enumeration: intersect the closed halfspaces,
/// bounded by hyperplanes through `k` observations, that contain at least
/// `n - l + 1` observations.
pub fn brute_force_region(data: &DMatrix<f64>, level: usize) -> Result<DepthRegion> {
    solver::check_data(data)?;
    let (n, k) = data.shape();
    if level == 0 || level > n {
        return Err(Error::InvalidInput(format!("depth level must lie in 1..={n}")));
    }
    let tol = 1e-9 * scale_of(data);
    let rows: Vec<DVector<f64>> = (0..n).map(|i| data.row(i).transpose()).collect();
    let need = n - level + 1;
    let mut hs = Vec::new();
    combinations(n, k, |idx| {
        let pts: Vec<DVector<f64>> = idx.iter().map(|&i| rows[i].clone()).collect();
        let Some(t) = normal_through(&pts) else { return };
        let off = t.dot(&pts[0]);
        let (mut above, mut below, mut on) = (0, 0, 0);
        for z in &rows {
            let r = t.dot(z) - off;
            if r > tol {
                above += 1;
            } else if r < -tol {
                below += 1;
            } else {
                on += 1;
            }
        }
        if above + on >= need {
            hs.push((Halfspace::new(t.clone(), off), below));
        }
        if below + on >= need {
            hs.push((Halfspace::new(-t, -off), above));
        }
    });
    DepthRegion::from_halfspaces(hs, k, None, Some(level))
}

/// Minimum number of observations in a closed halfspace whose boundary
/// passes through the origin. `pts` are coordinates relative to the query
/// point.
fn closed_min(pts: &[DVector<f64>], tol: f64) -> usize {
    let dim = pts.first().map_or(0, |p| p.len());
    let at_origin = pts.iter().filter(|p| p.norm() <= tol).count();
    let others: Vec<&DVector<f64>> = pts.iter().filter(|p| p.norm() > tol).collect();
    if dim == 0 || others.is_empty() {
        return pts.len();
    }
    if dim == 1 {
        let pos = others.iter().filter(|p| p[0] > 0.0).count();
        return at_origin + pos.min(others.len() - pos);
    }
    let mut best = usize::MAX;
    let mut any = false;
    // Hyperplanes through the origin and dim-1 other points.
    combinations(others.len(), dim - 1, |idx| {
        let mut spanning = vec![DVector::zeros(dim)];
        spanning.extend(idx.iter().map(|&i| others[i].clone()));
        let Some(v) = normal_through(&spanning) else { return };
        any = true;
        best = best.min(split_count(pts, &v, tol));
    });
    if !any {
        // The points span less than a hyperplane; any normal orthogonal to them works.
        let mut m = DMatrix::zeros(others.len(), dim);
        for (r, p) in others.iter().enumerate() {
            m.set_row(r, &p.transpose());
        }
        let v = orth_complement_vector(&m, dim);
        best = split_count(pts, &v.normalize(), tol);
    }
    best
}

fn orth_complement_vector(m: &DMatrix<f64>, dim: usize) -> DVector<f64> {
    let mut basis: Vec<DVector<f64>> = Vec::new();
    for r in 0..m.nrows() {
        let mut v = m.row(r).transpose();
        for b in &basis {
            v -= b * b.dot(&v);
        }
        if v.norm() > 1e-12 {
            basis.push(v.normalize());
        }
    }
    for e in 0..dim {
        let mut v = DVector::zeros(dim);
        v[e] = 1.0;
        for b in &basis {
            v -= b * b.dot(&v);
        }
        if v.norm() > 1e-6 {
            return v.normalize();
        }
    }
    unreachable!("span of fewer than dim vectors has a complement")
}

/// Best closed count for hyperplanes through the origin with normal `v`,
/// allowing an infinitesimal tilt that settles the points on the hyperplane.
fn split_count(pts: &[DVector<f64>], v: &DVector<f64>, tol: f64) -> usize {
    let (mut pos, mut neg) = (0, 0);
    let mut on = Vec::new();
    let frame = complement_frame(v);
    for p in pts {
        let s = v.dot(p);
        if s > tol {
            pos += 1;
        } else if s < -tol {
            neg += 1;
        } else {
            on.push(frame.transpose() * p);
        }
    }
    let inner = closed_min(&on, tol);
    pos.min(neg) + inner
}

/// Orthonormal basis of the complement of a unit vector.
fn complement_frame(v: &DVector<f64>) -> DMatrix<f64> {
    let d = Direction::new(v.clone()).expect("unit normal");
    crate::geometry::orthobasis(&d)
}

/// Tukey depth of `point` in `data`, as a fraction of `n`.
pub fn brute_force_depth(point: &DVector<f64>, data: &DMatrix<f64>) -> Result<f64> {
    solver::check_data(data)?;
    let (n, k) = data.shape();
    if point.len() != k {
        return Err(Error::DimensionMismatch { expected: k, found: point.len() });
    }
    let tol = 1e-12 * scale_of(data);
    let pts: Vec<DVector<f64>> = (0..n).map(|i| data.row(i).transpose() - point).collect();
    Ok(closed_min(&pts, tol) as f64 / n as f64)
}

/// Largest depth level whose region is nonempty, by bisection on the oracle.
pub fn max_nonempty_level(data: &DMatrix<f64>) -> Result<usize> {
    let (n, k) = data.shape();
    let (mut lo, mut hi) = (1usize, n);
    // Invariant: level lo nonempty, level hi + 1 empty or out of range.
    if brute_force_region(data, 1)?.is_empty() {
        return Err(Error::Numerical("level-1 region (convex hull) is empty".into()));
    }
    while lo < hi {
        let mid = (lo + hi + 1) / 2;
        if brute_force_region(data, mid)?.is_empty() {
            hi = mid - 1;
        } else {
            lo = mid;
        }
    }
    let centerpoint = n.div_ceil(k + 1);
    if lo < centerpoint {
        return Err(Error::Numerical(format!("deepest level {lo} below the centerpoint bound {centerpoint}")));
    }
    Ok(lo)
}

/// Projection-quantile envelope over the given directions, as a region.
pub fn km_region(data: &DMatrix<f64>, tau: f64, dirs: &[Direction]) -> Result<DepthRegion> {
    let polytope = quantile::km_envelope(data, tau, dirs)?;
    Ok(DepthRegion { tau: Some(tau), level: None, polytope, halfspaces: Vec::new(), verified: None })
}
