//! Intersections of finitely many closed halfspaces.
//!
//! Pipeline: normalise, find a Chebyshev centre with a small LP (which also
//! decides emptiness and full-dimensionality), test boundedness, then
//! enumerate vertices. The plane uses the angular-sort half-plane algorithm;
//! higher dimensions dualise about the interior point and take a convex hull.
//! Lower-dimensional results are computed on a slightly relaxed system and
//! snapped back by least squares on the tight constraints.


use nalgebra::{DMatrix, DVector};

use super::{convex_hull, Halfspace, VERTEX_TOL};
use crate::error::{Error, Result};
use crate::linprog;

/// A facet of a polytope: a supporting closed halfspace and its vertices.
#[derive(Debug, Clone)]
pub struct Facet {
    pub normal: DVector<f64>,
    pub offset: f64,
    /// Index of the input halfspace this facet came from.
    pub source: usize,
    /// Indices into [`Polytope::vertices`].
    pub vertices: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct Polytope {
    pub dim: usize,
    /// Vertices; counter-clockwise when `dim == 2`.
    pub vertices: Vec<DVector<f64>>,
    pub facets: Vec<Facet>,
    pub empty: bool,
    /// Nonempty but lower-dimensional.
    pub degenerate: bool,
    pub unbounded: bool,
    /// Generators of the recession cone when unbounded.
    pub recession: Vec<DVector<f64>>,
    /// The normalised input system, kept for membership tests.
    pub constraints: Vec<Halfspace>,
}

impl Polytope {
    fn empty_of(dim: usize, constraints: Vec<Halfspace>) -> Self {
        Polytope {
            dim,
            vertices: Vec::new(),
            facets: Vec::new(),
            empty: true,
            degenerate: false,
            unbounded: false,
            recession: Vec::new(),
            constraints,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.empty
    }

    /// Membership in the defining system, with slack `tol`.
    pub fn contains_point(&self, x: &DVector<f64>, tol: f64) -> bool {
        !self.empty && self.constraints.iter().all(|h| h.contains(x, tol))
    }

    /// `other ⊆ self`, checked on the vertices of `other` (which must be bounded).
    pub fn contains(&self, other: &Polytope, tol: f64) -> bool {
        if other.empty {
            return true;
        }
        if self.empty {
            return false;
        }
        other.vertices.iter().all(|v| self.contains_point(v, tol))
    }

    /// Lebesgue measure for `dim` 1, 2 or 3; zero when degenerate or empty.
    pub fn measure(&self) -> f64 {
        if self.empty || self.degenerate {
            return 0.0;
        }
        if self.unbounded {
            return f64::INFINITY;
        }
        match self.dim {
            1 => {
                let xs: Vec<f64> = self.vertices.iter().map(|v| v[0]).collect();
                xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - xs.iter().cloned().fold(f64::INFINITY, f64::min)
            }
            2 => polygon_area(&self.vertices),
            3 => self.volume3(),
            _ => f64::NAN,
        }
    }

    fn volume3(&self) -> f64 {
        let centre = self.vertices.iter().fold(DVector::zeros(3), |a, v| a + v) / self.vertices.len() as f64;
        let mut vol = 0.0;
        for f in &self.facets {
            let pts: Vec<&DVector<f64>> = f.vertices.iter().map(|&i| &self.vertices[i]).collect();
            let ordered = order_on_plane(&pts, &f.normal);
            let height = f.normal.dot(&centre) - f.offset;
            vol += polygon_area_3d(&ordered, &f.normal) * height.abs() / 3.0;
        }
        vol
    }

    /// Symmetric Hausdorff distance between two bounded planar polygons.
    pub fn set_hausdorff_2d(&self, other: &Polytope) -> f64 {
        if self.empty && other.empty {
            return 0.0;
        }
        if self.empty || other.empty {
            return f64::INFINITY;
        }
        let a = self.vertices.iter().map(|v| other.distance_2d(v)).fold(0.0, f64::max);
        let b = other.vertices.iter().map(|v| self.distance_2d(v)).fold(0.0, f64::max);
        a.max(b)
    }

    /// Euclidean distance from `p` to a bounded planar polygon.
    pub fn distance_2d(&self, p: &DVector<f64>) -> f64 {
        let n = self.vertices.len();
        if n == 0 {
            return f64::INFINITY;
        }
        if self.contains_point(p, 1e-12) && !self.degenerate {
            return 0.0;
        }
        if n == 1 {
            return (p - &self.vertices[0]).norm();
        }
        (0..n)
            .map(|i| segment_distance(p, &self.vertices[i], &self.vertices[(i + 1) % n]))
            .fold(f64::INFINITY, f64::min)
    }

    /// Applies `x -> M x + d` to a bounded polytope.
    pub fn affine_image(&self, m: &DMatrix<f64>, d: &DVector<f64>) -> Result<Polytope> {
        let minv_t = m
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::InvalidInput("singular affine map".into()))?
            .transpose();
        let hs: Vec<Halfspace> = self
            .constraints
            .iter()
            .map(|h| {
                let n = &minv_t * &h.normal;
                Halfspace::new(n.clone(), h.offset + n.dot(d))
            })
            .collect();
        intersect_halfspaces(&hs, self.dim)
    }
}

fn segment_distance(p: &DVector<f64>, a: &DVector<f64>, b: &DVector<f64>) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_squared();
    if len2 == 0.0 {
        return (p - a).norm();
    }
    let t = ((p - a).dot(&ab) / len2).clamp(0.0, 1.0);
    (p - (a + ab * t)).norm()
}

pub(crate) fn polygon_area(v: &[DVector<f64>]) -> f64 {
    let n = v.len();
    if n < 3 {
        return 0.0;
    }
    let mut s = 0.0;
    for i in 0..n {
        let j = (i + 1) % n;
        s += v[i][0] * v[j][1] - v[j][0] * v[i][1];
    }
    0.5 * s.abs()
}

fn order_on_plane<'a>(pts: &[&'a DVector<f64>], normal: &DVector<f64>) -> Vec<&'a DVector<f64>> {
    let centre = pts.iter().fold(DVector::zeros(normal.len()), |a, v| a + *v) / pts.len() as f64;
    let e1 = {
        let mut e = pts[0] - &centre;
        if e.norm() < 1e-300 {
            e = DVector::from_vec(vec![1.0, 0.0, 0.0]);
        }
        e.normalize()
    };
    let e2 = cross3(normal, &e1);
    let mut out: Vec<(f64, &DVector<f64>)> = pts
        .iter()
        .map(|p| {
            let d = *p - &centre;
            (d.dot(&e2).atan2(d.dot(&e1)), *p)
        })
        .collect();
    out.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    out.into_iter().map(|x| x.1).collect()
}

fn cross3(a: &DVector<f64>, b: &DVector<f64>) -> DVector<f64> {
    DVector::from_vec(vec![
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ])
}

fn polygon_area_3d(pts: &[&DVector<f64>], normal: &DVector<f64>) -> f64 {
    let mut acc = DVector::zeros(3);
    for i in 0..pts.len() {
        let j = (i + 1) % pts.len();
        acc += cross3(pts[i], pts[j]);
    }
    0.5 * acc.dot(normal).abs()
}

/// Intersects closed halfspaces `{x : normal'x >= offset}` in `R^dim`.
///
/// Redundant inputs are dropped from the facet list; lower-dimensional
/// results carry `degenerate`, empty ones `empty`, and unbounded ones
/// `unbounded` plus recession directions (their vertex list holds only the
/// genuine vertices, if any).
pub fn intersect_halfspaces(halfspaces: &[Halfspace], dim: usize) -> Result<Polytope> {
    if dim == 0 {
        return Err(Error::InvalidInput("dimension must be positive".into()));
    }
    let mut hs = Vec::with_capacity(halfspaces.len());
    for h in halfspaces {
        if h.dim() != dim {
            return Err(Error::DimensionMismatch { expected: dim, found: h.dim() });
        }
        if h.normal.iter().any(|x| !x.is_finite()) || !h.offset.is_finite() {
            return Err(Error::InvalidInput("non-finite halfspace".into()));
        }
        match h.normalized() {
            Some(n) => hs.push(n),
            None if h.offset > 0.0 => return Ok(Polytope::empty_of(dim, Vec::new())),
            None => {}
        }
    }
    let scale = 1.0 + hs.iter().map(|h| h.offset.abs()).fold(0.0, f64::max);
    if hs.is_empty() {
        return Ok(Polytope {
            dim,
            vertices: Vec::new(),
            facets: Vec::new(),
            empty: false,
            degenerate: false,
            unbounded: true,
            recession: (0..dim)
                .flat_map(|j| {
                    let mut e = DVector::zeros(dim);
                    e[j] = 1.0;
                    [e.clone(), -e]
                })
                .collect(),
            constraints: hs,
        });
    }
    let (x0, radius) = chebyshev_centre(&hs, scale)?;
    let thin = 1e-9 * scale;
    if radius < -thin {
        return Ok(Polytope::empty_of(dim, hs));
    }
    if radius <= thin {
        return degenerate_intersection(hs, dim, scale);
    }
    full_dimensional(hs, dim, &x0, scale)
}

fn chebyshev_centre(hs: &[Halfspace], scale: f64) -> Result<(DVector<f64>, f64)> {
    let dim = hs[0].dim();
    let m = hs.len();
    let mut a = DMatrix::zeros(m + 1, dim + 1);
    let mut b = DVector::zeros(m + 1);
    for (i, h) in hs.iter().enumerate() {
        for j in 0..dim {
            a[(i, j)] = -h.normal[j];
        }
        a[(i, dim)] = 1.0;
        b[i] = -h.offset;
    }
    a[(m, dim)] = 1.0;
    b[m] = scale;
    let mut c = DVector::zeros(dim + 1);
    c[dim] = 1.0;
    let out = linprog::maximize(&c, &a, &b)?;
    Ok((out.x.rows(0, dim).into_owned(), out.x[dim]))
}

fn is_bounded(hs: &[Halfspace]) -> Result<bool> {
    let dim = hs[0].dim();
    let m = hs.len();
    let mut a = DMatrix::zeros(m, dim);
    let mut b = DVector::zeros(m);
    for (i, h) in hs.iter().enumerate() {
        for j in 0..dim {
            a[(i, j)] = -h.normal[j];
        }
        b[i] = -h.offset;
    }
    for j in 0..dim {
        for s in [1.0, -1.0] {
            let mut c = DVector::zeros(dim);
            c[j] = s;
            match linprog::maximize(&c, &a, &b) {
                Ok(_) => {}
                Err(Error::Unbounded) => return Ok(false),
                Err(e) => return Err(e),
            }
        }
    }
    Ok(true)
}

fn full_dimensional(hs: Vec<Halfspace>, dim: usize, x0: &DVector<f64>, scale: f64) -> Result<Polytope> {
    if is_bounded(&hs)? {
        let vertices = bounded_vertices(&hs, dim, x0, scale)?;
        return Ok(assemble(hs, dim, vertices, scale, false, false, Vec::new()));
    }
    let recession = recession_rays(&hs, dim)?;
    let big = 1e6 * scale;
    let mut boxed = hs.clone();
    for j in 0..dim {
        let mut e = DVector::zeros(dim);
        e[j] = 1.0;
        boxed.push(Halfspace::new(e.clone(), x0[j] - big));
        boxed.push(Halfspace::new(-e, -x0[j] - big));
    }
    let all = bounded_vertices(&boxed, dim, x0, scale)?;
    let tol = VERTEX_TOL * big;
    let vertices: Vec<DVector<f64>> = all
        .into_iter()
        .filter(|v| boxed[hs.len()..].iter().all(|h| h.slack(v).abs() > tol))
        .collect();
    Ok(assemble(hs, dim, vertices, scale, false, true, recession))
}

fn recession_rays(hs: &[Halfspace], dim: usize) -> Result<Vec<DVector<f64>>> {
    let mut cone: Vec<Halfspace> = hs.iter().map(|h| Halfspace::new(h.normal.clone(), 0.0)).collect();
    let homogeneous = cone.len();
    for j in 0..dim {
        let mut e = DVector::zeros(dim);
        e[j] = 1.0;
        cone.push(Halfspace::new(-e.clone(), -1.0));
        cone.push(Halfspace::new(e, -1.0));
    }
    let p = intersect_halfspaces(&cone, dim)?;
    let mut rays: Vec<DVector<f64>> = Vec::new();
    for v in &p.vertices {
        if v.norm() < 1e-6 {
            continue;
        }
        let tight: Vec<&DVector<f64>> = cone[..homogeneous]
            .iter()
            .filter(|h| h.normal.dot(v).abs() < 1e-8)
            .map(|h| &h.normal)
            .collect();
        let rank = if tight.is_empty() {
            0
        } else {
            DMatrix::from_columns(&tight.iter().map(|x| (*x).clone()).collect::<Vec<_>>()).rank(1e-9)
        };
        if rank + 1 >= dim {
            let r = v.normalize();
            if rays.iter().all(|q| (q - &r).norm() > 1e-8) {
                rays.push(r);
            }
        }
    }
    Ok(rays)
}

/// Vertices of a bounded, full-dimensional system with interior point `x0`.
fn bounded_vertices(hs: &[Halfspace], dim: usize, x0: &DVector<f64>, scale: f64) -> Result<Vec<DVector<f64>>> {
    let raw = match dim {
        1 => {
            let lo = hs.iter().filter(|h| h.normal[0] > 0.0).map(|h| h.offset).fold(f64::NEG_INFINITY, f64::max);
            let hi = hs.iter().filter(|h| h.normal[0] < 0.0).map(|h| -h.offset).fold(f64::INFINITY, f64::min);
            vec![DVector::from_vec(vec![lo]), DVector::from_vec(vec![hi])]
        }
        2 => halfplane_vertices(hs, x0)?,
        _ => dual_hull_vertices(hs, x0)?,
    };
    let mut out: Vec<DVector<f64>> = Vec::new();
    for v in raw {
        if !v.iter().all(|x| x.is_finite()) {
            return Err(Error::Numerical("non-finite vertex".into()));
        }
        if out.iter().all(|w| (w - &v).norm() > VERTEX_TOL * scale) {
            out.push(v);
        }
    }
    Ok(out.into_iter().map(|v| polish(hs, &v, 1e-7 * scale)).collect())
}

/// Polygon vertices via the polar dual about `x0`: each half-plane maps to
/// the point `-normal / slack(x0)`, consecutive convex-hull points of the
/// dual give adjacent edges, and each vertex is the exact intersection of
/// the two original lines. Requires a bounded system with interior point `x0`.
fn halfplane_vertices(hs: &[Halfspace], x0: &DVector<f64>) -> Result<Vec<DVector<f64>>> {
    let mut dual: Vec<(f64, f64, usize)> = hs
        .iter()
        .enumerate()
        .map(|(i, h)| {
            let s = h.slack(x0);
            (-h.normal[0] / s, -h.normal[1] / s, i)
        })
        .collect();
    dual.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.partial_cmp(&b.1).unwrap()));
    let cross = |o: &(f64, f64, usize), a: &(f64, f64, usize), b: &(f64, f64, usize)| {
        (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
    };
    // Andrew's monotone chain, counter-clockwise, collinear points dropped.
    let mut hull: Vec<(f64, f64, usize)> = Vec::with_capacity(2 * dual.len());
    for pass in 0..2 {
        let floor = hull.len();
        let points: Box<dyn Iterator<Item = &(f64, f64, usize)>> =
            if pass == 0 { Box::new(dual.iter()) } else { Box::new(dual.iter().rev()) };
        for p in points {
            while hull.len() >= floor + 2 && cross(&hull[hull.len() - 2], &hull[hull.len() - 1], p) <= 0.0 {
                hull.pop();
            }
            hull.push(*p);
        }
        hull.pop();
    }
    if hull.len() < 3 {
        return Err(Error::Numerical("half-plane dual hull collapsed".into()));
    }
    let n = hull.len();
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let (p, q) = (&hs[hull[i].2], &hs[hull[(i + 1) % n].2]);
        let det = p.normal[0] * q.normal[1] - p.normal[1] * q.normal[0];
        if det.abs() < 1e-14 {
            return Err(Error::Numerical("parallel half-planes adjacent on the dual hull".into()));
        }
        out.push(DVector::from_vec(vec![
            (p.offset * q.normal[1] - p.normal[1] * q.offset) / det,
            (p.normal[0] * q.offset - p.offset * q.normal[0]) / det,
        ]));
    }
    Ok(out)
}

/// Polar dual about `x0`, convex hull, and back.
fn dual_hull_vertices(hs: &[Halfspace], x0: &DVector<f64>) -> Result<Vec<DVector<f64>>> {
    let pts: Vec<DVector<f64>> = hs
        .iter()
        .map(|h| {
            let slack = h.slack(x0);
            -&h.normal / slack
        })
        .collect();
    let facets = convex_hull(&pts)?;
    Ok(facets
        .into_iter()
        .map(|f| x0 + &f.normal / f.offset)
        .collect())
}

/// Least-squares snap of `v` onto the constraints it makes tight.
fn polish(hs: &[Halfspace], v: &DVector<f64>, tol: f64) -> DVector<f64> {
    let dim = v.len();
    let tight: Vec<&Halfspace> = hs.iter().filter(|h| h.slack(v).abs() <= tol).collect();
    if tight.len() < dim {
        return v.clone();
    }
    let mut a = DMatrix::zeros(tight.len(), dim);
    let mut b = DVector::zeros(tight.len());
    for (i, h) in tight.iter().enumerate() {
        a.row_mut(i).copy_from(&h.normal.transpose());
        b[i] = h.offset;
    }
    let svd = a.svd(true, true);
    if svd.singular_values.iter().filter(|s| **s > 1e-9).count() < dim {
        return v.clone();
    }
    match svd.solve(&b, 1e-12) {
        Ok(x) if (&x - v).norm() <= 10.0 * tol => x,
        _ => v.clone(),
    }
}

fn assemble(
    hs: Vec<Halfspace>,
    dim: usize,
    mut vertices: Vec<DVector<f64>>,
    scale: f64,
    degenerate: bool,
    unbounded: bool,
    recession: Vec<DVector<f64>>,
) -> Polytope {
    if dim == 2 && vertices.len() > 2 {
        let c = vertices.iter().fold(DVector::zeros(2), |a, v| a + v) / vertices.len() as f64;
        vertices.sort_by(|p, q| {
            let ap = (p[1] - c[1]).atan2(p[0] - c[0]);
            let aq = (q[1] - c[1]).atan2(q[0] - c[0]);
            ap.partial_cmp(&aq).unwrap()
        });
    }
    let tol = VERTEX_TOL * scale;
    let mut facets: Vec<Facet> = Vec::new();
    for (i, h) in hs.iter().enumerate() {
        let on: Vec<usize> = (0..vertices.len()).filter(|&j| h.slack(&vertices[j]).abs() <= tol).collect();
        let spans = if degenerate {
            !on.is_empty()
        } else if unbounded {
            // Facets of unbounded regions may carry fewer vertices.
            true
        } else {
            affine_rank(&vertices, &on) + 1 >= dim
        };
        if !spans || (on.is_empty() && !unbounded) {
            continue;
        }
        let duplicate = facets
            .iter()
            .any(|f| (&f.normal - &h.normal).norm() < 1e-9 && (f.offset - h.offset).abs() < tol);
        if !duplicate {
            facets.push(Facet { normal: h.normal.clone(), offset: h.offset, source: i, vertices: on });
        }
    }
    if unbounded {
        facets.retain(|f| {
            // Keep constraints that are tight somewhere on the region: either at
            // a vertex or along a recession ray from the boundary.
            !f.vertices.is_empty() || recession.iter().any(|r| f.normal.dot(r).abs() < 1e-9)
        });
    }
    Polytope { dim, vertices, facets, empty: false, degenerate, unbounded, recession, constraints: hs }
}

fn affine_rank(vertices: &[DVector<f64>], idx: &[usize]) -> usize {
    if idx.len() < 2 {
        return 0;
    }
    let base = &vertices[idx[0]];
    let cols: Vec<DVector<f64>> = idx[1..].iter().map(|&i| &vertices[i] - base).collect();
    DMatrix::from_columns(&cols).rank(1e-9)
}

fn degenerate_intersection(hs: Vec<Halfspace>, dim: usize, scale: f64) -> Result<Polytope> {
    let delta = 1e-7 * scale;
    let relaxed: Vec<Halfspace> = hs.iter().map(|h| Halfspace::new(h.normal.clone(), h.offset - delta)).collect();
    let (x0, radius) = chebyshev_centre(&relaxed, scale)?;
    if radius <= 0.0 {
        return Err(Error::Numerical("relaxed degenerate system has no interior".into()));
    }
    let inner = full_dimensional(relaxed, dim, &x0, scale)?;
    let radius_cluster = 1e3 * delta;
    let mut clusters: Vec<(DVector<f64>, usize)> = Vec::new();
    for v in &inner.vertices {
        match clusters.iter_mut().find(|(c, n)| (c / *n as f64 - v).norm() <= radius_cluster) {
            Some((c, n)) => {
                *c += v;
                *n += 1;
            }
            None => clusters.push((v.clone(), 1)),
        }
    }
    let mut vertices: Vec<DVector<f64>> = Vec::new();
    for (c, n) in clusters {
        let v = polish(&hs, &(c / n as f64), radius_cluster);
        if vertices.iter().all(|w| (w - &v).norm() > VERTEX_TOL * scale) {
            vertices.push(v);
        }
    }
    Ok(assemble(hs, dim, vertices, scale, true, inner.unbounded, inner.recession))
}
