//! Parametric sweep over directions at fixed `tau`.
//!
//! For a fixed level the optimal basis is constant on finitely many
//! polyhedral cones of direction space. Inside a cone every quantity is a
//! closed-form function of `u`: with `t` the unit normal of the hyperplane
//! through the basis points (oriented so that `t'u > 0`) and `a_h` its
//! offset, the fit is `(a_h, t) / t'u`, the minimised loss is
//! `lambda_h / t'u`, and the basic dual weights are `V u / t'u`. Requiring
//! those weights to stay in `[-tau, 1 - tau]` gives the homogeneous
//! constraints that carve out the cone.
//!
//! Directions may be restricted to a linear subspace (used for regression):
//! `u = E y` with `E` having orthonormal columns, and all cone geometry is
//! then expressed in `y` coordinates.

use std::collections::{HashMap, VecDeque};
use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::geometry::{intersect_halfspaces, orthobasis, Direction, Halfspace, Hyperplane};
use crate::solver::{self, Solution, SolveOptions};

/// Step across a cone facet when probing for the neighbour.
pub const FACET_STEP: f64 = 1e-7;
/// Normalised hyperplanes closer than this are the same hyperplane.
pub const DEDUP_TOL: f64 = 1e-8;
const CLOSURE_TOL: f64 = 1e-9;

/// Identifies a cone: sorted basis plus the side of the first non-basic
/// observation (the two orientations of one hyperplane give distinct cones).
pub type ConeKey = (Vec<usize>, bool);

#[derive(Debug, Clone)]
pub struct Cone {
    pub basis: Vec<usize>,
    /// True when the smallest non-basic observation lies above the hyperplane.
    pub first_above: bool,
    /// Unit normal of the hyperplane through the basis points, full space.
    pub normal: DVector<f64>,
    /// Offset with respect to `normal`.
    pub offset: f64,
    /// Mean check loss of the residuals `normal'Z_i - offset`.
    pub loss: f64,
    /// Rows map `u` to `t'u` times the basic dual weights.
    pub basic_weights: DMatrix<f64>,
    /// Non-basic dual weights (zero on the basis).
    pub fixed_mu: DVector<f64>,
    /// Observations strictly below the hyperplane.
    pub cut_off: usize,
    /// `E't`, the positivity axis in subspace coordinates.
    pub axis: DVector<f64>,
    /// Homogeneous constraints `g'y >= 0` in subspace coordinates.
    pub constraints: Vec<DVector<f64>>,
    /// Unit extreme rays (subspace coordinates); cyclic order when the
    /// subspace has dimension 3.
    pub rays: Vec<DVector<f64>>,
    /// A unit direction strictly inside the cone.
    pub center: DVector<f64>,
    /// Arc length (2-d), solid angle (3-d), 1 for a single ray (1-d);
    /// `None` in higher dimensions.
    pub measure: Option<f64>,
    /// Indices of cones sharing a facet.
    pub neighbors: Vec<usize>,
    /// Facets of the section `{axis'y = 1}`: (constraint index, section vertices).
    facets: Vec<(usize, Vec<usize>)>,
    section_vertices: Vec<DVector<f64>>,
    section_basis: DMatrix<f64>,
}

impl Cone {
    pub fn key(&self) -> ConeKey {
        (self.basis.clone(), self.first_above)
    }

    pub fn hyperplane(&self) -> Hyperplane {
        Hyperplane::new(self.normal.clone(), self.offset)
    }

    /// Strict interior test for a subspace direction.
    pub fn contains(&self, y: &DVector<f64>, tol: f64) -> bool {
        let ny = y.norm();
        if self.axis.dot(y) <= tol * ny {
            return false;
        }
        self.constraints.iter().all(|g| {
            let gn = g.norm();
            gn < 1e-14 || g.dot(y) > tol * gn * ny
        })
    }

    /// Closure test for a subspace direction.
    fn closure_contains(&self, y: &DVector<f64>) -> bool {
        let ny = y.norm();
        self.axis.dot(y) > 0.0
            && self
                .constraints
                .iter()
                .all(|g| g.dot(y) >= -CLOSURE_TOL * g.norm().max(1.0) * ny)
    }

    /// Angular interval `[lo, hi]` (counter-clockwise, `hi > lo`) of a planar cone.
    pub fn angular_interval(&self) -> Option<(f64, f64)> {
        if self.rays.len() != 2 || self.rays[0].len() != 2 {
            return None;
        }
        let ang = |v: &DVector<f64>| v[1].atan2(v[0]);
        let (r0, r1) = (&self.rays[0], &self.rays[1]);
        let cross = r0[0] * r1[1] - r0[1] * r1[0];
        let (lo, hi) = if cross > 0.0 { (ang(r0), ang(r1)) } else { (ang(r1), ang(r0)) };
        let hi = if hi < lo { hi + 2.0 * PI } else { hi };
        Some((lo, hi))
    }
}

/// One quantile hyperplane of the sweep with its unit normal.
#[derive(Debug, Clone)]
pub struct SweptHyperplane {
    pub normal: DVector<f64>,
    pub offset: f64,
    pub cut_off: usize,
    pub basis: Vec<usize>,
    pub cones: Vec<usize>,
}

impl SweptHyperplane {
    pub fn upper(&self) -> Halfspace {
        Halfspace::new(self.normal.clone(), self.offset)
    }
}

#[derive(Debug, Clone)]
pub struct SweepResult {
    pub tau: f64,
    pub n: usize,
    /// Direction embedding `E` (identity for location).
    pub embedding: DMatrix<f64>,
    /// Cones; counter-clockwise for a planar direction space.
    pub cones: Vec<Cone>,
    pub hyperplanes: Vec<SweptHyperplane>,
}

impl SweepResult {
    pub fn direction_dim(&self) -> usize {
        self.embedding.ncols()
    }

    /// Sum of cone measures, when every cone has one.
    pub fn total_measure(&self) -> Option<f64> {
        self.cones.iter().map(|c| c.measure).sum()
    }

    /// Index of the cone strictly containing a subspace direction.
    pub fn locate(&self, y: &DVector<f64>) -> Option<usize> {
        self.cones.iter().position(|c| c.contains(y, 1e-12))
    }

    /// Full-space direction for subspace coordinates `y`.
    pub fn embed(&self, y: &DVector<f64>) -> DVector<f64> {
        &self.embedding * y
    }
}

/// Full sweep over the unit sphere.
pub fn sweep(data: &DMatrix<f64>, tau: f64) -> Result<SweepResult> {
    let k = data.ncols();
    sweep_subspace(data, tau, &DMatrix::identity(k, k))
}

/// Sweep over unit directions `E y`; `E` must have orthonormal columns.
pub fn sweep_subspace(data: &DMatrix<f64>, tau: f64, embedding: &DMatrix<f64>) -> Result<SweepResult> {
    solver::check_data(data)?;
    let (n, k) = data.shape();
    if embedding.nrows() != k || embedding.ncols() == 0 || embedding.ncols() > k {
        return Err(Error::DimensionMismatch { expected: k, found: embedding.nrows() });
    }
    if (embedding.transpose() * embedding - DMatrix::identity(embedding.ncols(), embedding.ncols())).amax() > 1e-10 {
        return Err(Error::InvalidInput("direction embedding must have orthonormal columns".into()));
    }
    if !(tau > 0.0 && tau < 1.0) {
        return Err(Error::InvalidTau(tau));
    }
    if solver::is_integer_level(n, tau) {
        return Err(Error::Nonunique(n as f64 * tau));
    }
    let mut ctx = Sweeper { data, tau, embedding, cones: Vec::new(), index: HashMap::new() };
    match embedding.ncols() {
        1 => ctx.rays()?,
        2 => ctx.circle()?,
        _ => ctx.bfs()?,
    }
    let hyperplanes = dedup_hyperplanes(&ctx.cones);
    Ok(SweepResult { tau, n, embedding: embedding.clone(), cones: ctx.cones, hyperplanes })
}

struct Sweeper<'a> {
    data: &'a DMatrix<f64>,
    tau: f64,
    embedding: &'a DMatrix<f64>,
    cones: Vec<Cone>,
    index: HashMap<ConeKey, usize>,
}

impl Sweeper<'_> {
    fn cap(&self) -> usize {
        let (n, k) = self.data.shape();
        // Two orientations per k-subset, loosely bounded.
        let mut c: f64 = 1.0;
        for i in 0..k {
            c *= (n - i) as f64 / (i + 1) as f64;
        }
        (2.0 * c).min(1e7) as usize + 8
    }

    fn solve_at(&self, y: &DVector<f64>, start: Option<&[usize]>) -> Result<Solution> {
        let u = Direction::new(self.embedding * y)?;
        let warm = SolveOptions { start: start.map(|s| s.to_vec()), ..Default::default() };
        match solver::solve(self.data, self.tau, &u, &warm) {
            Ok(s) => Ok(s),
            Err(_) if start.is_some() => solver::solve(self.data, self.tau, &u, &SolveOptions::default()),
            Err(e) => Err(e),
        }
    }

    fn cone_at(&self, y: &DVector<f64>, start: Option<&[usize]>) -> Result<Cone> {
        let sol = self.solve_at(y, start)?;
        if sol.nonunique {
            return Err(Error::Degeneracy(sol.basis));
        }
        build_cone(self.data, self.tau, self.embedding, &sol)
    }

    fn insert(&mut self, cone: Cone) -> (usize, bool) {
        let key = cone.key();
        if let Some(&i) = self.index.get(&key) {
            return (i, false);
        }
        let i = self.cones.len();
        self.index.insert(key, i);
        self.cones.push(cone);
        (i, true)
    }

    /// Neighbour across the facet through `y_face` with constraint `g`.
    fn cross(&self, from: usize, y_face: &DVector<f64>, g: &DVector<f64>) -> Result<Cone> {
        let current = &self.cones[from];
        let yf = y_face.normalize();
        let step_dir = -g / g.norm();
        let mut eps = FACET_STEP;
        while eps >= 1e-12 {
            let probe = (&yf + &step_dir * eps).normalize();
            if let Ok(next) = self.cone_at(&probe, Some(&current.basis)) {
                if next.key() != current.key() && next.closure_contains(&yf) {
                    return Ok(next);
                }
            }
            eps *= 0.01;
        }
        let u = self.embedding * yf;
        Err(Error::Numerical(format!("cannot cross cone facet at direction {:?}", u.as_slice())))
    }

    /// One-dimensional direction space: the two rays `+1` and `-1`.
    fn rays(&mut self) -> Result<()> {
        for s in [1.0, -1.0] {
            let y = DVector::from_element(1, s);
            let cone = self.cone_at(&y, None)?;
            self.insert(cone);
        }
        Ok(())
    }

    /// Counter-clockwise walk around the circle.
    fn circle(&mut self) -> Result<()> {
        let start = DVector::from_vec(vec![0.3_f64.cos(), 0.3_f64.sin()]);
        let first = self.cone_at(&start, None)?;
        let (mut cur, _) = self.insert(first);
        let cap = self.cap();
        loop {
            if self.cones.len() > cap {
                return Err(Error::Numerical(format!("sweep exceeded {cap} cones; partial result discarded")));
            }
            let c = &self.cones[cur];
            let (_, hi) = c.angular_interval().ok_or_else(|| Error::Numerical("planar cone without two rays".into()))?;
            let hi_ray = DVector::from_vec(vec![hi.cos(), hi.sin()]);
            // The facet at the counter-clockwise end: the constraint tight there.
            let g = c
                .constraints
                .iter()
                .filter(|g| g.norm() > 1e-14)
                .min_by(|a, b| {
                    (a.dot(&hi_ray) / a.norm()).abs().partial_cmp(&(b.dot(&hi_ray) / b.norm()).abs()).unwrap()
                })
                .cloned()
                .ok_or_else(|| Error::Numerical("planar cone without constraints".into()))?;
            let next = self.cross(cur, &hi_ray, &g)?;
            let (j, fresh) = self.insert(next);
            link(&mut self.cones, cur, j);
            if !fresh {
                if j != 0 {
                    return Err(Error::Numerical("angular sweep revisited a cone out of order".into()));
                }
                break;
            }
            cur = j;
        }
        Ok(())
    }

    /// Breadth-first search over facet-adjacent cones.
    fn bfs(&mut self) -> Result<()> {
        let m = self.embedding.ncols();
        let mut seed = DVector::from_fn(m, |i, _| 1.0 + 0.37 * i as f64 + 0.011 * (i * i) as f64);
        seed.normalize_mut();
        let first = self.cone_at(&seed, None)?;
        let (root, _) = self.insert(first);
        let mut queue = VecDeque::from([root]);
        let cap = self.cap();
        while let Some(ci) = queue.pop_front() {
            if self.cones.len() > cap {
                return Err(Error::Numerical(format!("sweep exceeded {cap} cones; partial result discarded")));
            }
            let facets = self.cones[ci].facets.clone();
            for (src, verts) in facets {
                let g = self.cones[ci].constraints[src].clone();
                let lift = |w: &DVector<f64>| {
                    let c = &self.cones[ci];
                    &c.axis / c.axis.norm_squared() + &c.section_basis * w
                };
                let pts: Vec<DVector<f64>> = verts.iter().map(|&v| self.cones[ci].section_vertices[v].clone()).collect();
                let centroid = pts.iter().fold(DVector::zeros(m - 1), |acc, p| acc + p) / pts.len() as f64;
                let mut probes = vec![lift(&centroid)];
                for p in &pts {
                    probes.push(lift(&(p * 0.9 + &centroid * 0.1)));
                }
                let face_rays: Vec<DVector<f64>> = pts.iter().map(|p| lift(p)).collect();
                for (pi, probe) in probes.iter().enumerate() {
                    let next = self.cross(ci, probe, &g)?;
                    let covers_face = face_rays.iter().all(|r| next.closure_contains(r));
                    let (j, fresh) = self.insert(next);
                    link(&mut self.cones, ci, j);
                    if fresh {
                        queue.push_back(j);
                    }
                    // A neighbour holding the whole facet makes the remaining probes redundant.
                    if pi == 0 && covers_face {
                        break;
                    }
                }
            }
        }
        if m == 3 {
            let total: f64 = self.cones.iter().filter_map(|c| c.measure).sum();
            if (total - 4.0 * PI).abs() > 1e-6 {
                return Err(Error::Numerical(format!("cones cover solid angle {total} instead of 4 pi")));
            }
        }
        Ok(())
    }
}

fn link(cones: &mut [Cone], i: usize, j: usize) {
    if i == j {
        return;
    }
    if !cones[i].neighbors.contains(&j) {
        cones[i].neighbors.push(j);
    }
    if !cones[j].neighbors.contains(&i) {
        cones[j].neighbors.push(i);
    }
}

fn rho(tau: f64, r: f64) -> f64 {
    if r < 0.0 {
        (tau - 1.0) * r
    } else {
        tau * r
    }
}

/// Closed-form cone of the basis optimal in `sol`.
pub fn build_cone(data: &DMatrix<f64>, tau: f64, embedding: &DMatrix<f64>, sol: &Solution) -> Result<Cone> {
    let (n, k) = data.shape();
    let m = embedding.ncols();
    let basis = sol.basis.clone();
    let scale = sol.c.norm();
    let t = &sol.c / scale;
    let a_h = sol.a / scale;
    let mut in_basis = vec![false; n];
    for &j in &basis {
        in_basis[j] = true;
    }
    let mut fixed_mu = DVector::zeros(n);
    let mut loss = 0.0;
    let mut cut_off = 0;
    let mut first_above = None;
    // R = -sum over non-basic of mu_l (1, Z_l).
    let mut r: DVector<f64> = DVector::zeros(k + 1);
    for l in 0..n {
        if in_basis[l] {
            continue;
        }
        let z = data.row(l).transpose();
        let res = t.dot(&z) - a_h;
        if first_above.is_none() {
            first_above = Some(res > 0.0);
        }
        let mu = if res < 0.0 {
            cut_off += 1;
            1.0 - tau
        } else {
            -tau
        };
        fixed_mu[l] = mu;
        loss += rho(tau, res);
        r[0] -= mu;
        for d in 0..k {
            r[d + 1] -= mu * z[d];
        }
    }
    let loss = loss / n as f64;
    let mut a_mat = DMatrix::zeros(k + 1, k);
    for (col, &j) in basis.iter().enumerate() {
        a_mat[(0, col)] = 1.0;
        for d in 0..k {
            a_mat[(d + 1, col)] = data[(j, d)];
        }
    }
    let mut rhs: DMatrix<f64> = &r * t.transpose();
    for d in 0..k {
        rhs[(d + 1, d)] -= n as f64 * loss;
    }
    let basic_weights = a_mat
        .svd(true, true)
        .solve(&rhs, 1e-14)
        .map_err(|e| Error::Numerical(format!("basic weight system: {e}")))?;

    let et = embedding.transpose();
    let axis = &et * &t;
    if axis.norm() < 1e-12 {
        return Err(Error::Numerical("cone axis orthogonal to the direction subspace".into()));
    }
    let mut constraints = Vec::with_capacity(2 * k);
    for j in 0..k {
        let v = basic_weights.row(j).transpose();
        constraints.push(&et * (&v + &t * tau));
        constraints.push(&et * (&t * (1.0 - tau) - &v));
    }

    let y0 = et.clone() * &sol.u;
    let mut cone = Cone {
        basis,
        first_above: first_above.unwrap_or(false),
        normal: t,
        offset: a_h,
        loss,
        basic_weights,
        fixed_mu,
        cut_off,
        axis,
        constraints,
        rays: Vec::new(),
        center: y0.normalize(),
        measure: None,
        neighbors: Vec::new(),
        facets: Vec::new(),
        section_vertices: Vec::new(),
        section_basis: DMatrix::zeros(m, m.saturating_sub(1)),
    };
    if m == 1 {
        cone.rays = vec![cone.center.clone()];
        cone.measure = Some(1.0);
        return Ok(cone);
    }
    // Section {axis'y = 1}: y = axis/|axis|^2 + Q w.
    let axis_dir = Direction::new(cone.axis.clone())?;
    let q = orthobasis(&axis_dir);
    let base = &cone.axis / cone.axis.norm_squared();
    let hs: Vec<Halfspace> = cone
        .constraints
        .iter()
        .map(|g| Halfspace::new(q.transpose() * g, -g.dot(&base)))
        .collect();
    if m == 2 {
        // The section is an interval; kept exact so that slivers far thinner
        // than the polytope tolerances still tile the circle.
        let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
        for h in &hs {
            let (g, b) = (h.normal[0], h.offset);
            if g > 0.0 {
                lo = lo.max(b / g);
            } else if g < 0.0 {
                hi = hi.min(b / g);
            } else if b > 0.0 {
                return Err(Error::Degeneracy(cone.basis.clone()));
            }
        }
        if !(lo.is_finite() && hi.is_finite()) {
            return Err(Error::Numerical("cone section unbounded".into()));
        }
        if hi <= lo {
            return Err(Error::Degeneracy(cone.basis.clone()));
        }
        cone.rays = [lo, hi].iter().map(|&w| (&base + q.column(0) * w).normalize()).collect();
        cone.center = (&base + q.column(0) * (0.5 * (lo + hi))).normalize();
        let (a, b) = (&cone.rays[0], &cone.rays[1]);
        cone.measure = Some((a[0] * b[1] - a[1] * b[0]).abs().atan2(a.dot(b)));
        cone.section_vertices = vec![DVector::from_element(1, lo), DVector::from_element(1, hi)];
        cone.section_basis = q;
        return Ok(cone);
    }
    let section = intersect_halfspaces(&hs, m - 1)?;
    if section.empty || section.degenerate || section.vertices.len() < m {
        return Err(Error::Degeneracy(cone.basis.clone()));
    }
    if section.unbounded {
        return Err(Error::Numerical("cone section unbounded".into()));
    }
    cone.rays = section.vertices.iter().map(|w| (&base + &q * w).normalize()).collect();
    let centroid = section.vertices.iter().fold(DVector::zeros(m - 1), |acc, w| acc + w) / section.vertices.len() as f64;
    cone.center = (&base + &q * centroid).normalize();
    cone.measure = match m {
        3 => Some(spherical_polygon_area(&cone.center, &cone.rays)),
        _ => None,
    };
    cone.facets = section.facets.iter().map(|f| (f.source, f.vertices.clone())).collect();
    cone.section_vertices = section.vertices;
    cone.section_basis = q;
    Ok(cone)
}

/// Solid angle of a spherical polygon given by cyclically ordered unit rays,
/// fanned from an interior unit direction.
fn spherical_polygon_area(center: &DVector<f64>, rays: &[DVector<f64>]) -> f64 {
    (0..rays.len())
        .map(|i| spherical_triangle_area(center, &rays[i], &rays[(i + 1) % rays.len()]))
        .sum()
}

/// Solid angle of the spherical triangle with unit vertices `a, b, c`.
pub(crate) fn spherical_triangle_area(a: &DVector<f64>, b: &DVector<f64>, c: &DVector<f64>) -> f64 {
    let triple = a.dot(&cross3(b, c));
    let denom = 1.0 + a.dot(b) + b.dot(c) + c.dot(a);
    2.0 * triple.abs().atan2(denom)
}

fn cross3(a: &DVector<f64>, b: &DVector<f64>) -> DVector<f64> {
    DVector::from_vec(vec![a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]])
}

fn dedup_hyperplanes(cones: &[Cone]) -> Vec<SweptHyperplane> {
    let mut out: Vec<SweptHyperplane> = Vec::new();
    // Offsets bucketed at the tolerance: matches lie in adjacent buckets.
    let mut buckets: HashMap<i64, Vec<usize>> = HashMap::new();
    for (ci, c) in cones.iter().enumerate() {
        let q = (c.offset / DEDUP_TOL).floor() as i64;
        let hit = (q - 1..=q + 1)
            .filter_map(|b| buckets.get(&b))
            .flatten()
            .copied()
            .filter(|&h| (&out[h].normal - &c.normal).amax() < DEDUP_TOL && (out[h].offset - c.offset).abs() < DEDUP_TOL)
            .min();
        match hit {
            Some(h) => out[h].cones.push(ci),
            None => {
                buckets.entry(q).or_default().push(out.len());
                out.push(SweptHyperplane {
                    normal: c.normal.clone(),
                    offset: c.offset,
                    cut_off: c.cut_off,
                    basis: c.basis.clone(),
                    cones: vec![ci],
                });
            }
        }
    }
    out
}

/// Closed-form fit for a subspace direction strictly inside `cone`.
pub fn evaluate_in_cone(sweep: &SweepResult, cone: &Cone, y: &DVector<f64>, data: &DMatrix<f64>) -> Result<Solution> {
    if y.len() != sweep.direction_dim() {
        return Err(Error::DimensionMismatch { expected: sweep.direction_dim(), found: y.len() });
    }
    if !cone.contains(y, 1e-12) {
        return Err(Error::WrongCone);
    }
    let u = sweep.embed(&y.normalize());
    let tu = cone.normal.dot(&u);
    let n = sweep.n;
    let tau = sweep.tau;
    let c = &cone.normal / tu;
    let a = cone.offset / tu;
    let gamma = orthobasis(&Direction::new(u.clone())?);
    let b = -(gamma.transpose() * &c);
    let mut mu = cone.fixed_mu.clone();
    let xi = &cone.basic_weights * &u / tu;
    for (r, &j) in cone.basis.iter().enumerate() {
        mu[j] = xi[r];
    }
    let mut residuals = DVector::zeros(n);
    let mut objective = 0.0;
    let (mut n_neg, mut n_pos) = (0, 0);
    for i in 0..n {
        if cone.basis.contains(&i) {
            continue;
        }
        let r = data.row(i).transpose().dot(&c) - a;
        residuals[i] = r;
        objective += rho(tau, r);
        if r < 0.0 {
            n_neg += 1;
        } else {
            n_pos += 1;
        }
    }
    let lambda = cone.loss / tu;
    Ok(Solution {
        tau,
        u,
        gamma,
        a,
        b,
        c,
        residuals,
        objective,
        mu,
        lambda_d: n as f64 * lambda,
        lambda,
        basis: cone.basis.clone(),
        xi,
        n_neg,
        n_pos,
        n_zero: cone.basis.len(),
        nonunique: false,
        jittered: false,
        iterations: 0,
    })
}

/// Ratio `g1 / g2` of two functions of `(lambda, a, c)` with equal degree of
/// homogeneity; constant on each cone. `None` where `g2` vanishes.
pub fn piecewise_statistic(
    sweep: &SweepResult,
    g1: impl Fn(f64, f64, &DVector<f64>) -> f64,
    g2: impl Fn(f64, f64, &DVector<f64>) -> f64,
) -> Vec<Option<f64>> {
    sweep
        .cones
        .iter()
        .map(|c| {
            let den = g2(c.loss, c.offset, &c.normal);
            if den.abs() < 1e-300 || !den.is_finite() {
                None
            } else {
                Some(g1(c.loss, c.offset, &c.normal) / den)
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sq4() -> DMatrix<f64> {
        DMatrix::from_row_slice(4, 2, &[-0.5, -0.5, 0.5, -0.5, 0.5, 0.5, -0.5, 0.5])
    }

    #[test]
    fn square_has_four_edge_cones() {
        let s = sweep(&sq4(), 0.2).unwrap();
        assert_eq!(s.cones.len(), 4);
        assert_eq!(s.hyperplanes.len(), 4);
        for h in &s.hyperplanes {
            assert!((h.offset + 0.5).abs() < 1e-12);
            assert_eq!(h.cut_off, 0);
            assert!((h.normal.amax() - 1.0).abs() < 1e-12 || (h.normal.amin() + 1.0).abs() < 1e-12);
        }
        let total = s.total_measure().unwrap();
        assert!((total - 2.0 * PI).abs() < 1e-12);
        // Each cone is a quadrant rotated by 45 degrees.
        for c in &s.cones {
            assert!((c.measure.unwrap() - PI / 2.0).abs() < 1e-9);
        }
    }

    #[test]
    fn bottom_edge_cone_evaluation() {
        let z = sq4();
        let s = sweep(&z, 0.2).unwrap();
        let y = DVector::from_vec(vec![0.0, 1.0]);
        let ci = s.locate(&y).unwrap();
        let f = evaluate_in_cone(&s, &s.cones[ci], &y, &z).unwrap();
        assert!((f.a + 0.5).abs() < 1e-12);
        assert!(f.c[0].abs() < 1e-12 && (f.c[1] - 1.0).abs() < 1e-12);
        let y2 = DVector::from_vec(vec![0.1, 0.995]).normalize();
        let g = evaluate_in_cone(&s, &s.cones[ci], &y2, &z).unwrap();
        assert!((g.u.dot(&g.c) - 1.0).abs() < 1e-12);
        let ratio = g.a / g.c[1];
        assert!((ratio + 0.5).abs() < 1e-12 && g.c[0].abs() < 1e-12);
        // Cone boundary directions are rejected.
        let edge = DVector::from_vec(vec![1.0, 1.0]).normalize();
        assert!(matches!(evaluate_in_cone(&s, &s.cones[ci], &edge, &z), Err(Error::WrongCone)));
    }

    #[test]
    fn loss_over_norm_is_symmetric_on_square() {
        let s = sweep(&sq4(), 0.2).unwrap();
        let vals = piecewise_statistic(&s, |l, _, _| l, |_, _, c| c.norm());
        let v0 = vals[0].unwrap();
        assert!(vals.iter().all(|v| (v.unwrap() - v0).abs() < 1e-12));
        let ones = piecewise_statistic(&s, |l, _, _| l, |l, _, _| l);
        assert!(ones.iter().all(|v| (v.unwrap() - 1.0).abs() < 1e-15));
    }
}
