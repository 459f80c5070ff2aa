//! Multiple-output regression quantiles.
//!
//! Observations are assembled as `Z = (W, Y)` with the regressors first.
//! Directions live in the response subspace only: `u = (0, u_y)`, and the
//! complement is block diagonal, identity on the regressors. Fixing the
//! regressor value `w` turns each regression quantile halfspace into a
//! halfspace of response space; their intersection is a cut of the
//! regression quantile tube.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal, Uniform};

use crate::error::{Error, Result};
use crate::geometry::{intersect_halfspaces, orthobasis, Direction, Halfspace, Polytope};
use crate::solver::{self, Solution, SolveOptions};
use crate::sweep::{self, SweepResult};

/// Column roles in a data matrix; an intercept is always included.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegressionSpec {
    pub responses: Vec<usize>,
    pub regressors: Vec<usize>,
}

impl RegressionSpec {
    pub fn new(responses: Vec<usize>, regressors: Vec<usize>) -> Result<Self> {
        if responses.is_empty() {
            return Err(Error::InvalidInput("at least one response column is required".into()));
        }
        let mut all: Vec<usize> = responses.iter().chain(&regressors).cloned().collect();
        all.sort_unstable();
        if all.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidInput("response and regressor columns must be distinct".into()));
        }
        Ok(RegressionSpec { responses, regressors })
    }

    /// Number of responses `m`.
    pub fn m(&self) -> usize {
        self.responses.len()
    }

    /// Number of non-constant regressors `p - 1`.
    pub fn q(&self) -> usize {
        self.regressors.len()
    }

    /// `Z = (W, Y)`, checked for column range and regressor rank.
    pub fn assemble(&self, data: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        let ncols = data.ncols();
        if let Some(&bad) = self.responses.iter().chain(&self.regressors).find(|&&c| c >= ncols) {
            return Err(Error::InvalidInput(format!("column {bad} out of range (data has {ncols})")));
        }
        let n = data.nrows();
        let order: Vec<usize> = self.regressors.iter().chain(&self.responses).cloned().collect();
        let z = DMatrix::from_fn(n, order.len(), |i, j| data[(i, order[j])]);
        if self.q() > 0 {
            let x = DMatrix::from_fn(n, self.q() + 1, |i, j| if j == 0 { 1.0 } else { z[(i, j - 1)] });
            let sv = x.singular_values();
            if sv.min() <= 1e-10 * sv.max() {
                return Err(Error::SingularDesign("regressors with intercept are rank deficient".into()));
            }
        }
        Ok(z)
    }

    /// Embedding of response directions into `Z` space.
    pub fn embedding(&self) -> DMatrix<f64> {
        let (q, m) = (self.q(), self.m());
        DMatrix::from_fn(q + m, m, |i, j| if i == q + j { 1.0 } else { 0.0 })
    }
}

/// A regression quantile for one response direction.
#[derive(Debug, Clone)]
pub struct RegressionFit {
    pub tau: f64,
    pub u_y: DVector<f64>,
    pub a: f64,
    /// Coefficients on the regressors.
    pub b_w: DVector<f64>,
    /// Coefficients on the complement of `u_y` in response space.
    pub b_y: DVector<f64>,
    /// Complement of `u_y` in response space.
    pub gamma_y: DMatrix<f64>,
    /// The underlying fit on `Z = (W, Y)`.
    pub solution: Solution,
}

impl RegressionFit {
    /// Halfspace of response space at regressor value `w`:
    /// `u_y'y - b_y'Gamma_y'y >= b_w'w + a`.
    pub fn halfspace_at(&self, w: &DVector<f64>) -> Halfspace {
        let normal = &self.u_y - &self.gamma_y * &self.b_y;
        Halfspace::new(normal, self.b_w.dot(w) + self.a)
    }
}

fn block_gamma(q: usize, gamma_y: &DMatrix<f64>) -> DMatrix<f64> {
    let m = gamma_y.nrows();
    let mut g = DMatrix::zeros(q + m, q + m - 1);
    for i in 0..q {
        g[(i, i)] = 1.0;
    }
    g.view_mut((q, q), (m, m - 1)).copy_from(gamma_y);
    g
}

pub fn fit_regression(data: &DMatrix<f64>, spec: &RegressionSpec, tau: f64, u_y: &Direction) -> Result<RegressionFit> {
    fit_regression_with(data, spec, tau, u_y, &SolveOptions::default())
}

pub fn fit_regression_with(
    data: &DMatrix<f64>,
    spec: &RegressionSpec,
    tau: f64,
    u_y: &Direction,
    opts: &SolveOptions,
) -> Result<RegressionFit> {
    if u_y.dim() != spec.m() {
        return Err(Error::DimensionMismatch { expected: spec.m(), found: u_y.dim() });
    }
    let z = spec.assemble(data)?;
    let q = spec.q();
    let gamma_y = orthobasis(u_y);
    let u = if q == 0 { u_y.clone() } else { Direction::new(spec.embedding() * u_y.as_vector())? };
    let opts = SolveOptions { gamma: Some(block_gamma(q, &gamma_y)), ..opts.clone() };
    let sol = solver::solve(&z, tau, &u, &opts)?;
    Ok(RegressionFit {
        tau,
        u_y: u_y.as_vector().clone(),
        a: sol.a,
        b_w: sol.b.rows(0, q).into_owned(),
        b_y: sol.b.rows(q, spec.m() - 1).into_owned(),
        gamma_y,
        solution: sol,
    })
}

/// Sweep over all response directions at level `tau`.
pub fn regression_sweep(data: &DMatrix<f64>, spec: &RegressionSpec, tau: f64) -> Result<SweepResult> {
    let z = spec.assemble(data)?;
    sweep::sweep_subspace(&z, tau, &spec.embedding())
}

/// A cut of the regression quantile tube at a fixed regressor value.
#[derive(Debug, Clone)]
pub struct RegressionTubeCut {
    pub tau: f64,
    pub w: DVector<f64>,
    pub polytope: Polytope,
}

impl RegressionTubeCut {
    pub fn is_empty(&self) -> bool {
        self.polytope.empty
    }
}

/// Cut at `w` from a regression sweep with `q` regressors.
pub fn cut_from_sweep(s: &SweepResult, q: usize, w: &DVector<f64>) -> Result<RegressionTubeCut> {
    if w.len() != q {
        return Err(Error::DimensionMismatch { expected: q, found: w.len() });
    }
    let m = s.embedding.ncols();
    let hs: Vec<Halfspace> = s
        .hyperplanes
        .iter()
        .map(|h| {
            let t_w = h.normal.rows(0, q);
            let t_y = h.normal.rows(q, m).into_owned();
            Halfspace::new(t_y, h.offset - t_w.dot(w))
        })
        .collect();
    let polytope = intersect_halfspaces(&hs, m)?;
    Ok(RegressionTubeCut { tau: s.tau, w: w.clone(), polytope })
}

pub fn regression_cut(data: &DMatrix<f64>, spec: &RegressionSpec, tau: f64, w: &DVector<f64>) -> Result<RegressionTubeCut> {
    let s = regression_sweep(data, spec, tau)?;
    cut_from_sweep(&s, spec.q(), w)
}

/// Pairs `(tau_high, tau_low)` whose cuts at the same `w` fail to nest.
#[derive(Debug, Clone, Default)]
pub struct CrossingReport {
    pub crossings: Vec<(f64, f64)>,
}

impl CrossingReport {
    pub fn crossed(&self) -> bool {
        !self.crossings.is_empty()
    }
}

/// Flags every pair `tau1 > tau2` with `cut(tau1)` not inside `cut(tau2)`.
pub fn detect_crossing(cuts: &[RegressionTubeCut]) -> Result<CrossingReport> {
    if cuts.len() < 2 {
        return Err(Error::InvalidInput("crossing detection needs at least two levels".into()));
    }
    let w0 = &cuts[0].w;
    if cuts.iter().any(|c| c.w.len() != w0.len() || (&c.w - w0).amax() > 0.0) {
        return Err(Error::InvalidInput("cuts must share the regressor value".into()));
    }
    let mut report = CrossingReport::default();
    for hi in cuts {
        for lo in cuts {
            if hi.tau > lo.tau && !lo.polytope.contains(&hi.polytope, 1e-9) {
                report.crossings.push((hi.tau, lo.tau));
            }
        }
    }
    Ok(report)
}

/// Lower semicontinuous empirical quantile of one column.
pub fn empirical_quantile(values: &[f64], p: f64) -> Result<f64> {
    if values.is_empty() || !(p > 0.0 && p < 1.0) {
        return Err(Error::InvalidInput("quantile needs data and p in (0, 1)".into()));
    }
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let rank = ((v.len() as f64 * p - 1e-12).ceil() as usize).clamp(1, v.len());
    Ok(v[rank - 1])
}

/// Two-response model with one regressor `X ~ U(0, 4)`:
/// `Y = (X, X) + s(X) (e1, e2)` with `e1 ~ N(0, 1)`, `e2 ~ N(0, 9)` and
/// `s(X) = 1` or `sqrt(X)`. Columns are `(X, Y1, Y2)`.
pub fn simulate_two_response(n: usize, heteroscedastic: bool, rng: &mut impl Rng) -> DMatrix<f64> {
    let reg = Uniform::new(0.0, 4.0);
    let mut out = DMatrix::zeros(n, 3);
    for i in 0..n {
        let x: f64 = reg.sample(rng);
        let e1: f64 = StandardNormal.sample(rng);
        let e2: f64 = 3.0 * Distribution::<f64>::sample(&StandardNormal, rng);
        let s = if heteroscedastic { x.sqrt() } else { 1.0 };
        out[(i, 0)] = x;
        out[(i, 1)] = x + s * e1;
        out[(i, 2)] = x + s * e2;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::depth;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn location_case_is_identical() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let z = DMatrix::from_fn(30, 2, |_, _| StandardNormal.sample(&mut rng));
        let spec = RegressionSpec::new(vec![0, 1], vec![]).unwrap();
        let u = Direction::from_slice(&[0.3, 0.9]).unwrap();
        let r = fit_regression(&z, &spec, 0.2345, &u).unwrap();
        let l = crate::quantile::fit(&z, 0.2345, &u).unwrap();
        assert_eq!(r.solution.a, l.a);
        assert_eq!(r.solution.c, l.c);
        let cut = regression_cut(&z, &spec, 0.2345, &DVector::zeros(0)).unwrap();
        let reg = depth::region(&z, 0.2345).unwrap();
        assert_eq!(cut.polytope.vertices, reg.polytope.vertices);
    }

    #[test]
    fn halfspace_form_matches_hyperplane() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let d = simulate_two_response(200, false, &mut rng);
        let spec = RegressionSpec::new(vec![1, 2], vec![0]).unwrap();
        let u = Direction::from_slice(&[0.6, -0.8]).unwrap();
        let f = fit_regression(&d, &spec, 0.3001, &u).unwrap();
        // c = (-b_w, u_y - Gamma_y b_y).
        let c = &f.solution.c;
        assert!((c[0] + f.b_w[0]).abs() < 1e-12);
        let w = DVector::from_vec(vec![1.7]);
        let h = f.halfspace_at(&w);
        let y = DVector::from_vec(vec![0.4, -0.2]);
        let z = DVector::from_vec(vec![1.7, 0.4, -0.2]);
        assert!((h.slack(&y) - (c.dot(&z) - f.a)).abs() < 1e-12);
    }

    #[test]
    fn singular_regressors_rejected() {
        let d = DMatrix::from_fn(10, 3, |i, j| if j == 0 { 2.0 } else { (i * j) as f64 + 0.1 * (i * i) as f64 });
        let spec = RegressionSpec::new(vec![1, 2], vec![0]).unwrap();
        let u = Direction::from_slice(&[1.0, 0.0]).unwrap();
        assert!(matches!(fit_regression(&d, &spec, 0.3, &u), Err(Error::SingularDesign(_))));
        assert!(RegressionSpec::new(vec![1, 1], vec![]).is_err());
    }

    #[test]
    fn homoscedastic_slope_near_one() {
        // One fit at n = 500 has slope standard deviation near 0.26, so the
        // check is on the mean of 40 replicates.
        let spec = RegressionSpec::new(vec![1, 2], vec![0]).unwrap();
        let u = Direction::from_slice(&[0.0, 1.0]).unwrap();
        let mean = (0..40)
            .map(|s| {
                let mut rng = ChaCha8Rng::seed_from_u64(1000 + s);
                let d = simulate_two_response(500, false, &mut rng);
                fit_regression(&d, &spec, 0.2001, &u).unwrap().b_w[0]
            })
            .sum::<f64>()
            / 40.0;
        assert!((mean - 1.0).abs() < 0.15, "mean slope {mean}");
    }

    #[test]
    fn nested_location_cuts_do_not_cross() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let z = DMatrix::from_fn(25, 2, |_, _| StandardNormal.sample(&mut rng));
        let spec = RegressionSpec::new(vec![0, 1], vec![]).unwrap();
        let w = DVector::zeros(0);
        let cuts: Vec<_> = [0.05, 0.15, 0.31]
            .iter()
            .map(|&t| regression_cut(&z, &spec, t, &w).unwrap())
            .collect();
        assert!(!detect_crossing(&cuts).unwrap().crossed());
    }
}
