//! Directional quantile hyperplanes, their halfspaces, projection quantiles
//! and population counterparts.
//!
//! A fit at `(tau, u)` is the hyperplane `c'z = a` that minimises the mean
//! check loss subject to `u'c = 1`. Its open lower halfspace holds at most
//! `n tau` observations and its closed upper halfspace at least
//! `n (1 - tau)`. The minimised loss `lambda` is the scale-type quantity
//! used by the symmetry diagnostics.

use nalgebra::{DMatrix, DVector};

use crate::density::{DensityModel, Frame, DEFAULT_ORDER};
use crate::error::{Error, Result};
use crate::geometry::{intersect_halfspaces, orthobasis, Direction, Halfspace, Hyperplane, Polytope};
use crate::solver::{self, Solution, SolveOptions};

/// A sample quantile fit; the solver output carries everything needed.
pub type QuantileFit = Solution;

/// Sample directional quantile with default options.
pub fn fit(data: &DMatrix<f64>, tau: f64, u: &Direction) -> Result<QuantileFit> {
    solver::solve(data, tau, u, &SolveOptions::default())
}

pub fn fit_with(data: &DMatrix<f64>, tau: f64, u: &Direction, opts: &SolveOptions) -> Result<QuantileFit> {
    solver::solve(data, tau, u, opts)
}

impl Solution {
    pub fn hyperplane(&self) -> Hyperplane {
        Hyperplane::new(self.c.clone(), self.a)
    }

    /// Closed upper halfspace `{c'z >= a}`.
    pub fn upper_halfspace(&self) -> Halfspace {
        self.hyperplane().upper()
    }

    /// Number of observations strictly below the hyperplane.
    pub fn cut_off(&self) -> usize {
        self.n_neg
    }
}

/// Projection quantile hyperplane: orthogonal to `u` at the lower
/// semicontinuous empirical `tau`-quantile of `u'Z_i`.
pub fn km_projection_quantile(data: &DMatrix<f64>, tau: f64, u: &Direction) -> Result<Hyperplane> {
    if !(tau > 0.0 && tau < 1.0) {
        return Err(Error::InvalidTau(tau));
    }
    solver::check_data(data)?;
    if u.dim() != data.ncols() {
        return Err(Error::DimensionMismatch { expected: data.ncols(), found: u.dim() });
    }
    let mut proj: Vec<f64> = (data * u.as_vector()).iter().cloned().collect();
    proj.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = proj.len();
    let rank = ((n as f64 * tau - 1e-12).ceil() as usize).clamp(1, n);
    Ok(Hyperplane::new(u.as_vector().clone(), proj[rank - 1]))
}

/// Intersection of projection-quantile upper halfspaces over `dirs`.
pub fn km_envelope(data: &DMatrix<f64>, tau: f64, dirs: &[Direction]) -> Result<Polytope> {
    let hs: Vec<Halfspace> = dirs
        .iter()
        .map(|u| km_projection_quantile(data, tau, u).map(|h| h.upper()))
        .collect::<Result<_>>()?;
    intersect_halfspaces(&hs, data.ncols())
}

/// `m` equally spaced planar directions starting at angle 0.
pub fn circle_directions(m: usize) -> Vec<Direction> {
    (0..m)
        .map(|i| Direction::from_angle(std::f64::consts::TAU * i as f64 / m as f64))
        .collect()
}

/// Population directional quantile.
#[derive(Debug, Clone)]
pub struct PopulationFit {
    pub tau: f64,
    pub u: DVector<f64>,
    pub gamma: DMatrix<f64>,
    pub a: f64,
    pub b: DVector<f64>,
    pub c: DVector<f64>,
    pub lambda: f64,
    /// Hessian of the objective in `(a, b)`.
    pub hessian: DMatrix<f64>,
    pub newton_iterations: usize,
    /// Distance between the upper-minus-lower mass-centre difference and
    /// `lambda / (tau (1 - tau)) u`; zero at an exact population fit.
    pub mass_center_gap: f64,
}

fn rho(tau: f64, r: f64) -> f64 {
    if r < 0.0 {
        (tau - 1.0) * r
    } else {
        tau * r
    }
}

/// Population objective, gradient and Hessian at `(a, b)`.
pub(crate) struct PopulationMoments {
    pub objective: f64,
    pub gradient: DVector<f64>,
    pub hessian: DMatrix<f64>,
}

pub(crate) fn population_moments(frame: &Frame, tau: f64, a: f64, b: &DVector<f64>) -> PopulationMoments {
    let k = frame.u.len();
    let mut objective = 0.0;
    let mut p_below = 0.0;
    let mut x_below = DVector::zeros(k - 1);
    let mut x_mean = DVector::zeros(k - 1);
    frame.visit_volume(a, b, |w, z, x, below| {
        let r = frame.u.dot(z) - a - b.dot(x);
        objective += w * rho(tau, r);
        x_mean += x * w;
        if below {
            p_below += w;
            x_below += x * w;
        }
    });
    let mut gradient = DVector::zeros(k);
    gradient[0] = p_below - tau;
    for j in 1..k {
        gradient[j] = x_below[j - 1] - tau * x_mean[j - 1];
    }
    let mut hessian = DMatrix::zeros(k, k);
    frame.visit_surface(a, b, |w, _, x| {
        let mut v = DVector::zeros(k);
        v[0] = 1.0;
        for j in 1..k {
            v[j] = x[j - 1];
        }
        hessian += &v * v.transpose() * w;
    });
    PopulationMoments { objective, gradient, hessian }
}

/// Population quantile by damped Newton on `(a, b)`, quadrature of order `order`.
pub fn population_fit_with_order(model: &DensityModel, tau: f64, u: &Direction, order: usize) -> Result<PopulationFit> {
    model.validate()?;
    if !(tau > 0.0 && tau < 1.0) {
        return Err(Error::InvalidTau(tau));
    }
    let k = model.dim();
    if u.dim() != k {
        return Err(Error::DimensionMismatch { expected: k, found: u.dim() });
    }
    let gamma = orthobasis(u);
    let frame = Frame { model, u: u.as_vector(), gamma: &gamma, order };
    let mut b = DVector::zeros(k - 1);
    let mut a = marginal_quantile(&frame, tau)?;
    let mut mom = population_moments(&frame, tau, a, &b);
    let mut iterations = 0;
    for it in 0..100 {
        iterations = it;
        if mom.gradient.amax() < 1e-13 {
            break;
        }
        let cond = condition_number(&mom.hessian);
        if !(cond < 1e12) {
            return Err(Error::Numerical(format!("population Hessian ill-conditioned (cond {cond:.3e})")));
        }
        let step = mom
            .hessian
            .clone()
            .lu()
            .solve(&mom.gradient)
            .ok_or_else(|| Error::Numerical("singular population Hessian".into()))?;
        let mut alpha = 1.0;
        let mut accepted = false;
        for _ in 0..40 {
            let a_new = a - alpha * step[0];
            let b_new = &b - step.rows(1, k - 1) * alpha;
            let next = population_moments(&frame, tau, a_new, &b_new);
            if next.objective <= mom.objective + 1e-15 || next.gradient.norm() < mom.gradient.norm() {
                a = a_new;
                b = b_new;
                mom = next;
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    if mom.gradient.amax() > 1e-9 {
        return Err(Error::Numerical(format!("population Newton did not converge (gradient {:.3e})", mom.gradient.amax())));
    }
    let c = u.as_vector() - &gamma * &b;
    let mut lower_moment = DVector::zeros(k);
    let mut mean = DVector::zeros(k);
    frame.visit_volume(a, &b, |w, z, _, below| {
        mean += z * w;
        if below {
            lower_moment += z * w;
        }
    });
    let centers = (&mean - &lower_moment) / (1.0 - tau) - &lower_moment / tau;
    let mass_center_gap = (centers - u.as_vector() * (mom.objective / (tau * (1.0 - tau)))).norm();
    if mass_center_gap > 1e-6 {
        return Err(Error::Numerical(format!("mass centres not aligned with u (gap {mass_center_gap:.3e})")));
    }
    Ok(PopulationFit {
        tau,
        u: u.as_vector().clone(),
        gamma,
        a,
        b,
        c,
        lambda: mom.objective,
        hessian: mom.hessian,
        newton_iterations: iterations,
        mass_center_gap,
    })
}

/// Population quantile with the default quadrature order.
pub fn population_fit(model: &DensityModel, tau: f64, u: &Direction) -> Result<PopulationFit> {
    population_fit_with_order(model, tau, u, DEFAULT_ORDER)
}

fn condition_number(m: &DMatrix<f64>) -> f64 {
    let sv = m.clone().singular_values();
    let max = sv.max();
    let min = sv.min();
    if min <= 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// `tau`-quantile of `u'Z` by bisection (starting value for Newton).
fn marginal_quantile(frame: &Frame, tau: f64) -> Result<f64> {
    let k = frame.u.len();
    let zero = DVector::zeros(k - 1);
    let (lo, hi) = frame.model.support_box();
    let reach = (lo.abs().max(hi.abs())) * (k as f64).sqrt();
    let (mut l, mut h) = (-reach, reach);
    for _ in 0..80 {
        let mid = 0.5 * (l + h);
        let mut below = 0.0;
        frame.visit_volume(mid, &zero, |w, _, _, b| {
            if b {
                below += w;
            }
        });
        if below < tau {
            l = mid;
        } else {
            h = mid;
        }
        if h - l < 1e-12 {
            break;
        }
    }
    Ok(0.5 * (l + h))
}

#[cfg(test)]
mod tests {
    use super::*;
    use statrs::distribution::ContinuousCDF;

    fn sq4() -> DMatrix<f64> {
        DMatrix::from_row_slice(4, 2, &[-0.5, -0.5, 0.5, -0.5, 0.5, 0.5, -0.5, 0.5])
    }

    #[test]
    fn square_corners_lowest_edge() {
        let u = Direction::from_slice(&[0.0, 1.0]).unwrap();
        let f = fit(&sq4(), 0.2, &u).unwrap();
        assert!((f.a + 0.5).abs() < 1e-15);
        assert!(f.c[0].abs() < 1e-15 && (f.c[1] - 1.0).abs() < 1e-15);
        assert_eq!(f.cut_off(), 0);
    }

    #[test]
    fn projection_quantiles() {
        let u = Direction::from_slice(&[0.0, 1.0]).unwrap();
        let h = km_projection_quantile(&sq4(), 0.2, &u).unwrap();
        assert_eq!(h.a, -0.5);
        let d = DMatrix::from_column_slice(5, 1, &[1., 2., 3., 4., 5.]);
        let h = km_projection_quantile(&d, 0.3, &Direction::from_slice(&[1.0]).unwrap()).unwrap();
        assert_eq!(h.a, 2.0);
    }

    #[test]
    fn uniform_square_population_fit() {
        let m = DensityModel::uniform_square();
        let u = Direction::from_slice(&[1.0, 0.0]).unwrap();
        let p = population_fit(&m, 0.2, &u).unwrap();
        assert!((p.a + 0.3).abs() < 1e-12, "a = {}", p.a);
        assert!(p.b[0].abs() < 1e-12);
        assert!((p.lambda - 0.08).abs() < 1e-12, "lambda = {}", p.lambda);
        assert!((p.hessian[(0, 0)] - 1.0).abs() < 1e-12);
        assert!(p.hessian[(0, 1)].abs() < 1e-12);
        assert!((p.hessian[(1, 1)] - 1.0 / 12.0).abs() < 1e-12);
        assert!(p.mass_center_gap < 1e-12);
    }

    #[test]
    fn gaussian_axis_quantile() {
        let sigma = 1.7;
        let m = DensityModel::Gaussian { k: 2, sigma };
        let u = Direction::from_slice(&[1.0, 0.0]).unwrap();
        let p = population_fit(&m, 0.25, &u).unwrap();
        let z25 = statrs::distribution::Normal::new(0.0, 1.0).unwrap().inverse_cdf(0.25);
        assert!((p.a - z25 * sigma).abs() < 1e-9, "a = {}", p.a);
        assert!(p.b[0].abs() < 1e-9);
    }

    #[test]
    fn symmetric_model_is_antipodal() {
        let m = DensityModel::Gaussian { k: 2, sigma: 1.0 };
        let u = Direction::from_slice(&[0.6, 0.8]).unwrap();
        let p = population_fit(&m, 0.3, &u).unwrap();
        let q = population_fit(&m, 0.3, &u.negate()).unwrap();
        assert!((p.a - q.a).abs() < 1e-9);
        assert!((&p.c + &q.c).amax() < 1e-9);
    }

    #[test]
    fn sample_and_antipodal_fits() {
        let d = DMatrix::from_column_slice(5, 1, &[1., 2., 3., 4., 5.]);
        let f = fit(&d, 0.3, &Direction::from_slice(&[-1.0]).unwrap()).unwrap();
        // 0.7-quantile from the right is 4, seen from the left as -4.
        assert!((f.a + 4.0).abs() < 1e-12);
        let z = DMatrix::from_row_slice(7, 2, &[0.1, 0.3, -1.2, 0.8, 2.0, -0.4, 0.7, 1.9, -0.3, -1.1, 1.4, 0.2, -0.9, -0.2]);
        let u = Direction::from_slice(&[0.3, -0.7]).unwrap();
        let up = fit(&z, 0.7, &u).unwrap();
        let down = fit(&z, 0.3, &u.negate()).unwrap();
        assert!((up.a + down.a).abs() < 1e-12);
        assert!((&up.c + &down.c).amax() < 1e-12);
    }

    #[test]
    fn oblique_uniform_fit_is_stationary() {
        // Off-axis, the quadrature splitting keeps the Newton gradient at
        // machine level and the order-64/128 results agree.
        let m = DensityModel::uniform_square();
        let u = Direction::from_slice(&[0.6, 0.8]).unwrap();
        let p64 = population_fit_with_order(&m, 0.3, &u, 64).unwrap();
        let p128 = population_fit_with_order(&m, 0.3, &u, 128).unwrap();
        assert!((p64.a - p128.a).abs() < 1e-7);
        assert!((&p64.hessian - &p128.hessian).amax() < 1e-7);
    }
}
