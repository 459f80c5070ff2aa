//! Population Hessians, score covariances and sandwich covariances of the
//! sample directional quantile, with a Monte Carlo harness.
//!
//! With `J = blockdiag(1, Gamma)` and `Z. = (1, Z')'`:
//! `H` is the density-weighted second moment of `(1, x)` along the quantile
//! hyperplane, `H^c = J H J'`, `G = J H^-1 J'` is the pseudoinverse of `H^c`,
//! `V^c = Var[(tau - 1{below}) Z.]` and `V = J' V^c J`. The `(a, b)` estimator
//! has limiting covariance `H^-1 V H^-1`, the `(a, c)` estimator
//! `P G V^c G P` with `P = diag(1, -1, ..., -1)`.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::density::{DensityModel, Frame, DEFAULT_ORDER};
use crate::error::{Error, Result};
use crate::geometry::Direction;
use crate::quantile::{population_fit_with_order, PopulationFit};
use crate::solver::{self, SolveOptions};

/// Largest change allowed when the quadrature order is doubled.
pub const ORDER_DOUBLING_TOL: f64 = 1e-7;

#[derive(Debug, Clone)]
pub struct AsymptoticCov {
    pub fit: PopulationFit,
    /// `J = blockdiag(1, Gamma)`, `(k+1) x k`.
    pub j: DMatrix<f64>,
    pub h: DMatrix<f64>,
    pub h_c: DMatrix<f64>,
    pub v: DMatrix<f64>,
    pub v_c: DMatrix<f64>,
    /// Pseudoinverse of `h_c`.
    pub g: DMatrix<f64>,
    pub sandwich_ab: DMatrix<f64>,
    pub sandwich_ac: DMatrix<f64>,
    pub lambda: f64,
    pub lambda_var: f64,
    /// Standardised third moment of the loss `rho(c'Z - a)`; the skewness of
    /// `sqrt(n)(lambda_n - lambda)` is this over `sqrt(n)` to leading order.
    pub lambda_skewness_unit: f64,
    /// Quadrature estimate of `Var[tau - 1{below}]` before it is pinned to `tau (1 - tau)`.
    pub v00_quadrature: f64,
    /// Largest entry change between quadrature orders 64 and 128.
    pub order_delta: f64,
}

/// `blockdiag(1, gamma)`.
pub fn j_matrix(gamma: &DMatrix<f64>) -> DMatrix<f64> {
    let (k, m) = gamma.shape();
    let mut j = DMatrix::zeros(k + 1, m + 1);
    j[(0, 0)] = 1.0;
    j.view_mut((1, 1), (k, m)).copy_from(gamma);
    j
}

/// `diag(1, -1, ..., -1)` of size `k + 1`.
pub fn sign_flip(k: usize) -> DMatrix<f64> {
    DMatrix::from_diagonal(&DVector::from_fn(k + 1, |i, _| if i == 0 { 1.0 } else { -1.0 }))
}

fn rho(tau: f64, r: f64) -> f64 {
    if r < 0.0 {
        (tau - 1.0) * r
    } else {
        tau * r
    }
}

struct Moments {
    h: DMatrix<f64>,
    h_c: DMatrix<f64>,
    v_c: DMatrix<f64>,
    v00: f64,
    lambda: f64,
    lambda_var: f64,
    lambda_skew: f64,
}

fn moments(model: &DensityModel, fit: &PopulationFit, order: usize) -> Moments {
    let k = fit.u.len();
    let tau = fit.tau;
    let frame = Frame { model, u: &fit.u, gamma: &fit.gamma, order };
    let mut h = DMatrix::zeros(k, k);
    let mut h_c = DMatrix::zeros(k + 1, k + 1);
    frame.visit_surface(fit.a, &fit.b, |w, _, x| {
        let mut v = DVector::zeros(k);
        v[0] = 1.0;
        v.rows_mut(1, k - 1).copy_from(x);
        h += &v * v.transpose() * w;
        // The same integrand written on u-perp: (1, Gamma x).
        let zp = &fit.gamma * x;
        let mut vc = DVector::zeros(k + 1);
        vc[0] = 1.0;
        vc.rows_mut(1, k).copy_from(&zp);
        h_c += &vc * vc.transpose() * w;
    });
    let mut second = DMatrix::zeros(k + 1, k + 1);
    let mut first = DVector::zeros(k + 1);
    let mut loss = 0.0;
    let mut loss_sq = 0.0;
    let mut loss_cube = 0.0;
    frame.visit_volume(fit.a, &fit.b, |w, z, x, below| {
        let psi = if below { tau - 1.0 } else { tau };
        let mut zd = DVector::zeros(k + 1);
        zd[0] = 1.0;
        zd.rows_mut(1, k).copy_from(z);
        // xi^c = -psi Z.
        first -= &zd * (psi * w);
        second += &zd * zd.transpose() * (psi * psi * w);
        let r = fit.u.dot(z) - fit.a - fit.b.dot(x);
        let l = rho(tau, r);
        loss += w * l;
        loss_sq += w * l * l;
        loss_cube += w * l * l * l;
    });
    let var = loss_sq - loss * loss;
    let third = loss_cube - 3.0 * loss * loss_sq + 2.0 * loss.powi(3);
    let v_c = second - &first * first.transpose();
    Moments { h, h_c, v00: v_c[(0, 0)], v_c, lambda: loss, lambda_var: var, lambda_skew: third / var.powf(1.5) }
}

/// Pseudoinverse of `h_c` through the complement: `J (J' H^c J)^-1 J'`.
pub fn pseudo_inverse(h_c: &DMatrix<f64>, j: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let inner = j.transpose() * h_c * j;
    let inv = inner
        .try_inverse()
        .ok_or_else(|| Error::Numerical("inner Hessian block is singular".into()))?;
    Ok(j * inv * j.transpose())
}

/// Residuals of the four Moore-Penrose identities.
pub fn penrose_residuals(h_c: &DMatrix<f64>, g: &DMatrix<f64>) -> [f64; 4] {
    let gh = g * h_c;
    let hg = h_c * g;
    [
        (&gh * g - g).amax(),
        (&hg * h_c - h_c).amax(),
        (&gh - gh.transpose()).amax(),
        (&hg - hg.transpose()).amax(),
    ]
}

/// `H^-1 V H^-1` or `P G V^c G P`.
pub fn sandwich(h: &DMatrix<f64>, v: &DMatrix<f64>, constrained: Option<&DMatrix<f64>>) -> Result<DMatrix<f64>> {
    match constrained {
        None => {
            let hi = h.clone().try_inverse().ok_or_else(|| Error::Numerical("singular Hessian".into()))?;
            Ok(&hi * v * &hi)
        }
        Some(g) => {
            let p = sign_flip(g.nrows() - 1);
            Ok(&p * g * v * g * &p)
        }
    }
}

/// All asymptotic quantities at quadrature order 64, with an order-doubling check.
pub fn asymptotic_cov(model: &DensityModel, tau: f64, u: &Direction) -> Result<AsymptoticCov> {
    let fit = population_fit_with_order(model, tau, u, DEFAULT_ORDER)?;
    let fine_fit = population_fit_with_order(model, tau, u, 2 * DEFAULT_ORDER)?;
    let m = moments(model, &fit, DEFAULT_ORDER);
    let fine = moments(model, &fine_fit, 2 * DEFAULT_ORDER);
    let order_delta = [
        (fit.a - fine_fit.a).abs(),
        (&fit.b - &fine_fit.b).amax(),
        (&m.h - &fine.h).amax(),
        (&m.v_c - &fine.v_c).amax(),
        (m.lambda - fine.lambda).abs(),
        (m.lambda_var - fine.lambda_var).abs(),
    ]
    .into_iter()
    .fold(0.0, f64::max);
    if order_delta > ORDER_DOUBLING_TOL {
        return Err(Error::Numerical(format!("quadrature not converged under order doubling (delta {order_delta:.3e})")));
    }
    let j = j_matrix(&fit.gamma);
    let mut v_c = m.v_c;
    // At the population quantile the lower halfspace has mass tau exactly.
    v_c[(0, 0)] = tau * (1.0 - tau);
    let v = j.transpose() * &v_c * &j;
    let g = pseudo_inverse(&m.h_c, &j)?;
    let sandwich_ab = sandwich(&m.h, &v, None)?;
    let sandwich_ac = sandwich(&m.h_c, &v_c, Some(&g))?;
    Ok(AsymptoticCov {
        j,
        h: m.h,
        h_c: m.h_c,
        v,
        v_c,
        g,
        sandwich_ab,
        sandwich_ac,
        lambda: m.lambda,
        lambda_var: m.lambda_var,
        lambda_skewness_unit: m.lambda_skew,
        v00_quadrature: m.v00,
        order_delta,
        fit,
    })
}

/// Summary of a Monte Carlo run at one sample size.
#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub n: usize,
    pub reps: usize,
    pub seed: u64,
    pub tau: f64,
    pub u: Vec<f64>,
    pub a_population: f64,
    pub lambda_population: f64,
    /// Share of replicates whose 95% sandwich interval covers the intercept.
    pub coverage: f64,
    pub mean_abs_a_error: f64,
    pub mean_abs_lambda_error: f64,
    /// Monte Carlo variance of `sqrt(n)(a_n - a)` over the sandwich value.
    pub a_variance_ratio: f64,
    /// Monte Carlo variance of `sqrt(n)(lambda_n - lambda)` over its limit.
    pub lambda_variance_ratio: f64,
    pub lambda_skewness: f64,
    /// Median of the Bahadur remainder norm.
    pub bahadur_median: f64,
    /// Median of `|theta_n - theta|`.
    pub error_median: f64,
}

struct Replicate {
    a: f64,
    lambda: f64,
    remainder: f64,
    error: f64,
}

fn median(v: &mut [f64]) -> f64 {
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

fn moments_of(v: &[f64]) -> (f64, f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let m2 = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    let m3 = v.iter().map(|x| (x - mean).powi(3)).sum::<f64>() / n;
    (mean, m2 * n / (n - 1.0), m3 / m2.powf(1.5))
}

/// Simulates `reps` samples of size `n` and compares with the limit theory.
/// Replicate `r` draws from ChaCha8 seeded with `seed`, stream `r`.
pub fn monte_carlo_validate(
    model: &DensityModel,
    cov: &AsymptoticCov,
    n: usize,
    reps: usize,
    seed: u64,
) -> Result<ValidationReport> {
    let fit = &cov.fit;
    let tau = fit.tau;
    let u = Direction::new(fit.u.clone())?;
    let hinv = cov
        .h
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Numerical("singular Hessian".into()))?;
    let k = fit.u.len();
    let opts = SolveOptions { allow_degenerate: true, gamma: Some(fit.gamma.clone()), ..Default::default() };
    let reps_out: Vec<Result<Replicate>> = (0..reps)
        .into_par_iter()
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(r as u64);
            let z = model.sample(n, &mut rng);
            let s = solver::solve(&z, tau, &u, &opts)?;
            let mut theta_err = DVector::zeros(k);
            theta_err[0] = s.a - fit.a;
            theta_err.rows_mut(1, k - 1).copy_from(&(&s.b - &fit.b));
            // Sum of J' xi_i = -psi(r_i) (1, Gamma' Z_i) at the population fit.
            let mut score = DVector::zeros(k);
            for i in 0..n {
                let zi = z.row(i).transpose();
                let x = fit.gamma.transpose() * &zi;
                let res = fit.u.dot(&zi) - fit.a - fit.b.dot(&x);
                let psi = if res < 0.0 { tau - 1.0 } else { tau };
                score[0] -= psi;
                for d in 0..k - 1 {
                    score[d + 1] -= psi * x[d];
                }
            }
            let sq = (n as f64).sqrt();
            let remainder = (&theta_err * sq + &hinv * &score / sq).norm();
            Ok(Replicate { a: s.a, lambda: s.lambda, remainder, error: theta_err.norm() })
        })
        .collect();
    let reps_ok: Vec<Replicate> = reps_out.into_iter().collect::<Result<_>>()?;
    let sq = (n as f64).sqrt();
    let half = 1.959_963_984_540_054 * (cov.sandwich_ab[(0, 0)] / n as f64).sqrt();
    let covered = reps_ok.iter().filter(|r| (r.a - fit.a).abs() <= half).count();
    let a_scaled: Vec<f64> = reps_ok.iter().map(|r| sq * (r.a - fit.a)).collect();
    let l_scaled: Vec<f64> = reps_ok.iter().map(|r| sq * (r.lambda - cov.lambda)).collect();
    let (_, a_var, _) = moments_of(&a_scaled);
    let (_, l_var, l_skew) = moments_of(&l_scaled);
    let mut rem: Vec<f64> = reps_ok.iter().map(|r| r.remainder).collect();
    let mut err: Vec<f64> = reps_ok.iter().map(|r| r.error).collect();
    let count = reps_ok.len() as f64;
    Ok(ValidationReport {
        n,
        reps,
        seed,
        tau,
        u: fit.u.iter().cloned().collect(),
        a_population: fit.a,
        lambda_population: cov.lambda,
        coverage: covered as f64 / count,
        mean_abs_a_error: reps_ok.iter().map(|r| (r.a - fit.a).abs()).sum::<f64>() / count,
        mean_abs_lambda_error: reps_ok.iter().map(|r| (r.lambda - cov.lambda).abs()).sum::<f64>() / count,
        a_variance_ratio: a_var / cov.sandwich_ab[(0, 0)],
        lambda_variance_ratio: l_var / cov.lambda_var,
        lambda_skewness: l_skew,
        bahadur_median: median(&mut rem),
        error_median: median(&mut err),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square_cov() -> AsymptoticCov {
        asymptotic_cov(&DensityModel::uniform_square(), 0.2, &Direction::from_slice(&[1.0, 0.0]).unwrap()).unwrap()
    }

    #[test]
    fn uniform_square_closed_forms() {
        let c = square_cov();
        let h = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 1.0 / 12.0]);
        assert!((&c.h - h).amax() < 1e-12);
        assert_eq!(c.v[(0, 0)], 0.2 * 0.8);
        assert!((c.v00_quadrature - 0.16).abs() < 1e-12);
        // Var[(tau - I) Z1]: the mean of the score is -(0, lambda u), so the
        // (0, 1) covariance is E[(tau - I)^2 Z1] = 0.64 * (-0.08) + 0.04 * 0.08.
        assert!((c.v_c[(0, 1)] + 0.048).abs() < 1e-12);
        assert!((c.lambda - 0.08).abs() < 1e-12);
        // rho(Z1 + 0.3) is uniform on [0, 0.16].
        assert!((c.lambda_var - 0.16f64.powi(2) / 12.0).abs() < 1e-12);
        assert!(c.lambda_skewness_unit.abs() < 1e-9);
        assert!((c.sandwich_ab[(0, 0)] - 0.16).abs() < 1e-12);
    }

    #[test]
    fn hessian_identities() {
        let c = square_cov();
        assert!((c.j.transpose() * &c.h_c * &c.j - &c.h).amax() < 1e-12);
        assert!(penrose_residuals(&c.h_c, &c.g).iter().all(|&r| r < 1e-10));
        let udot = DVector::from_vec(vec![0.0, 1.0, 0.0]);
        assert!((&c.g * udot).amax() < 1e-12);
        let rank = c.g.clone().svd(false, false).rank(1e-10);
        assert_eq!(rank, 2);
        // The two parameterisations agree on the intercept.
        assert!((c.sandwich_ab[(0, 0)] - c.sandwich_ac[(0, 0)]).abs() < 1e-12);
    }

    #[test]
    fn gaussian_axis_hessian_is_diagonal() {
        let model = DensityModel::Gaussian { k: 2, sigma: 1.3 };
        let c = asymptotic_cov(&model, 0.3, &Direction::from_slice(&[0.0, 1.0]).unwrap()).unwrap();
        assert!(c.h[(0, 1)].abs() < 1e-8);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        use rand::Rng;
        for _ in 0..20 {
            let w = DVector::from_fn(2, |_, _| rng.gen::<f64>() - 0.5);
            assert!(w.dot(&(&c.h * &w)) > 0.0);
        }
    }

    #[test]
    fn univariate_uniform_sandwich() {
        let model = DensityModel::UniformBox { k: 1, half_width: 0.5 };
        let c = asymptotic_cov(&model, 0.2, &Direction::from_slice(&[1.0]).unwrap()).unwrap();
        assert!((c.sandwich_ab[(0, 0)] - 0.16).abs() < 1e-12);
    }
}
