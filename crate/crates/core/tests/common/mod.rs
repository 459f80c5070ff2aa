//! Oracles and samplers shared by the integration test targets.
#![allow(dead_code)]

use dirq::geometry::{orthobasis, Direction};
use dirq::solver::verify_certificate;
use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub fn gaussian_sample(n: usize, k: usize, seed: u64) -> DMatrix<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    DMatrix::from_fn(n, k, |_, _| StandardNormal.sample(&mut rng))
}

pub fn rho(tau: f64, r: f64) -> f64 {
    if r < 0.0 {
        (tau - 1.0) * r
    } else {
        tau * r
    }
}

/// Oracle: minimum of the objective over all hyperplanes through k points,
/// normalised by u'c = 1.
pub fn vertex_enumeration_minimum(z: &DMatrix<f64>, tau: f64, u: &DVector<f64>) -> f64 {
    let (n, k) = z.shape();
    let mut best = f64::INFINITY;
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        // Solve for (a, c) with c'Z_j = a on idx and u'c = 1.
        let mut m = DMatrix::zeros(k + 1, k + 1);
        let mut rhs = DVector::zeros(k + 1);
        for (r, &j) in idx.iter().enumerate() {
            for l in 0..k {
                m[(r, l)] = z[(j, l)];
            }
            m[(r, k)] = -1.0;
        }
        for l in 0..k {
            m[(k, l)] = u[l];
        }
        rhs[k] = 1.0;
        if let Some(sol) = m.lu().solve(&rhs) {
            if sol.iter().all(|v| v.is_finite()) && sol.amax() < 1e8 {
                let c = sol.rows(0, k).into_owned();
                let a = sol[k];
                let obj: f64 = (0..n).map(|i| rho(tau, z.row(i).transpose().dot(&c) - a)).sum();
                best = best.min(obj);
            }
        }
        // Next combination.
        let mut i = k;
        loop {
            if i == 0 {
                return best;
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

/// Oracle: every two-point line, in both orientations, that is a quantile
/// line for some planar direction. The certificate weights times `t'u` are
/// linear in `u`, so two certificate evaluations determine them; the
/// feasible directions then form an interval in `tan` of the angle to `t`.
pub fn certified_lines(z: &DMatrix<f64>, tau: f64) -> Vec<(DVector<f64>, f64)> {
    let n = z.nrows();
    let mut out = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let d = z.row(j) - z.row(i);
            let base = DVector::from_vec(vec![-d[1], d[0]]).normalize();
            for t in [base.clone(), -base.clone()] {
                let a_h = t.dot(&z.row(i).transpose());
                let perp = DVector::from_vec(vec![-t[1], t[0]]);
                // Weights times t'u at u = t and u = (t + perp)/sqrt2.
                let eval = |u: &DVector<f64>| {
                    let dir = Direction::new(u.clone()).unwrap();
                    let g = orthobasis(&dir);
                    let tu = t.dot(u);
                    let rep = verify_certificate(z, tau, &dir, &g, a_h / tu, &(&t / tu), &[i, j]).unwrap();
                    (rep.xi * tu, rep.n_neg)
                };
                let (w0, n_neg) = eval(&t);
                let u1 = (&t + &perp).normalize();
                let (w1, _) = eval(&u1);
                // L(u) = A cos + B sin in the (t, perp) frame.
                let alpha = w0;
                let beta = (w1 * 2f64.sqrt()) - &alpha;
                let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
                let mut ok = true;
                for r in 0..2 {
                    // alpha + beta s + tau > 0 and (1 - tau) - alpha - beta s > 0.
                    for (a0, b0) in [(alpha[r] + tau, beta[r]), (1.0 - tau - alpha[r], -beta[r])] {
                        if b0.abs() < 1e-14 {
                            ok &= a0 > 0.0;
                        } else if b0 > 0.0 {
                            lo = lo.max(-a0 / b0);
                        } else {
                            hi = hi.min(-a0 / b0);
                        }
                    }
                }
                if ok && hi - lo > 1e-12 && (n_neg as f64) <= n as f64 * tau {
                    out.push((t, a_h));
                }
            }
        }
    }
    out
}

pub fn same_set(a: &[(DVector<f64>, f64)], b: &[(DVector<f64>, f64)]) -> bool {
    let matched = |x: &(DVector<f64>, f64), ys: &[(DVector<f64>, f64)]| {
        ys.iter().any(|y| (&x.0 - &y.0).amax() < 1e-8 && (x.1 - y.1).abs() < 1e-8)
    };
    a.len() == b.len() && a.iter().all(|x| matched(x, b)) && b.iter().all(|y| matched(y, a))
}
