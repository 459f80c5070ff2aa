//! Simplex solver for the directional quantile program.
//!
//! For a sample `Z` (rows `Z_i` in `R^k`), `tau in (0,1)` and a unit
//! direction `u`, the program is
//!
//! ```text
//! minimise   tau * sum r+_i + (1 - tau) * sum r-_i
//! subject to u'c = 1,   c'Z_i - a - r+_i + r-_i = 0,   r+, r- >= 0
//! ```
//!
//! The equality `u'c = 1` is eliminated inside the basis by writing
//! `c = u - Gamma b` for an orthonormal complement `Gamma` of `u`. The
//! program then becomes an L1-type fit of `y_i = u'Z_i` on
//! `x_i = (1, Gamma'Z_i)`. A vertex is a set `h` of `k` observations fitted
//! exactly.
//!
//! Each iteration computes the optimality vector
//! `xi(h) = (X(h)')^{-1} sum_{i not in h} (tau - 1[r_i < 0]) x_i`.
//! The vertex is optimal when `-tau <= xi <= 1 - tau`. Otherwise an edge
//! with negative directional derivative is followed. The step is a
//! weighted-median line search over the residual breakpoints, so one
//! iteration may pass several vertices. After `3n` consecutive degenerate
//! pivots the entering/leaving choice switches to Bland's smallest-index
//! rule.
//!
//! The dual multipliers are `mu_i = -tau` for `r_i > 0`, `mu_i = 1 - tau`
//! for `r_i < 0`, and `mu_h = xi(h)` on the basis. They satisfy
//! `1'mu = 0` and `lambda_D u + Z'mu = 0`.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geometry::{orthobasis, Direction};

/// Tolerance on the optimality vector.
const OPT_TOL: f64 = 1e-9;
/// Relative size below which a basis matrix counts as singular.
const SINGULAR_TOL: f64 = 1e-12;
/// Magnitude of the optional seeded jitter, relative to the data scale.
pub const JITTER_SCALE: f64 = 1e-9;

/// Options for [`solve`].
#[derive(Debug, Clone, Default)]
pub struct SolveOptions {
    /// Accept `n * tau` integer and flag the result as non-unique.
    pub allow_degenerate: bool,
    /// Seed for a deterministic jitter of the data (general-position repair).
    pub jitter: Option<u64>,
    /// Starting basis (indices of `k` observations).
    pub start: Option<Vec<usize>>,
    /// Orthonormal complement to use instead of the default Householder one.
    pub gamma: Option<DMatrix<f64>>,
}

/// Primal and dual optimum of the directional quantile program.
#[derive(Debug, Clone)]
pub struct Solution {
    pub tau: f64,
    pub u: DVector<f64>,
    pub gamma: DMatrix<f64>,
    /// Intercept of the hyperplane `c'z = a`.
    pub a: f64,
    /// Slope coordinates: `c = u - Gamma b`.
    pub b: DVector<f64>,
    pub c: DVector<f64>,
    /// `c'Z_i - a`, with exact zeros on the basis.
    pub residuals: DVector<f64>,
    /// Primal objective `sum rho_tau(r_i)`.
    pub objective: f64,
    /// Dual multipliers.
    pub mu: DVector<f64>,
    /// Dual objective value.
    pub lambda_d: f64,
    /// `lambda_d / n`, the minimised empirical check-function mean.
    pub lambda: f64,
    /// Basis observations, ascending.
    pub basis: Vec<usize>,
    /// Optimality vector on the basis (equals `mu` there).
    pub xi: DVector<f64>,
    /// Counts of negative, positive and zero residuals.
    pub n_neg: usize,
    pub n_pos: usize,
    pub n_zero: usize,
    /// `n tau` integer or a non-strict optimality vector.
    pub nonunique: bool,
    pub jittered: bool,
    pub iterations: usize,
}

impl Solution {
    pub fn n(&self) -> usize {
        self.residuals.len()
    }
}

fn check_tau(tau: f64) -> Result<()> {
    if !(tau > 0.0 && tau < 1.0) {
        return Err(Error::InvalidTau(tau));
    }
    Ok(())
}

/// True when `n * tau` is (numerically) an integer.
pub fn is_integer_level(n: usize, tau: f64) -> bool {
    let nt = n as f64 * tau;
    (nt - nt.round()).abs() < 1e-9
}

/// Validates a sample: at least `k + 1` rows and finite entries.
pub fn check_data(data: &DMatrix<f64>) -> Result<()> {
    let (n, k) = data.shape();
    if k == 0 {
        return Err(Error::InvalidInput("data have no columns".into()));
    }
    if n <= k {
        return Err(Error::InvalidInput(format!("need more than {k} observations, got {n}")));
    }
    if let Some(pos) = data.iter().position(|x| !x.is_finite()) {
        return Err(Error::InvalidInput(format!("non-finite value in observation {}", pos % n)));
    }
    Ok(())
}

/// Solves the directional quantile program.
pub fn solve(data: &DMatrix<f64>, tau: f64, u: &Direction, opts: &SolveOptions) -> Result<Solution> {
    check_tau(tau)?;
    check_data(data)?;
    let (n, k) = data.shape();
    if u.dim() != k {
        return Err(Error::DimensionMismatch { expected: k, found: u.dim() });
    }
    let integer = is_integer_level(n, tau);
    if integer && !opts.allow_degenerate {
        return Err(Error::Nonunique(n as f64 * tau));
    }
    let gamma = match &opts.gamma {
        Some(g) => {
            if g.shape() != (k, k - 1) {
                return Err(Error::DimensionMismatch { expected: k - 1, found: g.ncols() });
            }
            g.clone()
        }
        None => orthobasis(u),
    };
    let jittered;
    let owned;
    let z = match opts.jitter {
        Some(seed) => {
            owned = jitter(data, seed);
            jittered = true;
            &owned
        }
        None => {
            jittered = false;
            data
        }
    };
    let design = Design::new(z, u.as_vector(), &gamma);
    let start = match &opts.start {
        Some(s) => {
            if s.len() != k || s.iter().any(|&i| i >= n) {
                return Err(Error::InvalidInput("starting basis must hold k valid indices".into()));
            }
            s.clone()
        }
        None => design.warm_start(tau)?,
    };
    let (mut basis, iterations) = design.simplex(tau, start)?;
    basis.sort_unstable();
    let mut sol = design.finish(z, tau, u.as_vector(), gamma, basis, iterations)?;
    if sol.n_zero > k {
        if !opts.allow_degenerate {
            let ties = (0..n).filter(|&i| sol.residuals[i].abs() <= 1e-10 * z.amax().max(1.0)).collect();
            return Err(Error::GeneralPosition(ties));
        }
        sol.nonunique = true;
    }
    sol.nonunique |= integer;
    sol.jittered = jittered;
    Ok(sol)
}

/// Deterministic jitter of relative size [`JITTER_SCALE`].
pub fn jitter(data: &DMatrix<f64>, seed: u64) -> DMatrix<f64> {
    let scale = data.amax().max(1.0) * JITTER_SCALE;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    data.map(|x| x + scale * rng.gen_range(-1.0..1.0))
}

/// Projected design: `y_i = u'Z_i`, `x_i = (1, Gamma'Z_i)` stored row-major.
pub(crate) struct Design {
    n: usize,
    k: usize,
    y: Vec<f64>,
    x: Vec<f64>,
}

impl Design {
    pub(crate) fn new(z: &DMatrix<f64>, u: &DVector<f64>, gamma: &DMatrix<f64>) -> Self {
        let (n, k) = z.shape();
        let y_col = z * u;
        let proj = z * gamma;
        let mut x = vec![0.0; n * k];
        for i in 0..n {
            x[i * k] = 1.0;
            for j in 1..k {
                x[i * k + j] = proj[(i, j - 1)];
            }
        }
        Design { n, k, y: y_col.as_slice().to_vec(), x }
    }

    fn row(&self, i: usize) -> &[f64] {
        &self.x[i * self.k..(i + 1) * self.k]
    }

    fn basis_matrix(&self, h: &[usize]) -> Result<DMatrix<f64>> {
        let k = self.k;
        let mut m = DMatrix::zeros(k, k);
        for (r, &i) in h.iter().enumerate() {
            for j in 0..k {
                m[(r, j)] = self.row(i)[j];
            }
        }
        let scale: f64 = (0..k).map(|r| m.row(r).norm()).product();
        let det = m.determinant();
        if !(det.abs() > SINGULAR_TOL * scale) {
            return Err(Error::GeneralPosition(h.to_vec()));
        }
        Ok(m)
    }

    /// Starting basis: on large samples, the optimum of a strided subsample;
    /// otherwise the tau-quantile of `y` plus points spreading the design.
    fn warm_start(&self, tau: f64) -> Result<Vec<usize>> {
        if self.n > 600 {
            let stride = self.n / 300;
            let idx: Vec<usize> = (0..self.n).step_by(stride).collect();
            let sub = self.subset(&idx);
            let start = sub.greedy_start(tau);
            if let Ok((h, _)) = sub.simplex(tau, start) {
                return Ok(h.into_iter().map(|i| idx[i]).collect());
            }
        }
        Ok(self.greedy_start(tau))
    }

    fn subset(&self, idx: &[usize]) -> Design {
        let k = self.k;
        let mut x = Vec::with_capacity(idx.len() * k);
        for &i in idx {
            x.extend_from_slice(self.row(i));
        }
        Design { n: idx.len(), k, y: idx.iter().map(|&i| self.y[i]).collect(), x }
    }

    fn greedy_start(&self, tau: f64) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.n).collect();
        let pos = ((self.n as f64 * tau).floor() as usize).min(self.n - 1);
        order.select_nth_unstable_by(pos, |&a, &b| self.y[a].partial_cmp(&self.y[b]).unwrap());
        let mut chosen = vec![order[pos]];
        let mut ortho: Vec<Vec<f64>> = Vec::new();
        let first = self.row(order[pos]).to_vec();
        let fnorm = first.iter().map(|v| v * v).sum::<f64>().sqrt();
        ortho.push(first.iter().map(|v| v / fnorm).collect());
        while chosen.len() < self.k {
            let mut best = (-1.0, 0);
            for i in 0..self.n {
                if chosen.contains(&i) {
                    continue;
                }
                let mut r = self.row(i).to_vec();
                for q in &ortho {
                    let p: f64 = r.iter().zip(q).map(|(a, b)| a * b).sum();
                    for (rv, qv) in r.iter_mut().zip(q) {
                        *rv -= p * qv;
                    }
                }
                let nr = r.iter().map(|v| v * v).sum::<f64>().sqrt();
                if nr > best.0 {
                    best = (nr, i);
                }
            }
            let mut r = self.row(best.1).to_vec();
            for q in &ortho {
                let p: f64 = r.iter().zip(q).map(|(a, b)| a * b).sum();
                for (rv, qv) in r.iter_mut().zip(q) {
                    *rv -= p * qv;
                }
            }
            let nr = r.iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-300);
            ortho.push(r.iter().map(|v| v / nr).collect());
            chosen.push(best.1);
        }
        chosen
    }

    fn residuals(&self, beta: &DVector<f64>, in_basis: &[bool], out: &mut [f64]) {
        let k = self.k;
        for i in 0..self.n {
            if in_basis[i] {
                out[i] = 0.0;
                continue;
            }
            let row = self.row(i);
            let mut fit = 0.0;
            for j in 0..k {
                fit += row[j] * beta[j];
            }
            out[i] = self.y[i] - fit;
        }
    }

    /// Optimality vector for basis `h` given residuals.
    fn xi(&self, tau: f64, xh: &DMatrix<f64>, resid: &[f64], in_basis: &[bool]) -> Result<DVector<f64>> {
        let k = self.k;
        let mut w = DVector::zeros(k);
        for i in 0..self.n {
            if in_basis[i] {
                continue;
            }
            let psi = if resid[i] < 0.0 { tau - 1.0 } else { tau };
            let row = self.row(i);
            for j in 0..k {
                w[j] += psi * row[j];
            }
        }
        xh.transpose()
            .lu()
            .solve(&w)
            .ok_or_else(|| Error::Numerical("transposed basis solve failed".into()))
    }

    /// Runs the simplex from `start`; returns the optimal basis and the
    /// number of iterations.
    fn simplex(&self, tau: f64, start: Vec<usize>) -> Result<(Vec<usize>, usize)> {
        let (n, k) = (self.n, self.k);
        let mut h = start;
        let mut in_basis = vec![false; n];
        for &i in &h {
            if in_basis[i] {
                return Err(Error::InvalidInput("starting basis has repeated indices".into()));
            }
            in_basis[i] = true;
        }
        let mut resid = vec![0.0; n];
        let mut degenerate_run = 0usize;
        let max_iter = 50 * n + 1000;
        let mut breaks: Vec<(f64, usize, f64)> = Vec::with_capacity(n);
        for iter in 0..max_iter {
            let bland = degenerate_run > 3 * n;
            let xh = self.basis_matrix(&h)?;
            let lu = xh.clone().lu();
            let yh = DVector::from_iterator(k, h.iter().map(|&i| self.y[i]));
            let beta = lu.solve(&yh).ok_or_else(|| Error::GeneralPosition(h.clone()))?;
            self.residuals(&beta, &in_basis, &mut resid);
            let xi = self.xi(tau, &xh, &resid, &in_basis)?;

            // Leaving candidate: an edge with negative directional derivative.
            let mut pick: Option<(usize, f64, f64)> = None;
            for j in 0..k {
                for (sigma, g) in [(1.0, (1.0 - tau) - xi[j]), (-1.0, tau + xi[j])] {
                    if g >= -OPT_TOL {
                        continue;
                    }
                    let better = match pick {
                        None => true,
                        Some((pj, _, pg)) => {
                            if bland {
                                h[j] < h[pj]
                            } else {
                                g < pg
                            }
                        }
                    };
                    if better {
                        pick = Some((j, sigma, g));
                    }
                }
            }
            let Some((j, sigma, slope0)) = pick else {
                return Ok((h, iter));
            };

            let mut e = DVector::zeros(k);
            e[j] = sigma;
            let d = lu.solve(&e).ok_or_else(|| Error::GeneralPosition(h.clone()))?;
            let dnorm = d.norm();

            breaks.clear();
            for i in 0..n {
                if in_basis[i] {
                    continue;
                }
                let row = self.row(i);
                let mut z = 0.0;
                for l in 0..k {
                    z += row[l] * d[l];
                }
                if z.abs() <= 1e-14 * dnorm {
                    continue;
                }
                let r = resid[i];
                // The residual r - t z changes sign for some t >= 0.
                if (r >= 0.0 && z > 0.0) || (r < 0.0 && z < 0.0) {
                    breaks.push((r / z, i, z.abs()));
                }
            }
            // Weighted-median line search. The crossing is usually among the
            // first breakpoints, so they are selected in growing chunks
            // rather than fully sorted; the scan order is the same.
            let order = |a: &(f64, usize, f64), b: &(f64, usize, f64)| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1));
            let mut slope = slope0;
            let mut entering = None;
            let (mut done, mut chunk) = (0, 16);
            'scan: while done < breaks.len() {
                let rest = &mut breaks[done..];
                let m = chunk.min(rest.len());
                if m < rest.len() {
                    rest.select_nth_unstable_by(m - 1, order);
                }
                rest[..m].sort_unstable_by(order);
                for &(t, i, dz) in &rest[..m] {
                    slope += dz;
                    if slope >= 0.0 {
                        entering = Some((t, i));
                        break 'scan;
                    }
                }
                done += m;
                chunk *= 2;
            }
            let Some((t, i)) = entering else {
                return Err(Error::Unbounded);
            };
            if t <= 1e-15 {
                degenerate_run += 1;
            } else {
                degenerate_run = 0;
            }
            in_basis[h[j]] = false;
            in_basis[i] = true;
            h[j] = i;
        }
        Err(Error::Degeneracy(h))
    }

    fn finish(
        &self,
        z: &DMatrix<f64>,
        tau: f64,
        u: &DVector<f64>,
        gamma: DMatrix<f64>,
        basis: Vec<usize>,
        iterations: usize,
    ) -> Result<Solution> {
        let (n, k) = (self.n, self.k);
        let xh = self.basis_matrix(&basis)?;
        let yh = DVector::from_iterator(k, basis.iter().map(|&i| self.y[i]));
        let beta = xh.clone().lu().solve(&yh).ok_or_else(|| Error::GeneralPosition(basis.clone()))?;
        let mut in_basis = vec![false; n];
        for &i in &basis {
            in_basis[i] = true;
        }
        let mut resid = vec![0.0; n];
        self.residuals(&beta, &in_basis, &mut resid);
        let xi = self.xi(tau, &xh, &resid, &in_basis)?;

        let a = beta[0];
        let b = beta.rows(1, k - 1).into_owned();
        let c = u - &gamma * &b;
        let scale = z.amax().max(1.0);
        let zero_tol = 1e-10 * scale;
        let mut mu = DVector::zeros(n);
        let mut objective = 0.0;
        let (mut n_neg, mut n_pos, mut n_zero) = (0, 0, 0);
        for i in 0..n {
            let r = resid[i];
            if in_basis[i] {
                n_zero += 1;
            } else if r.abs() <= zero_tol {
                n_zero += 1;
            } else if r < 0.0 {
                n_neg += 1;
            } else {
                n_pos += 1;
            }
            objective += if r < 0.0 { (tau - 1.0) * r } else { tau * r };
            if !in_basis[i] {
                mu[i] = if r < 0.0 { 1.0 - tau } else { -tau };
            }
        }
        for (r, &i) in basis.iter().enumerate() {
            mu[i] = xi[r];
        }
        let zmu = z.transpose() * &mu;
        let lambda_d = -u.dot(&zmu);
        let strict = xi.iter().all(|&v| v > -tau + OPT_TOL && v < 1.0 - tau - OPT_TOL);
        Ok(Solution {
            tau,
            u: u.clone(),
            gamma,
            a,
            b,
            c,
            residuals: DVector::from_vec(resid),
            objective,
            mu,
            lambda_d,
            lambda: lambda_d / n as f64,
            basis,
            xi,
            n_neg,
            n_pos,
            n_zero,
            nonunique: !strict,
            jittered: false,
            iterations,
        })
    }
}

/// Result of checking the optimality conditions of a candidate `(a, c)`.
#[derive(Debug, Clone)]
pub struct CertificateReport {
    pub n_neg: usize,
    pub n_pos: usize,
    pub n_zero: usize,
    /// `N/n <= tau <= (N + Z0)/n`.
    pub sandwich_ok: bool,
    /// Componentwise mass-balance inequality on zero-residual points.
    pub balance_ok: bool,
    /// The basis points all have zero residual.
    pub basis_fitted: bool,
    /// Optimality vector on the basis.
    pub xi: DVector<f64>,
    /// `-tau <= xi <= 1 - tau`.
    pub xi_ok: bool,
    /// Strict version of `xi_ok`: the optimum is unique.
    pub strict: bool,
    /// Mean check loss at `(a, c)`.
    pub lambda: f64,
}

impl CertificateReport {
    pub fn optimal(&self) -> bool {
        self.sandwich_ok && self.balance_ok && self.basis_fitted && self.xi_ok
    }

    pub fn unique(&self) -> bool {
        self.optimal() && self.strict
    }
}

/// Checks the optimality certificate of the hyperplane `c'z = a` with
/// basis `basis`, using complement `gamma` of `u`.
pub fn verify_certificate(
    data: &DMatrix<f64>,
    tau: f64,
    u: &Direction,
    gamma: &DMatrix<f64>,
    a: f64,
    c: &DVector<f64>,
    basis: &[usize],
) -> Result<CertificateReport> {
    check_tau(tau)?;
    check_data(data)?;
    let (n, k) = data.shape();
    if basis.len() != k || basis.iter().any(|&i| i >= n) {
        return Err(Error::InvalidInput("basis must hold k valid indices".into()));
    }
    let uv = u.as_vector();
    let scale = data.amax().max(1.0) * (1.0 + c.amax());
    let tol = 1e-9 * scale;
    let resid = data * c - DVector::from_element(n, a);
    let nf = n as f64;
    let (mut n_neg, mut n_pos, mut n_zero) = (0, 0, 0);
    let mut lambda = 0.0;
    let mut middle = DVector::zeros(k);
    let mut lower = DVector::zeros(k);
    let mut upper = DVector::zeros(k);
    for i in 0..n {
        let r = resid[i];
        let zi = data.row(i).transpose();
        lambda += if r < 0.0 { (tau - 1.0) * r } else { tau * r };
        middle += &zi * tau;
        if r.abs() <= tol {
            n_zero += 1;
            lower -= zi.map(|v| (-v).max(0.0));
            upper += zi.map(|v| v.max(0.0));
        } else if r < 0.0 {
            n_neg += 1;
            middle -= &zi;
        } else {
            n_pos += 1;
        }
    }
    lambda /= nf;
    let middle = middle / nf - uv * lambda;
    let lower = lower / nf;
    let upper = upper / nf;
    let ctol = 1e-10 * data.amax().max(1.0);
    let balance_ok = (0..k).all(|j| lower[j] - ctol <= middle[j] && middle[j] <= upper[j] + ctol);
    let sandwich_ok = n_neg as f64 / nf <= tau + 1e-12 && tau <= (n_neg + n_zero) as f64 / nf + 1e-12;

    let basis_fitted = basis.iter().all(|&i| resid[i].abs() <= tol);
    let mut xmat = DMatrix::zeros(k, k);
    let proj = data * gamma;
    for (r, &i) in basis.iter().enumerate() {
        xmat[(r, 0)] = 1.0;
        for j in 1..k {
            xmat[(r, j)] = proj[(i, j - 1)];
        }
    }
    let mut w = DVector::zeros(k);
    for i in 0..n {
        if basis.contains(&i) {
            continue;
        }
        let psi = tau - if resid[i] < -tol { 1.0 } else { 0.0 };
        w[0] += psi;
        for j in 1..k {
            w[j] += psi * proj[(i, j - 1)];
        }
    }
    let xi = xmat
        .transpose()
        .lu()
        .solve(&w)
        .ok_or_else(|| Error::GeneralPosition(basis.to_vec()))?;
    let xi_ok = basis_fitted && xi.iter().all(|&v| v >= -tau - OPT_TOL && v <= 1.0 - tau + OPT_TOL);
    let strict = basis_fitted && xi.iter().all(|&v| v > -tau + OPT_TOL && v < 1.0 - tau - OPT_TOL);
    Ok(CertificateReport { n_neg, n_pos, n_zero, sandwich_ok, balance_ok, basis_fitted, xi, xi_ok, strict, lambda })
}

/// A uniformly random nonsingular starting basis.
pub fn random_basis(data: &DMatrix<f64>, u: &Direction, rng: &mut impl Rng) -> Result<Vec<usize>> {
    let (n, k) = data.shape();
    let gamma = orthobasis(u);
    let design = Design::new(data, u.as_vector(), &gamma);
    for _ in 0..1000 {
        let mut h: Vec<usize> = rand::seq::index::sample(rng, n, k).into_vec();
        h.sort_unstable();
        if design.basis_matrix(&h).is_ok() {
            return Ok(h);
        }
    }
    Err(Error::GeneralPosition(Vec::new()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s3() -> DMatrix<f64> {
        DMatrix::from_row_slice(3, 2, &[0., 0., 1., 0., 0., 1.])
    }

    #[test]
    fn three_point_example() {
        let u = Direction::from_slice(&[0.0, 1.0]).unwrap();
        let s = solve(&s3(), 0.3, &u, &SolveOptions::default()).unwrap();
        assert!(s.a.abs() < 1e-15);
        assert!((s.c[0]).abs() < 1e-15 && (s.c[1] - 1.0).abs() < 1e-15);
        assert!((s.lambda - 0.1).abs() < 1e-15);
        let expect_mu = [0.3, 0.0, -0.3];
        for i in 0..3 {
            assert!((s.mu[i] - expect_mu[i]).abs() < 1e-15, "mu = {:?}", s.mu);
        }
        assert_eq!(s.basis, vec![0, 1]);
        assert!((s.xi[0] - 0.3).abs() < 1e-15 && s.xi[1].abs() < 1e-15);
        assert!(!s.nonunique);
    }

    #[test]
    fn three_point_certificate() {
        let u = Direction::from_slice(&[0.0, 1.0]).unwrap();
        let g = orthobasis(&u);
        let c = DVector::from_vec(vec![0.0, 1.0]);
        let rep = verify_certificate(&s3(), 0.3, &u, &g, 0.0, &c, &[0, 1]).unwrap();
        assert!(rep.optimal() && rep.unique());
        assert!((rep.xi[0] - 0.3).abs() < 1e-15 && rep.xi[1].abs() < 1e-15);
        let bad = verify_certificate(&s3(), 0.3, &u, &g, 0.1, &c, &[0, 1]).unwrap();
        assert!(!bad.sandwich_ok && !bad.optimal());
    }

    #[test]
    fn univariate_quantiles() {
        let d = DMatrix::from_column_slice(5, 1, &[1., 2., 3., 4., 5.]);
        let up = solve(&d, 0.3, &Direction::from_slice(&[1.0]).unwrap(), &SolveOptions::default()).unwrap();
        assert_eq!(up.a, 2.0);
        assert_eq!(up.c[0], 1.0);
        let down = solve(&d, 0.3, &Direction::from_slice(&[-1.0]).unwrap(), &SolveOptions::default()).unwrap();
        // The hyperplane -z = a sits at the 0.7-quantile z = 4.
        assert_eq!(down.a / down.c[0], 4.0);
    }

    #[test]
    fn integer_level_needs_opt_in() {
        let d = DMatrix::from_column_slice(5, 1, &[1., 2., 3., 4., 5.]);
        let u = Direction::from_slice(&[1.0]).unwrap();
        assert!(matches!(solve(&d, 0.4, &u, &SolveOptions::default()), Err(Error::Nonunique(_))));
        let s = solve(&d, 0.4, &u, &SolveOptions { allow_degenerate: true, ..Default::default() }).unwrap();
        assert!(s.nonunique);
    }

    #[test]
    fn bad_inputs() {
        let u = Direction::from_slice(&[0.0, 1.0]).unwrap();
        assert!(matches!(solve(&s3(), 1.0, &u, &SolveOptions::default()), Err(Error::InvalidTau(_))));
        assert!(matches!(solve(&s3(), 0.0, &u, &SolveOptions::default()), Err(Error::InvalidTau(_))));
        let u3 = Direction::from_slice(&[0.0, 1.0, 0.0]).unwrap();
        assert!(matches!(solve(&s3(), 0.3, &u3, &SolveOptions::default()), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn collinear_data_needs_jitter() {
        // All points on one line: the optimal hyperplane fits all of them.
        let d = DMatrix::from_row_slice(5, 2, &[0., 0., 1., 0., 2., 0., 3., 0., 4., 0.]);
        let u = Direction::from_slice(&[0.0, 1.0]).unwrap();
        assert!(matches!(solve(&d, 0.3, &u, &SolveOptions::default()), Err(Error::GeneralPosition(_))));
        let s = solve(&d, 0.3, &u, &SolveOptions { jitter: Some(7), ..Default::default() }).unwrap();
        assert!(s.jittered);
        assert!(s.a.abs() < 1e-7);
    }
}
