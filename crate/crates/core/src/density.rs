//! Product-type population models and quadrature in a direction frame.
//!
//! Population quantities are integrals over `z = s u + Gamma x`, with `s`
//! the coordinate along `u` and `x` in the orthogonal complement. The
//! region below a hyperplane `s < a + b'x` is handled by splitting the inner
//! `s`-integral at the hyperplane. The inner and outer rules are
//! Gauss-Legendre of a given order on the support box (truncated for
//! unbounded marginals). In the plane the outer `x`-range is split at every
//! kink of the integrand: box corners projected onto `Gamma`, and points
//! where the hyperplane crosses a box face. Piecewise-smooth integrands are
//! then integrated to near machine precision.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};

use crate::error::{Error, Result};

/// Truncation of Gaussian marginals, in standard deviations.
pub const GAUSS_TRUNC: f64 = 8.0;
/// Upper truncation of the centred exponential marginal.
pub const EXP_TRUNC: f64 = 36.0;
/// Default quadrature order per axis.
pub const DEFAULT_ORDER: usize = 64;

/// Absolutely continuous model with a product-form (or mixture of
/// product-form) density on `R^k`.
#[derive(Debug, Clone, PartialEq)]
pub enum DensityModel {
    /// Uniform on `[-h, h]^k`.
    UniformBox { k: usize, half_width: f64 },
    /// Independent `N(0, sigma^2)` marginals.
    Gaussian { k: usize, sigma: f64 },
    /// Independent `Exp(1) - 1` marginals (mean zero, right-skewed).
    CenteredExponential { k: usize },
    /// Mixture of isotropic Gaussians `N(mean * 1, var * I)`.
    GaussianMixture { k: usize, components: Vec<MixtureComponent> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct MixtureComponent {
    pub weight: f64,
    pub mean: f64,
    pub var: f64,
}

fn normal_pdf(x: f64, mean: f64, var: f64) -> f64 {
    let d = x - mean;
    (-(d * d) / (2.0 * var)).exp() / (2.0 * std::f64::consts::PI * var).sqrt()
}

impl DensityModel {
    pub fn uniform_square() -> Self {
        DensityModel::UniformBox { k: 2, half_width: 0.5 }
    }

    pub fn dim(&self) -> usize {
        match self {
            DensityModel::UniformBox { k, .. }
            | DensityModel::Gaussian { k, .. }
            | DensityModel::CenteredExponential { k }
            | DensityModel::GaussianMixture { k, .. } => *k,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match self {
            DensityModel::UniformBox { k, half_width } => *k > 0 && *half_width > 0.0,
            DensityModel::Gaussian { k, sigma } => *k > 0 && *sigma > 0.0,
            DensityModel::CenteredExponential { k } => *k > 0,
            DensityModel::GaussianMixture { k, components } => {
                *k > 0
                    && !components.is_empty()
                    && components.iter().all(|c| c.weight > 0.0 && c.var > 0.0)
                    && (components.iter().map(|c| c.weight).sum::<f64>() - 1.0).abs() < 1e-12
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidInput(format!("invalid density model {self:?}")))
        }
    }

    pub fn pdf(&self, z: &DVector<f64>) -> f64 {
        match self {
            DensityModel::UniformBox { half_width, .. } => {
                if z.iter().all(|v| v.abs() <= *half_width) {
                    (2.0 * half_width).powi(-(z.len() as i32))
                } else {
                    0.0
                }
            }
            DensityModel::Gaussian { sigma, .. } => z.iter().map(|&v| normal_pdf(v, 0.0, sigma * sigma)).product(),
            DensityModel::CenteredExponential { .. } => {
                if z.iter().all(|&v| v >= -1.0) {
                    (-(z.sum() + z.len() as f64)).exp()
                } else {
                    0.0
                }
            }
            DensityModel::GaussianMixture { components, .. } => components
                .iter()
                .map(|c| c.weight * z.iter().map(|&v| normal_pdf(v, c.mean, c.var)).product::<f64>())
                .sum(),
        }
    }

    /// Box carrying all but a negligible part of the mass.
    pub fn support_box(&self) -> (f64, f64) {
        match self {
            DensityModel::UniformBox { half_width, .. } => (-half_width, *half_width),
            DensityModel::Gaussian { sigma, .. } => (-GAUSS_TRUNC * sigma, GAUSS_TRUNC * sigma),
            DensityModel::CenteredExponential { .. } => (-1.0, EXP_TRUNC),
            DensityModel::GaussianMixture { components, .. } => {
                let lo = components.iter().map(|c| c.mean - GAUSS_TRUNC * c.var.sqrt()).fold(f64::INFINITY, f64::min);
                let hi = components.iter().map(|c| c.mean + GAUSS_TRUNC * c.var.sqrt()).fold(f64::NEG_INFINITY, f64::max);
                (lo, hi)
            }
        }
    }

    /// Draws `n` observations as the rows of a matrix.
    pub fn sample(&self, n: usize, rng: &mut impl Rng) -> DMatrix<f64> {
        let k = self.dim();
        match self {
            DensityModel::UniformBox { half_width, .. } => {
                DMatrix::from_fn(n, k, |_, _| rng.gen_range(-*half_width..*half_width))
            }
            DensityModel::Gaussian { sigma, .. } => DMatrix::from_fn(n, k, |_, _| {
                let g: f64 = StandardNormal.sample(rng);
                sigma * g
            }),
            DensityModel::CenteredExponential { .. } => DMatrix::from_fn(n, k, |_, _| {
                let e: f64 = Exp1.sample(rng);
                e - 1.0
            }),
            DensityModel::GaussianMixture { components, .. } => {
                let mut out = DMatrix::zeros(n, k);
                for i in 0..n {
                    let mut pick = rng.gen::<f64>();
                    let mut comp = &components[components.len() - 1];
                    for c in components {
                        if pick < c.weight {
                            comp = c;
                            break;
                        }
                        pick -= c.weight;
                    }
                    for j in 0..k {
                        let g: f64 = StandardNormal.sample(rng);
                        out[(i, j)] = comp.mean + comp.var.sqrt() * g;
                    }
                }
                out
            }
        }
    }
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(order: usize) -> (Vec<f64>, Vec<f64>) {
    let n = order;
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..(n + 1) / 2 {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for j in 2..=n {
                let p2 = ((2 * j - 1) as f64 * z * p1 - (j - 1) as f64 * p0) / j as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 1 { z } else { p1 };
            let pn1 = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (z * pn - pn1) / (z * z - 1.0);
            let dz = pn / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

/// Gauss-Legendre rule on `[lo, hi]` appended to `nodes`.
fn push_rule(lo: f64, hi: f64, rule: &(Vec<f64>, Vec<f64>), nodes: &mut Vec<(f64, f64)>) {
    if hi <= lo {
        return;
    }
    let half = 0.5 * (hi - lo);
    let mid = 0.5 * (hi + lo);
    for (x, w) in rule.0.iter().zip(&rule.1) {
        nodes.push((mid + half * x, half * w));
    }
}

/// Orthonormal frame `(u, Gamma)` with a quadrature order.
pub struct Frame<'a> {
    pub model: &'a DensityModel,
    pub u: &'a DVector<f64>,
    pub gamma: &'a DMatrix<f64>,
    pub order: usize,
}

impl<'a> Frame<'a> {
    fn k(&self) -> usize {
        self.u.len()
    }

    fn point(&self, s: f64, x: &DVector<f64>) -> DVector<f64> {
        self.u * s + self.gamma * x
    }

    /// Range of `s` on which `s u + Gamma x` lies in the support box.
    fn s_range(&self, x: &DVector<f64>) -> Option<(f64, f64)> {
        let (lo, hi) = self.model.support_box();
        let base = self.gamma * x;
        let (mut smin, mut smax) = (f64::NEG_INFINITY, f64::INFINITY);
        for j in 0..self.k() {
            let uj = self.u[j];
            if uj.abs() < 1e-15 {
                if base[j] < lo || base[j] > hi {
                    return None;
                }
                continue;
            }
            let t1 = (lo - base[j]) / uj;
            let t2 = (hi - base[j]) / uj;
            smin = smin.max(t1.min(t2));
            smax = smax.min(t1.max(t2));
        }
        (smin < smax).then_some((smin, smax))
    }

    /// Outer nodes `(x, weight)` on the projection of the support box, split
    /// at kinks induced by the box and by the hyperplane `(a, b)`.
    fn outer_nodes(&self, split: Option<(f64, &DVector<f64>)>) -> Vec<(DVector<f64>, f64)> {
        let k = self.k();
        let m = k - 1;
        if m == 0 {
            return vec![(DVector::zeros(0), 1.0)];
        }
        let (lo, hi) = self.model.support_box();
        let rule = gauss_legendre(self.order);
        let range = |col: usize| {
            let mut a = 0.0;
            let mut b = 0.0;
            for j in 0..k {
                let g = self.gamma[(j, col)];
                a += (g * lo).min(g * hi);
                b += (g * lo).max(g * hi);
            }
            (a, b)
        };
        if m == 1 {
            let (xa, xb) = range(0);
            let mut cuts = vec![xa, xb];
            // Projected box corners.
            for mask in 0..(1usize << k) {
                let c: f64 = (0..k).map(|j| self.gamma[(j, 0)] * if mask >> j & 1 == 1 { hi } else { lo }).sum();
                cuts.push(c);
            }
            // Hyperplane meeting a box face: (a + b x) u_j + gamma_j x = bound.
            if let Some((a, b)) = split {
                for j in 0..k {
                    let slope = b[0] * self.u[j] + self.gamma[(j, 0)];
                    if slope.abs() > 1e-14 {
                        for bound in [lo, hi] {
                            cuts.push((bound - a * self.u[j]) / slope);
                        }
                    }
                }
            }
            cuts.retain(|c| c.is_finite() && *c >= xa && *c <= xb);
            cuts.sort_by(|p, q| p.partial_cmp(q).unwrap());
            cuts.dedup_by(|p, q| (*p - *q).abs() < 1e-14);
            let mut nodes = Vec::new();
            for w in cuts.windows(2) {
                push_rule(w[0], w[1], &rule, &mut nodes);
            }
            return nodes.into_iter().map(|(x, w)| (DVector::from_vec(vec![x]), w)).collect();
        }
        // Tensor rule on the bounding box of the projection.
        let axes: Vec<Vec<(f64, f64)>> = (0..m)
            .map(|col| {
                let (a, b) = range(col);
                let mut nodes = Vec::new();
                push_rule(a, b, &rule, &mut nodes);
                nodes
            })
            .collect();
        let mut out = Vec::new();
        let mut idx = vec![0usize; m];
        loop {
            let x = DVector::from_iterator(m, (0..m).map(|d| axes[d][idx[d]].0));
            let w: f64 = (0..m).map(|d| axes[d][idx[d]].1).product();
            out.push((x, w));
            let mut d = 0;
            loop {
                idx[d] += 1;
                if idx[d] < axes[d].len() {
                    break;
                }
                idx[d] = 0;
                d += 1;
                if d == m {
                    return out;
                }
            }
        }
    }

    /// Visits every node of the volume rule as `(weight * density, z, x, below)`,
    /// where `below` means `s < a + b'x`.
    pub fn visit_volume(&self, a: f64, b: &DVector<f64>, mut f: impl FnMut(f64, &DVector<f64>, &DVector<f64>, bool)) {
        let rule = gauss_legendre(self.order);
        let mut inner = Vec::with_capacity(2 * self.order);
        for (x, wx) in self.outer_nodes(Some((a, b))) {
            let Some((s0, s1)) = self.s_range(&x) else { continue };
            let cut = a + b.dot(&x);
            inner.clear();
            let mid = cut.clamp(s0, s1);
            push_rule(s0, mid, &rule, &mut inner);
            let n_below = inner.len();
            push_rule(mid, s1, &rule, &mut inner);
            for (idx, &(s, ws)) in inner.iter().enumerate() {
                let z = self.point(s, &x);
                let dens = self.model.pdf(&z);
                if dens == 0.0 {
                    continue;
                }
                f(wx * ws * dens, &z, &x, idx < n_below);
            }
        }
    }

    /// Visits the hyperplane `s = a + b'x` as `(weight * density, z, x)`.
    pub fn visit_surface(&self, a: f64, b: &DVector<f64>, mut f: impl FnMut(f64, &DVector<f64>, &DVector<f64>)) {
        for (x, wx) in self.outer_nodes(Some((a, b))) {
            let z = self.point(a + b.dot(&x), &x);
            let dens = self.model.pdf(&z);
            if dens > 0.0 {
                f(wx * dens, &z, &x);
            }
        }
    }
}
