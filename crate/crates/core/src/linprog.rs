//! Small dense linear programs with few variables and many constraints.
//!
//! `maximize c'x subject to A x <= b` with `x` free is solved through its
//! dual `minimize b'y subject to A'y = c, y >= 0`, whose tableau has only
//! `dim(x)` rows. The primal point is read off the simplex multipliers.
//! Used by the geometry layer (interior points, boundedness probes); the
//! quantile program itself has a dedicated solver in [`crate::solver`].

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

const PIVOT_TOL: f64 = 1e-11;
const MAX_ITER: usize = 200_000;

#[derive(Debug, Clone)]
pub struct LpOutcome {
    pub x: DVector<f64>,
    pub value: f64,
}

/// Maximises `c'x` over `{x : A x <= b}`.
///
/// Returns [`Error::Unbounded`] when the dual is infeasible (which for the
/// nonempty feasible sets used in this crate means the primal is unbounded)
/// and [`Error::Infeasible`] when the dual is unbounded.
pub fn maximize(c: &DVector<f64>, a: &DMatrix<f64>, b: &DVector<f64>) -> Result<LpOutcome> {
    let d = c.len();
    let m = a.nrows();
    if a.ncols() != d {
        return Err(Error::DimensionMismatch { expected: d, found: a.ncols() });
    }
    if b.len() != m {
        return Err(Error::DimensionMismatch { expected: m, found: b.len() });
    }
    let scale_c = c.amax().max(1.0);
    let scale_a = a.amax().max(1.0);

    // Row-major tableau: d rows, m real columns, d artificial columns, rhs.
    let width = m + d + 1;
    let rhs = m + d;
    let mut t = vec![0.0; d * width];
    let mut sign = vec![1.0; d];
    for i in 0..d {
        sign[i] = if c[i] < 0.0 { -1.0 } else { 1.0 };
        for j in 0..m {
            t[i * width + j] = sign[i] * a[(j, i)];
        }
        t[i * width + m + i] = 1.0;
        t[i * width + rhs] = sign[i] * c[i];
    }
    let mut basis: Vec<usize> = (m..m + d).collect();

    let phase1_cost = |j: usize| if j >= m && j < m + d { 1.0 } else { 0.0 };
    run_phase(&mut t, &mut basis, d, m, width, &phase1_cost, true, scale_a)?;

    let infeas: f64 = (0..d)
        .filter(|&i| basis[i] >= m)
        .map(|i| t[i * width + rhs])
        .sum();
    if infeas > 1e-9 * scale_c {
        return Err(Error::Unbounded);
    }
    // Drive zero-level artificials out of the basis where possible.
    for i in 0..d {
        if basis[i] >= m {
            if let Some(j) = (0..m).find(|&j| t[i * width + j].abs() > 1e-9 * scale_a) {
                pivot(&mut t, d, width, i, j);
                basis[i] = j;
            }
        }
    }

    let phase2_cost = |j: usize| if j < m { b[j] } else { 0.0 };
    run_phase(&mut t, &mut basis, d, m, width, &phase2_cost, false, scale_a)?;

    let mut x = DVector::zeros(d);
    for r in 0..d {
        let mut acc = 0.0;
        for i in 0..d {
            acc += phase2_cost(basis[i]) * t[i * width + m + r];
        }
        x[r] = acc * sign[r];
    }
    let value = c.dot(&x);
    Ok(LpOutcome { x, value })
}

fn pivot(t: &mut [f64], d: usize, width: usize, row: usize, col: usize) {
    let p = t[row * width + col];
    for v in &mut t[row * width..(row + 1) * width] {
        *v /= p;
    }
    for i in 0..d {
        if i == row {
            continue;
        }
        let f = t[i * width + col];
        if f != 0.0 {
            for j in 0..width {
                t[i * width + j] -= f * t[row * width + j];
            }
            t[i * width + col] = 0.0;
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn run_phase(
    t: &mut [f64],
    basis: &mut [usize],
    d: usize,
    m: usize,
    width: usize,
    cost: &dyn Fn(usize) -> f64,
    phase1: bool,
    scale: f64,
) -> Result<()> {
    let rhs = m + d;
    let ncols = if phase1 { m + d } else { m };
    let mut degenerate_run = 0usize;
    let bland_after = 50 * (d + 1);
    for _ in 0..MAX_ITER {
        let mut entering = None;
        let mut best = -1e-10 * scale;
        for j in 0..ncols {
            if basis.contains(&j) {
                continue;
            }
            let mut rc = cost(j);
            for i in 0..d {
                rc -= cost(basis[i]) * t[i * width + j];
            }
            if degenerate_run > bland_after {
                if rc < -1e-10 * scale {
                    entering = Some(j);
                    break;
                }
            } else if rc < best {
                best = rc;
                entering = Some(j);
            }
        }
        let Some(col) = entering else { return Ok(()) };
        let mut leave: Option<(usize, f64)> = None;
        for i in 0..d {
            let e = t[i * width + col];
            if e > PIVOT_TOL {
                let ratio = t[i * width + rhs] / e;
                match leave {
                    None => leave = Some((i, ratio)),
                    Some((li, lr)) => {
                        if ratio < lr - 1e-14 || (ratio <= lr + 1e-14 && basis[i] < basis[li]) {
                            leave = Some((i, ratio));
                        }
                    }
                }
            }
        }
        let Some((row, ratio)) = leave else {
            return Err(if phase1 { Error::Numerical("phase one unbounded".into()) } else { Error::Infeasible });
        };
        if ratio.abs() < 1e-14 {
            degenerate_run += 1;
        } else {
            degenerate_run = 0;
        }
        pivot(t, d, width, row, col);
        basis[row] = col;
    }
    Err(Error::Numerical("dense simplex iteration limit".into()))
}
