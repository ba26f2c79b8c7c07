//! Small dense complex matrix helpers shared by every module.
//!
//! All norms are the max absolute entry unless a function says otherwise.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<Complex64>;

/// Condition number above which a pointwise inverse is rejected.
pub const MAX_CONDITION: f64 = 1e12;

const LOG_SERIES_TERMS: usize = 60;

pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

pub fn zeros(n: usize) -> CMatrix {
    CMatrix::zeros(n, n)
}

/// Max absolute entry.
pub fn max_norm(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

pub fn max_dist(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter()
        .zip(b.iter())
        .fold(0.0, |acc, (x, y)| acc.max((x - y).norm()))
}

pub fn dist_to_identity(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for j in 0..n {
        for i in 0..n {
            let target = if i == j { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) };
            worst = worst.max((m[(i, j)] - target).norm());
        }
    }
    worst
}

fn norm1(m: &CMatrix) -> f64 {
    (0..m.ncols())
        .map(|j| m.column(j).iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Inverse with a 1-norm condition guard.
pub fn inverse(m: &CMatrix) -> Result<CMatrix> {
    let inv = m
        .clone()
        .try_inverse()
        .ok_or(Error::NotInvertible(f64::INFINITY))?;
    let cond = norm1(m) * norm1(&inv);
    if !cond.is_finite() || cond > MAX_CONDITION {
        return Err(Error::NotInvertible(cond));
    }
    Ok(inv)
}

pub fn commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b - b * a
}

pub fn trace(m: &CMatrix) -> C64 {
    (0..m.nrows()).map(|i| m[(i, i)]).sum()
}

/// Removes the trace part so the result lies in sl(n).
pub fn traceless(m: &CMatrix) -> CMatrix {
    let n = m.nrows();
    let shift = trace(m) / n as f64;
    let mut out = m.clone();
    for i in 0..n {
        out[(i, i)] -= shift;
    }
    out
}

/// Matrix exponential by scaling and squaring with a Taylor core.
pub fn expm(m: &CMatrix) -> CMatrix {
    let n = m.nrows();
    let norm = norm1(m);
    if norm == 0.0 {
        return identity(n);
    }
    let mut squarings = 0u32;
    let mut scale = 1.0;
    while norm * scale > 0.5 {
        scale *= 0.5;
        squarings += 1;
    }
    let a = m * C64::new(scale, 0.0);
    let mut result = identity(n);
    let mut term = identity(n);
    for k in 1..30 {
        term = &term * &a * C64::new(1.0 / k as f64, 0.0);
        result += &term;
        if max_norm(&term) < 1e-18 {
            break;
        }
    }
    for _ in 0..squarings {
        result = &result * &result;
    }
    result
}

/// Principal logarithm of a matrix near the identity via the Mercator series.
///
/// Fails with [`Error::LogDivergence`] when `|D - I| >= 1` or the series has not
/// settled within the term cap.
pub fn logm_near_identity(d: &CMatrix) -> Result<CMatrix> {
    let n = d.nrows();
    let x = d - identity(n);
    let xn = max_norm(&x);
    if xn >= 1.0 {
        return Err(Error::LogDivergence(xn));
    }
    let mut result = x.clone();
    if xn == 0.0 {
        return Ok(result);
    }
    let mut power = x.clone();
    let mut settled = false;
    for k in 2..=LOG_SERIES_TERMS {
        power = &power * &x;
        let sign = if k % 2 == 0 { -1.0 } else { 1.0 };
        let pn = max_norm(&power);
        result += &power * C64::new(sign / k as f64, 0.0);
        if pn / (k as f64) < 1e-18 {
            settled = true;
            break;
        }
    }
    if !settled && max_norm(&power) > 1e-14 {
        return Err(Error::LogDivergence(xn));
    }
    Ok(result)
}

/// Unitary polar factor by the scaled-free Newton iteration `X <- (X + X^{-*}) / 2`.
pub fn polar_unitary(m: &CMatrix) -> Result<CMatrix> {
    let mut x = m.clone();
    for _ in 0..50 {
        let inv_adj = inverse(&x)?.adjoint();
        let next = (&x + inv_adj) * C64::new(0.5, 0.0);
        let step = max_dist(&next, &x);
        x = next;
        if step < 1e-15 {
            break;
        }
    }
    Ok(x)
}

/// `|M^* M - I|`.
pub fn unitarity_defect(m: &CMatrix) -> f64 {
    dist_to_identity(&(m.adjoint() * m))
}

pub fn det(m: &CMatrix) -> C64 {
    m.determinant()
}
