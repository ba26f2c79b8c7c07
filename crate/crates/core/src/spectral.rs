//! FFT plumbing for matrix-valued samples on circles centred at 0.

use std::cell::RefCell;
use std::f64::consts::PI;

use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::linalg::{CMatrix, C64};

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

pub fn check_power_of_two(n: usize) -> Result<()> {
    if n == 0 || !n.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(n));
    }
    Ok(())
}

/// `N` equally spaced points `r e^{2 pi i m / N}`.
pub fn circle_points(r: f64, n: usize) -> Vec<C64> {
    (0..n)
        .map(|m| C64::from_polar(r, 2.0 * PI * m as f64 / n as f64))
        .collect()
}

/// Storage slot of mode `k` in an FFT-ordered array of length `n`.
pub fn slot(k: i64, n: usize) -> usize {
    k.rem_euclid(n as i64) as usize
}

/// Centred mode index of FFT slot `m`, in `[-n/2, n/2 - 1]`.
pub fn centered(m: usize, n: usize) -> i64 {
    if m < n / 2 {
        m as i64
    } else {
        m as i64 - n as i64
    }
}

fn transform(input: &[CMatrix], inverse: bool, scale: f64) -> Vec<CMatrix> {
    let len = input.len();
    if len == 0 {
        return Vec::new();
    }
    let (rows, cols) = input[0].shape();
    let fft = PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        if inverse {
            p.plan_fft_inverse(len)
        } else {
            p.plan_fft_forward(len)
        }
    });
    let mut out = vec![CMatrix::zeros(rows, cols); len];
    let mut buf = vec![C64::new(0.0, 0.0); len];
    for j in 0..cols {
        for i in 0..rows {
            for (b, m) in buf.iter_mut().zip(input) {
                *b = m[(i, j)];
            }
            fft.process(&mut buf);
            for (o, b) in out.iter_mut().zip(&buf) {
                o[(i, j)] = *b * scale;
            }
        }
    }
    out
}

/// Discrete Fourier modes `(1/N) sum_m s_m e^{-2 pi i k m / N}`, FFT ordered.
pub fn forward_modes(samples: &[CMatrix]) -> Vec<CMatrix> {
    let n = samples.len().max(1);
    transform(samples, false, 1.0 / n as f64)
}

/// Values `sum_k a_k e^{2 pi i k m / N}` from FFT-ordered modes.
pub fn inverse_modes(modes: &[CMatrix]) -> Vec<CMatrix> {
    transform(modes, true, 1.0)
}
