//! Seeded generators for randomized suites and property tests.
//!
//! Streams are named: `named_rng(seed, "birkhoff")` and `named_rng(seed, "iwasawa")`
//! are independent, and adding a new stream never perturbs existing ones.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use crate::error::Result;
use crate::linalg::{self, CMatrix, C64};
use crate::loop_algebra::{Annulus, DoubleLoop, LaurentLoop};

pub fn named_rng(seed: u64, name: &str) -> ChaCha8Rng {
    let mut hasher = Sha256::new();
    hasher.update(seed.to_le_bytes());
    hasher.update(name.as_bytes());
    ChaCha8Rng::from_seed(hasher.finalize().into())
}

pub fn complex<R: Rng>(rng: &mut R, scale: f64) -> C64 {
    C64::new(rng.gen_range(-scale..=scale), rng.gen_range(-scale..=scale))
}

pub fn matrix<R: Rng>(rng: &mut R, n: usize, scale: f64) -> CMatrix {
    CMatrix::from_fn(n, n, |_, _| complex(rng, scale))
}

pub fn traceless_matrix<R: Rng>(rng: &mut R, n: usize, scale: f64) -> CMatrix {
    linalg::traceless(&matrix(rng, n, scale))
}

pub fn skew_hermitian<R: Rng>(rng: &mut R, n: usize, scale: f64) -> CMatrix {
    let m = traceless_matrix(rng, n, scale);
    (&m - m.adjoint()) * C64::new(0.5, 0.0)
}

/// Random unimodular matrix: a random matrix divided by an `n`-th root of its determinant.
pub fn unimodular<R: Rng>(rng: &mut R, n: usize) -> CMatrix {
    loop {
        let m = matrix(rng, n, 1.0);
        let d = linalg::det(&m);
        if d.norm() > 1e-2 {
            return m * d.powf(-1.0 / n as f64);
        }
    }
}

/// Random Laurent loop with every `|c_k| <= scale / w_k`, so each term is at most
/// `scale` on the annulus.
pub fn laurent<R: Rng>(rng: &mut R, n: usize, order: usize, scale: f64, annulus: Annulus) -> LaurentLoop {
    let mut l = LaurentLoop::zeros(n, order, annulus);
    for k in -(order as i64)..=order as i64 {
        *l.coeff_mut(k) = matrix(rng, n, scale / annulus.weight(k));
    }
    l
}

/// Random traceless algebra element satisfying the algebra reality condition,
/// with modes `|k| <= order` whose terms are at most `scale` on both circles.
pub fn hmrc_algebra_pair<R: Rng>(
    rng: &mut R,
    n: usize,
    order: usize,
    scale: f64,
    eps: f64,
) -> Result<DoubleLoop> {
    let mut near0 = LaurentLoop::zeros(n, order, Annulus::circle(eps)?);
    for k in -(order as i64)..=order as i64 {
        *near0.coeff_mut(k) = traceless_matrix(rng, n, scale) * C64::new(eps.powi(-k as i32), 0.0);
    }
    let near_inf = near0.reflect_adjoint().scale(C64::new(-1.0, 0.0));
    DoubleLoop::new(near0, near_inf)
}

/// Random group element satisfying the group reality condition: the pointwise
/// exponential of [`hmrc_algebra_pair`], re-expanded at `out_order`.
pub fn hmrc_group_pair<R: Rng>(
    rng: &mut R,
    n: usize,
    order: usize,
    scale: f64,
    eps: f64,
    samples: usize,
    out_order: usize,
) -> Result<DoubleLoop> {
    let w = hmrc_algebra_pair(rng, n, order, scale, eps)?;
    w.map_pair(|l| l.exp(samples, out_order))
}

/// Random algebra loop on `ε <= |λ| <= 1/ε` with `X(1) = 0` and the algebra reality condition.
pub fn normalized_algebra_loop<R: Rng>(
    rng: &mut R,
    n: usize,
    order: usize,
    scale: f64,
    eps: f64,
) -> Result<LaurentLoop> {
    let annulus = Annulus::punctured(eps)?;
    let mut x = LaurentLoop::zeros(n, order, annulus);
    let mut sum = CMatrix::zeros(n, n);
    for k in 1..=order as i64 {
        let c = traceless_matrix(rng, n, scale * eps.powi(k as i32));
        *x.coeff_mut(-k) = -c.adjoint();
        sum += &c - c.adjoint();
        *x.coeff_mut(k) = c;
    }
    *x.coeff_mut(0) = -sum;
    Ok(x)
}

/// Random element of the normalized plus group: `exp` of [`normalized_algebra_loop`].
pub fn normalized_group_loop<R: Rng>(
    rng: &mut R,
    n: usize,
    order: usize,
    scale: f64,
    eps: f64,
    samples: usize,
    out_order: usize,
) -> Result<LaurentLoop> {
    normalized_algebra_loop(rng, n, order, scale, eps)?.exp(samples, out_order)
}
