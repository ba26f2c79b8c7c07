use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::loop_algebra::{Annulus, DoubleLoop, HmrcLevel, LaurentLoop};

/// Reality residual above which a projection input is rejected.
pub const SPLIT_HMRC_TOL: f64 = 1e-8;

/// Standard circle triple: `V_plus` keeps the strictly negative modes (vanishing at ∞),
/// `V_minus` the nonnegative ones. The two parts sum back to `V` exactly.
pub fn pi_split_standard(v: &LaurentLoop) -> (LaurentLoop, LaurentLoop) {
    let mut plus = LaurentLoop::zeros(v.n(), v.order(), v.annulus());
    let mut minus = plus.clone();
    for (k, c) in v.modes() {
        if k < 0 {
            *plus.coeff_mut(k) = c.clone();
        } else {
            *minus.coeff_mut(k) = c.clone();
        }
    }
    (plus, minus)
}

/// Two-circle split without the reality precondition.
///
/// With near-0 modes `a_k` and near-∞ modes `b_k`, the plus part is
/// `Σ_{k<0} a_k λ^k + Σ_{k>0} b_k λ^k - C` where `C` makes it vanish at `λ = 1`;
/// the minus part is the remainder on each circle, holomorphic at 0 and at ∞.
pub fn harmonic_mode_split(w: &DoubleLoop) -> Result<(LaurentLoop, DoubleLoop)> {
    let n = w.n();
    let (a, b) = (&w.near0, &w.near_inf);
    let (r0, _) = w.radii();
    let order = a.order().max(b.order());
    let mut plus = LaurentLoop::zeros(n, order, Annulus::punctured(r0.min(1.0))?);
    let mut c = CMatrix::zeros(n, n);
    for (k, m) in a.modes().filter(|(k, _)| *k < 0) {
        *plus.coeff_mut(k) = m.clone();
        c += m;
    }
    for (k, m) in b.modes().filter(|(k, _)| *k > 0) {
        *plus.coeff_mut(k) = m.clone();
        c += m;
    }
    *plus.coeff_mut(0) = -&c;

    let mut minus0 = LaurentLoop::zeros(n, order, a.annulus());
    for k in 0..=order as i64 {
        *minus0.coeff_mut(k) = if k == 0 {
            a.coeff_or_zero(0) + &c
        } else {
            a.coeff_or_zero(k) - b.coeff_or_zero(k)
        };
    }
    let mut minus_inf = LaurentLoop::zeros(n, order, b.annulus());
    for k in -(order as i64)..=0 {
        *minus_inf.coeff_mut(k) = if k == 0 {
            b.coeff_or_zero(0) + &c
        } else {
            b.coeff_or_zero(k) - a.coeff_or_zero(k)
        };
    }
    Ok((plus, DoubleLoop::new(minus0, minus_inf)?))
}

/// Harmonic-map triple split; rejects inputs violating the algebra reality condition.
pub fn pi_split_harmonic(w: &DoubleLoop, samples: usize) -> Result<(LaurentLoop, DoubleLoop)> {
    let residual = w.hmrc_residual(HmrcLevel::Algebra, samples)?;
    if residual > SPLIT_HMRC_TOL {
        return Err(Error::RealityViolation(residual));
    }
    harmonic_mode_split(w)
}
