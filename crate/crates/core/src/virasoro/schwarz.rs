use serde::{Deserialize, Serialize};

use crate::config::AnnulusConfig;
use crate::error::{Error, Result};
use crate::factorization::harmonic_mode_split;
use crate::linalg;
use crate::loop_algebra::{Annulus, DoubleLoop, LaurentLoop};

use super::action::log_derivative;
use super::field::VectorFieldLambda;

/// Tolerance for the real-axis reality condition `E(λ) E(λ̄)^* = I`.
pub const REAL_REALITY_TOL: f64 = 1e-10;

/// Pair of real fields acting independently at 0 (`w`) and at ∞ (`v`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VirasoroPairR {
    pub w: VectorFieldLambda,
    pub v: VectorFieldLambda,
}

impl VirasoroPairR {
    pub fn new(w: VectorFieldLambda, v: VectorFieldLambda) -> Result<Self> {
        if !w.has_real_coeffs() || !v.has_real_coeffs() {
            return Err(Error::Construction("real Virasoro pair needs real coefficients".into()));
        }
        Ok(VirasoroPairR { w, v })
    }
}

/// `max |E(λ) E(λ̄)^* - I|` on the boundary circles of `e`.
pub fn real_reality_residual(e: &LaurentLoop, samples: usize) -> Result<f64> {
    let mut worst = 0.0f64;
    for r in e.annulus().boundary_radii() {
        let s = e.sample_circle(r, samples)?;
        for m in 0..samples {
            let conj = &s[(samples - m) % samples];
            worst = worst.max(linalg::dist_to_identity(&(&s[m] * conj.adjoint())));
        }
    }
    Ok(worst)
}

/// `E · Π^+` of `E^{-1} u E'` placed on one circle only.
fn one_side(x: &LaurentLoop, e: &LaurentLoop, u: &VectorFieldLambda, at_zero: bool) -> Result<LaurentLoop> {
    let a = x.annulus();
    let live = x.mul_scalar_series(&u.series());
    let dead = LaurentLoop::zeros(x.n(), live.order(), a);
    let (near0, near_inf) = if at_zero { (live, dead) } else { (dead, live) };
    let pair = DoubleLoop::new(
        near0.with_annulus(Annulus::circle(a.r_in)?),
        near_inf.with_annulus(Annulus::circle(a.r_out)?),
    )?;
    e.mul(&harmonic_mode_split(&pair)?.0)
}

/// Decoupled action `δ_{v,w} E = E Π^+(E^{-1} w E', 0) + E Π^+(0, E^{-1} v E')`.
pub fn schwarz_action(pair: &VirasoroPairR, e: &LaurentLoop, cfg: &AnnulusConfig) -> Result<LaurentLoop> {
    let reality = real_reality_residual(e, cfg.samples)?;
    if !(reality <= REAL_REALITY_TOL) {
        return Err(Error::RealityViolation(reality));
    }
    let x = log_derivative(e, cfg)?;
    let mut out = LaurentLoop::zeros(e.n(), 0, e.annulus());
    if !pair.w.is_zero() {
        out = out.add(&one_side(&x, e, &pair.w, true)?)?;
    }
    if !pair.v.is_zero() {
        out = out.add(&one_side(&x, e, &pair.v, false)?)?;
    }
    Ok(out)
}

/// Random loop satisfying `E(λ) E(λ̄)^* = I`: the pointwise exponential of a loop
/// with skew-Hermitian coefficients.
pub fn random_real_loop<R: rand::Rng>(
    rng: &mut R,
    n: usize,
    order: usize,
    scale: f64,
    eps: f64,
    cfg: &AnnulusConfig,
) -> Result<LaurentLoop> {
    let annulus = Annulus::punctured(eps)?;
    let mut x = LaurentLoop::zeros(n, order, annulus);
    for k in -(order as i64)..=order as i64 {
        let s = scale * eps.powi(k.unsigned_abs() as i32);
        *x.coeff_mut(k) = crate::random::skew_hermitian(rng, n, s);
    }
    x.exp(cfg.samples, cfg.max_order())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::C64;
    use crate::random::named_rng;

    #[test]
    fn zero_pair_and_identity_give_zero() {
        let cfg = AnnulusConfig::default();
        let e = random_real_loop(&mut named_rng(1, "real"), 2, 2, 0.2, 0.5, &cfg).unwrap();
        assert!(real_reality_residual(&e, 256).unwrap() <= 1e-12);
        let zero = VirasoroPairR::new(VectorFieldLambda::zero(), VectorFieldLambda::zero()).unwrap();
        assert_eq!(schwarz_action(&zero, &e, &cfg).unwrap().coeff_norm(), 0.0);
        let id = LaurentLoop::identity(2, Annulus::punctured(0.5).unwrap());
        let pair = VirasoroPairR::new(VectorFieldLambda::generator(1), VectorFieldLambda::generator(-2)).unwrap();
        assert_eq!(schwarz_action(&pair, &id, &cfg).unwrap().coeff_norm(), 0.0);
    }

    #[test]
    fn rejects_complex_fields() {
        let w = VectorFieldLambda::from_half(&[C64::new(0.0, 1.0)]);
        assert!(VirasoroPairR::new(w, VectorFieldLambda::zero()).is_err());
    }
}
