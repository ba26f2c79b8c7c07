use crate::config::AnnulusConfig;
use crate::error::{Error, Result};
use crate::factorization::{harmonic_mode_split, SPLIT_HMRC_TOL};
use crate::linalg::{self, C64};
use crate::loop_algebra::{Annulus, DoubleLoop, HmrcLevel, LaurentLoop};

use super::field::{reality_extend, VectorFieldLambda};

/// Tolerance for `E(1) = I` and the group reality condition on inputs of the action.
pub const MEMBERSHIP_TOL: f64 = 1e-8;

/// Checks that `e` lies in the normalized plus group: trusted on a self-reflected
/// annulus, `E(1) = I` and the group reality condition.
pub fn check_plus_membership(e: &LaurentLoop, samples: usize) -> Result<()> {
    let a = e.annulus();
    if a.is_circle() || !a.is_self_reflected() {
        return Err(Error::InvalidAnnulus { r_in: a.r_in, r_out: a.r_out });
    }
    let normalization = linalg::dist_to_identity(&e.eval(C64::new(1.0, 0.0))?);
    if !(normalization <= MEMBERSHIP_TOL) {
        return Err(Error::NotNormalized(normalization));
    }
    let reality = e.hmrc_residual(HmrcLevel::Group, samples)?;
    if !(reality <= MEMBERSHIP_TOL) {
        return Err(Error::RealityViolation(reality));
    }
    Ok(())
}

/// Intermediate results of the plus-projection pipeline.
#[derive(Clone, Debug)]
pub struct ActionParts {
    /// `E^{-1} δE`, the plus part of `W`.
    pub w_plus: LaurentLoop,
    /// `δE = E · W_plus`.
    pub delta: LaurentLoop,
    /// Algebra reality residual of the pair `W` fed to the projection.
    pub w_reality: f64,
}

/// `E^{-1} dE/dλ` as a loop on the punctured annulus of `e`.
pub fn log_derivative(e: &LaurentLoop, cfg: &AnnulusConfig) -> Result<LaurentLoop> {
    let inv = e.inverse(cfg.samples, cfg.max_order().max(e.order()))?;
    inv.mul(&e.dlambda())
}

/// `W = (E^{-1} v0 E', E^{-1} v_inf E')` on the two boundary circles of `e`.
fn build_pair(x: &LaurentLoop, v0: &VectorFieldLambda, v_inf: &VectorFieldLambda) -> Result<DoubleLoop> {
    let a = x.annulus();
    let near0 = x.mul_scalar_series(&v0.series()).with_annulus(Annulus::circle(a.r_in)?);
    let near_inf = x.mul_scalar_series(&v_inf.series()).with_annulus(Annulus::circle(a.r_out)?);
    DoubleLoop::new(near0, near_inf)
}

/// Plus-projection pipeline with independent fields at 0 and ∞ and no reality check:
/// `δE = E · Π^+(E^{-1} v0 E', E^{-1} v_inf E')`.
pub fn action_parts(
    v0: &VectorFieldLambda,
    v_inf: &VectorFieldLambda,
    e: &LaurentLoop,
    cfg: &AnnulusConfig,
) -> Result<ActionParts> {
    let x = log_derivative(e, cfg)?;
    let w = build_pair(&x, v0, v_inf)?;
    let w_reality = w.hmrc_residual(HmrcLevel::Algebra, cfg.samples)?;
    let (w_plus, _) = harmonic_mode_split(&w)?;
    let delta = e.mul(&w_plus)?;
    Ok(ActionParts { w_plus, delta, w_reality })
}

/// Tangent vector `V^# E = E · Π^+(E^{-1} v E', E^{-1} ṽ E')` with `ṽ` the reality
/// partner of `v` at ∞.
pub fn virasoro_action(v: &VectorFieldLambda, e: &LaurentLoop, cfg: &AnnulusConfig) -> Result<LaurentLoop> {
    Ok(virasoro_action_parts(v, e, cfg)?.delta)
}

/// [`virasoro_action`] with its intermediate pieces.
pub fn virasoro_action_parts(v: &VectorFieldLambda, e: &LaurentLoop, cfg: &AnnulusConfig) -> Result<ActionParts> {
    check_plus_membership(e, cfg.samples)?;
    let parts = action_parts(v, &reality_extend(v), e, cfg)?;
    if !(parts.w_reality <= SPLIT_HMRC_TOL) {
        return Err(Error::RealityViolation(parts.w_reality));
    }
    Ok(parts)
}

/// `L_j^# E` with `L_j = λ^{j+1} d/dλ`.
pub fn generator_action(j: u32, e: &LaurentLoop, cfg: &AnnulusConfig) -> Result<LaurentLoop> {
    virasoro_action(&VectorFieldLambda::generator(j as i32), e, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harmonic::{RationalFn, Uniton, UnitonVariant};

    fn uniton_loop() -> LaurentLoop {
        let u = Uniton::new(RationalFn::identity(), C64::new(0.0, 0.0), UnitonVariant::Positive, 0.5).unwrap();
        u.frame(C64::new(0.4, -0.3)).unwrap()
    }

    #[test]
    fn identity_is_fixed() {
        let cfg = AnnulusConfig::default();
        let e = LaurentLoop::identity(2, Annulus::punctured(0.5).unwrap());
        let d = generator_action(1, &e, &cfg).unwrap();
        assert_eq!(d.coeff_norm(), 0.0);
    }

    #[test]
    fn output_is_normalized_and_real() {
        let cfg = AnnulusConfig::default();
        let mut rng = crate::random::named_rng(3, "action");
        let e = crate::random::normalized_group_loop(&mut rng, 2, 3, 0.3, 0.5, cfg.samples, cfg.max_order()).unwrap();
        for j in 0..3 {
            let parts = virasoro_action_parts(&VectorFieldLambda::generator(j), &e, &cfg).unwrap();
            assert!(parts.w_plus.hmrc_residual(HmrcLevel::Algebra, 256).unwrap() <= 1e-10);
            assert!(linalg::max_norm(&parts.delta.eval(C64::new(1.0, 0.0)).unwrap()) <= 1e-12);
            assert!(parts.delta.coeff_norm() > 1e-3);
        }
    }

    #[test]
    fn unitons_only_move_under_the_euler_field() {
        let cfg = AnnulusConfig::default();
        let e = uniton_loop();
        assert!(generator_action(0, &e, &cfg).unwrap().coeff_norm() > 1e-2);
        for j in 1..4 {
            assert!(generator_action(j, &e, &cfg).unwrap().coeff_norm() <= 1e-13);
        }
    }

    #[test]
    fn rejects_unnormalized_input() {
        let cfg = AnnulusConfig::default();
        let e = uniton_loop().scale(C64::new(0.0, 1.0));
        assert!(matches!(virasoro_action(&VectorFieldLambda::generator(0), &e, &cfg), Err(Error::NotNormalized(_))));
    }
}
