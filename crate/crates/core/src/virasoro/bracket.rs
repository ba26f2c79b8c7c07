use crate::config::AnnulusConfig;
use crate::error::Result;
use crate::linalg::C64;
use crate::loop_algebra::LaurentLoop;

use super::action::{virasoro_action, virasoro_action_parts};
use super::field::{vira_bracket, VectorFieldLambda, DEFAULT_DEGREE_CAP};

/// Default step of the finite-difference commutator.
pub const DEFAULT_BRACKET_STEP: f64 = 1e-4;

/// Points `E · exp(±h E^{-1} V^# E)` on the curve through `E` tangent to `V^#`,
/// truncated back to the working order.
fn curve_points(v: &VectorFieldLambda, e: &LaurentLoop, h: f64, cfg: &AnnulusConfig) -> Result<[LaurentLoop; 2]> {
    let x = virasoro_action_parts(v, e, cfg)?.w_plus;
    let order = cfg.max_order().max(e.order());
    let step = |s: f64| -> Result<LaurentLoop> {
        let g = x.scale(C64::new(s * h, 0.0)).exp(cfg.samples, cfg.max_order())?;
        let p = e.mul(&g)?;
        Ok(if p.order() > order { p.with_order(order) } else { p })
    };
    Ok([step(1.0)?, step(-1.0)?])
}

/// Derivative of the field `W^#` along `V^#` at `E`, by central differences.
fn directional(
    v: &VectorFieldLambda,
    w: &VectorFieldLambda,
    e: &LaurentLoop,
    h: f64,
    cfg: &AnnulusConfig,
) -> Result<LaurentLoop> {
    let [plus, minus] = curve_points(v, e, h, cfg)?;
    let diff = virasoro_action(w, &plus, cfg)?.sub(&virasoro_action(w, &minus, cfg)?)?;
    Ok(diff.scale(C64::new(0.5 / h, 0.0)))
}

/// Finite-difference commutator `D_{W^#} V^# - D_{V^#} W^#` at `E`.
///
/// The action is a right action (`f^# g^# = (g ∘ f)^#`), so this ordering is the one that
/// carries `[V, W]` to its image; the opposite ordering returns `-[V, W]^# E`.
pub fn fd_commutator(
    v: &VectorFieldLambda,
    w: &VectorFieldLambda,
    e: &LaurentLoop,
    h: f64,
    cfg: &AnnulusConfig,
) -> Result<LaurentLoop> {
    directional(w, v, e, h, cfg)?.sub(&directional(v, w, e, h, cfg)?)
}

/// Sup-norm distance, on the boundary circles of `E`, between the finite-difference
/// commutator of `V^#` and `W^#` and the image `[V, W]^# E` of the algebra bracket.
pub fn bracket_representation_check(
    v: &VectorFieldLambda,
    w: &VectorFieldLambda,
    e: &LaurentLoop,
    h: f64,
    cfg: &AnnulusConfig,
) -> Result<f64> {
    let fd = fd_commutator(v, w, e, h, cfg)?;
    let exact = virasoro_action(&vira_bracket(v, w, DEFAULT_DEGREE_CAP)?, e, cfg)?;
    fd.with_annulus(e.annulus()).sample_distance(&exact.with_annulus(e.annulus()), cfg.samples)
}
