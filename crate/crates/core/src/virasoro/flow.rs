use std::f64::consts::PI;

use serde::Serialize;

use crate::config::AnnulusConfig;
use crate::error::{Error, Result};
use crate::factorization::birkhoff_harmonic_samples;
use crate::harmonic::{probe_constancy, ExtendedSolution, FrameField};
use crate::linalg::{self, CMatrix, C64};
use crate::loop_algebra::LaurentLoop;

use super::action::virasoro_action;
use super::field::VectorFieldLambda;
use super::holomap::HoloMap;

/// `f^# E = P^+(E ∘ f)`. The factorization runs on the near-identity ratio
/// `E^{-1} (E ∘ f)`, sampled as `E(λ)^{-1} E(f(λ))` on the ε-circle and
/// `E(μ)^{-1} E(f̃(μ))` on the 1/ε-circle; its plus factor is then left-multiplied by `E`.
pub fn flow_loop(f: &HoloMap, e: &LaurentLoop, cfg: &AnnulusConfig, tol: f64) -> Result<LaurentLoop> {
    if *f == HoloMap::identity() {
        return Ok(e.clone());
    }
    let eps = e.annulus().r_in;
    f.check_small(eps)?;
    let len = cfg.samples;
    let mut q0 = Vec::with_capacity(len);
    let mut qi = Vec::with_capacity(len);
    for m in 0..len {
        let theta = 2.0 * PI * m as f64 / len as f64;
        let l = C64::from_polar(eps, theta);
        let mu = C64::from_polar(1.0 / eps, theta);
        q0.push(linalg::inverse(&e.eval_any(l)?)? * e.eval_any(f.eval(l))?);
        qi.push(linalg::inverse(&e.eval_any(mu)?)? * e.eval_any(f.eval_induced(mu))?);
    }
    let ratio = birkhoff_harmonic_samples(&q0, &qi, eps, cfg, tol)?.plus;
    let out = e.mul(&ratio.with_annulus(e.annulus()))?;
    let order = cfg.max_order().max(e.order());
    Ok(if out.order() > order { out.with_order(order) } else { out })
}

/// Group action on every node. Nodes whose factorization fails are marked excluded
/// (they keep their input loop); failure at the basepoint is an error. Output loops
/// are truncated to `cfg.order`, with the dropped mass recorded.
pub fn group_action(f: &HoloMap, e: &ExtendedSolution, cfg: &AnnulusConfig, tol: f64) -> Result<ExtendedSolution> {
    f.check_small(e.basepoint_loop().annulus().r_in)?;
    let mut out = e.clone();
    out.variant = None;
    let base = e.grid.basepoint_index();
    for (idx, l) in e.loops.iter().enumerate() {
        if e.excluded[idx] {
            continue;
        }
        match flow_loop(f, l, cfg, tol) {
            Ok(flowed) => {
                out.loops[idx] = if flowed.order() > cfg.order { flowed.with_order(cfg.order) } else { flowed };
            }
            Err(err) if idx == base => return Err(Error::BasepointFailed(Box::new(err))),
            Err(_) => out.excluded[idx] = true,
        }
    }
    Ok(out)
}

/// Frames of a base field pushed through a fixed holomorphic map.
pub struct GroupFlowField<'a> {
    pub base: &'a dyn FrameField,
    pub map: HoloMap,
    pub cfg: AnnulusConfig,
    pub tol: f64,
}

impl FrameField for GroupFlowField<'_> {
    fn frame_at(&self, z: C64) -> Result<LaurentLoop> {
        flow_loop(&self.map, &self.base.frame_at(z)?, &self.cfg, self.tol)
    }
}

/// First-order flow `E + t V^# E`.
pub struct LinearizedFlow<'a> {
    pub base: &'a dyn FrameField,
    pub field: VectorFieldLambda,
    pub t: f64,
    pub cfg: AnnulusConfig,
}

impl FrameField for LinearizedFlow<'_> {
    fn frame_at(&self, z: C64) -> Result<LaurentLoop> {
        let e = self.base.frame_at(z)?;
        let d = virasoro_action(&self.field, &e, &self.cfg)?;
        e.add(&d.scale(C64::new(self.t, 0.0)))
    }
}

/// Non-tangent control `E + t E λ^2 X` with a fixed matrix `X`.
pub struct PerturbedFrame<'a> {
    pub base: &'a dyn FrameField,
    pub x: CMatrix,
    pub t: f64,
}

impl FrameField for PerturbedFrame<'_> {
    fn frame_at(&self, z: C64) -> Result<LaurentLoop> {
        let e = self.base.frame_at(z)?;
        let bump = LaurentLoop::monomial(self.x.clone(), 2, e.annulus());
        e.add(&e.mul(&bump)?.scale(C64::new(self.t, 0.0)))
    }
}

/// Every point maps to the same loop.
pub struct ConstantFrame(pub LaurentLoop);

impl FrameField for ConstantFrame {
    fn frame_at(&self, _z: C64) -> Result<LaurentLoop> {
        Ok(self.0.clone())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TangencyRow {
    pub t: f64,
    /// λ-constancy of `E + t V^# E`, worst probe.
    pub residual: f64,
    /// `(residual - floor) / t^2`.
    pub ratio: f64,
    /// λ-constancy of the non-tangent control `E + t E λ^2 X`.
    pub control: f64,
    /// `control / t`.
    pub control_ratio: f64,
    /// λ-constancy of the finite group flow `f_t^# E`.
    pub group: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TangencyReport {
    pub field: VectorFieldLambda,
    /// Residual of the unflowed frame, the finite-difference floor.
    pub floor: f64,
    pub rows: Vec<TangencyRow>,
    /// `max ratio / min ratio` across `t`.
    pub spread: f64,
    pub tangent: bool,
    pub control_fails_first_order: bool,
}

/// Largest `spread` accepted as second-order scaling.
pub const TANGENCY_SPREAD: f64 = 3.0;
/// Minimum first-order size `control / t` of a non-tangent perturbation.
pub const CONTROL_FIRST_ORDER: f64 = 1e-3;

/// Fixed traceless anti-Hermitian direction used by the negative control.
pub fn control_direction() -> CMatrix {
    CMatrix::from_row_slice(
        2,
        2,
        &[C64::new(0.0, 0.3), C64::new(0.5, 0.2), C64::new(-0.5, 0.2), C64::new(0.0, -0.3)],
    )
}

/// Measures λ-constancy of the first-order flow `E + t V^# E` at probe points with a
/// fourth-order stencil of step `hp`: a tangent field leaves an `O(t^2)` residual above
/// the floor, a non-tangent one an `O(t)` residual. The finite flow `f_t^# E`, which
/// should stay at the floor, is reported alongside.
pub fn tangency_check(
    base: &dyn FrameField,
    v: &VectorFieldLambda,
    t_list: &[f64],
    probes: &[C64],
    hp: f64,
    cfg: &AnnulusConfig,
    tol: f64,
) -> Result<TangencyReport> {
    let worst = |field: &dyn FrameField| -> Result<f64> {
        let mut r = 0.0f64;
        for &z in probes {
            r = r.max(probe_constancy(field, z, hp)?);
        }
        Ok(r)
    };
    let floor = worst(base)?;
    let mut rows = Vec::with_capacity(t_list.len());
    for &t in t_list {
        let residual = worst(&LinearizedFlow { base, field: v.clone(), t, cfg: *cfg })?;
        let control = worst(&PerturbedFrame { base, x: control_direction(), t })?;
        let group = worst(&GroupFlowField { base, map: HoloMap::from_field(v, t)?, cfg: *cfg, tol })?;
        let ratio = (residual - floor).max(0.0) / (t * t);
        rows.push(TangencyRow { t, residual, ratio, control, control_ratio: control / t, group });
    }
    let ratios: Vec<f64> = rows.iter().map(|r| r.ratio).collect();
    let max = ratios.iter().cloned().fold(0.0, f64::max);
    let min = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
    let spread = if max == 0.0 { 1.0 } else { max / min };
    let tangent = spread <= TANGENCY_SPREAD;
    let control_fails_first_order = rows.iter().all(|r| r.control_ratio >= CONTROL_FIRST_ORDER);
    Ok(TangencyReport { field: v.clone(), floor, rows, spread, tangent, control_fails_first_order })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harmonic::{RationalFn, Uniton, UnitonVariant};
    use crate::loop_algebra::Annulus;

    fn uniton() -> Uniton {
        Uniton::new(RationalFn::identity(), C64::new(0.0, 0.0), UnitonVariant::Positive, 0.5).unwrap()
    }

    #[test]
    fn identity_map_fixes_loops() {
        let e = uniton().frame(C64::new(0.3, 0.1)).unwrap();
        let cfg = AnnulusConfig::default();
        assert_eq!(flow_loop(&HoloMap::identity(), &e, &cfg, 1e-9).unwrap(), e);
        let f = HoloMap::from_field(&VectorFieldLambda::generator(0), 0.0).unwrap();
        assert_eq!(flow_loop(&f, &e, &cfg, 1e-9).unwrap(), e);
    }

    #[test]
    fn basepoint_stays_trivial() {
        let cfg = AnnulusConfig::default();
        let e = uniton().frame(C64::new(0.0, 0.0)).unwrap();
        let f = HoloMap::from_field(&VectorFieldLambda::generator(1), 0.05).unwrap();
        let out = flow_loop(&f, &e, &cfg, 1e-9).unwrap();
        assert!(out.sample_distance(&LaurentLoop::identity(2, out.annulus()), 256).unwrap() < 1e-12);
    }

    #[test]
    fn identity_frame_is_tangent_to_everything() {
        let cfg = AnnulusConfig::default();
        let id = ConstantFrame(LaurentLoop::identity(2, Annulus::punctured(0.5).unwrap()));
        let r = tangency_check(&id, &VectorFieldLambda::generator(2), &[1e-2, 1e-3], &[C64::new(0.1, 0.1)], 1e-2, &cfg, 1e-12)
            .unwrap();
        assert!(r.tangent, "{r:?}");
        assert!(r.rows.iter().all(|row| row.residual == r.floor));
    }
}
