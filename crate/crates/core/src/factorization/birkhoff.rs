use serde::{Deserialize, Serialize};

use crate::config::AnnulusConfig;
use crate::error::{Error, Result};
use crate::linalg::{self, max_norm, CMatrix, C64};
use crate::loop_algebra::{Annulus, DoubleLoop, HmrcLevel, LaurentLoop};
use crate::spectral::{centered, forward_modes, inverse_modes};

use super::projections::SPLIT_HMRC_TOL;

const MAX_ITERATIONS: usize = 50;
const STOP_NORM: f64 = 1e-12;

/// Multiplicative factorization `Q = plus · minus`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FactorPair<M> {
    pub plus: LaurentLoop,
    pub minus: M,
    /// `max |plus · minus - Q|` over the sample circles.
    pub residual: f64,
    #[serde(skip)]
    pub diagnostics: FactorDiagnostics,
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct FactorDiagnostics {
    pub iterations: usize,
    /// Deviation of `plus` from its normalization and allowed mode range.
    pub plus_membership: f64,
    /// Size of the forbidden modes removed from `minus`, plus its reality defect when applicable.
    pub minus_membership: f64,
}

impl FactorDiagnostics {
    pub fn membership(&self) -> f64 {
        self.plus_membership.max(self.minus_membership)
    }
}

fn pointwise_log(d: &CMatrix, iteration: usize) -> Result<CMatrix> {
    linalg::logm_near_identity(d).map_err(|e| match e {
        Error::LogDivergence(r) => Error::OutsideBigCell {
            iterations: iteration,
            residual: r,
        },
        other => other,
    })
}

fn samples_max(v: &[CMatrix]) -> f64 {
    v.iter().map(max_norm).fold(0.0, f64::max)
}

fn check_residual(residual: f64, tol: f64) -> Result<()> {
    if residual.is_nan() || residual > tol {
        return Err(Error::ResidualTooLarge { residual, tol });
    }
    Ok(())
}

/// Factors a loop on the unit circle as `E · F` with `E = I + O(λ^{-1})` and `F`
/// holomorphic inside the disk, by the multiplicative Newton iteration in sample space.
pub fn birkhoff_standard(q: &LaurentLoop, cfg: &AnnulusConfig, tol: f64) -> Result<FactorPair<LaurentLoop>> {
    let n = q.n();
    let len = cfg.samples;
    let qs = q.sample_circle(1.0, len)?;
    let mut e = vec![linalg::identity(n); len];
    let mut f = e.clone();
    let mut iterations = 0;
    let mut last = f64::INFINITY;
    for it in 0..=MAX_ITERATIONS {
        let v = qs
            .iter()
            .zip(e.iter().zip(&f))
            .map(|(qm, (em, fm))| {
                let d = linalg::inverse(em)? * qm * linalg::inverse(fm)?;
                pointwise_log(&d, it)
            })
            .collect::<Result<Vec<_>>>()?;
        last = samples_max(&v);
        if last < STOP_NORM {
            iterations = it;
            break;
        }
        if it == MAX_ITERATIONS {
            return Err(Error::OutsideBigCell { iterations: it, residual: last });
        }
        let modes = forward_modes(&v);
        let mut plus_modes = vec![CMatrix::zeros(n, n); len];
        let mut minus_modes = plus_modes.clone();
        for (m, a) in modes.into_iter().enumerate() {
            if centered(m, len) < 0 {
                plus_modes[m] = a;
            } else {
                minus_modes[m] = a;
            }
        }
        let vp = inverse_modes(&plus_modes);
        let vm = inverse_modes(&minus_modes);
        for m in 0..len {
            e[m] = &e[m] * linalg::expm(&vp[m]);
            f[m] = linalg::expm(&vm[m]) * &f[m];
        }
    }
    debug_assert!(last < STOP_NORM);

    let order = cfg.max_order();
    let mut plus = LaurentLoop::from_samples(&e, 1.0, order)?.with_annulus(q.annulus());
    let mut minus = LaurentLoop::from_samples(&f, 1.0, order)?.with_annulus(q.annulus());
    let mut plus_membership = linalg::dist_to_identity(plus.coeff(0).expect("order >= 0"));
    for k in 1..=order as i64 {
        plus_membership = plus_membership.max(max_norm(plus.coeff(k).expect("in range")));
        *plus.coeff_mut(k) = CMatrix::zeros(n, n);
    }
    let mut minus_membership = 0.0f64;
    for k in 1..=order as i64 {
        minus_membership = minus_membership.max(max_norm(minus.coeff(-k).expect("in range")));
        *minus.coeff_mut(-k) = CMatrix::zeros(n, n);
    }
    let ps = plus.sample_circle(1.0, len)?;
    let ms = minus.sample_circle(1.0, len)?;
    let residual = ps
        .iter()
        .zip(&ms)
        .zip(&qs)
        .map(|((a, b), qm)| linalg::max_dist(&(a * b), qm))
        .fold(0.0, f64::max);
    check_residual(residual, tol)?;
    Ok(FactorPair {
        plus,
        minus,
        residual,
        diagnostics: FactorDiagnostics {
            iterations,
            plus_membership,
            minus_membership,
        },
    })
}

/// Splits sample-space fields on the two circles into the normalized plus part
/// (returned as values on both circles) using scaled modes.
///
/// `v0` lives on `|λ| = ε`, `vi` on `|λ| = 1/ε`.
fn harmonic_plus_samples(v0: &[CMatrix], vi: &[CMatrix], eps: f64) -> (Vec<CMatrix>, Vec<CMatrix>) {
    let len = v0.len();
    let n = v0[0].nrows();
    let a = forward_modes(v0);
    let b = forward_modes(vi);
    let mut c = CMatrix::zeros(n, n);
    let mut inner = vec![CMatrix::zeros(n, n); len];
    let mut outer = inner.clone();
    for m in 0..len {
        let k = centered(m, len);
        if k < 0 {
            let w = eps.powi(-k as i32);
            c += &a[m] * C64::new(w, 0.0);
            inner[m] = a[m].clone();
            outer[m] = &a[m] * C64::new(w * w, 0.0);
        } else if k > 0 {
            let w = eps.powi(k as i32);
            c += &b[m] * C64::new(w, 0.0);
            outer[m] = b[m].clone();
            inner[m] = &b[m] * C64::new(w * w, 0.0);
        }
    }
    inner[0] = -&c;
    outer[0] = -c;
    (inverse_modes(&inner), inverse_modes(&outer))
}

fn pairwise_hmrc(inner: &[CMatrix], outer: &[CMatrix]) -> Result<f64> {
    let mut worst = 0.0f64;
    for (x, y) in inner.iter().zip(outer) {
        worst = worst.max(linalg::max_dist(x, &linalg::inverse(y)?.adjoint()));
    }
    Ok(worst)
}

/// Factors a reality-respecting pair `Q` as `E · F` with `E` a single loop on ℂ*,
/// `E(1) = I`, and `F` holomorphic at 0 and at ∞.
pub fn birkhoff_harmonic(q: &DoubleLoop, cfg: &AnnulusConfig, tol: f64) -> Result<FactorPair<DoubleLoop>> {
    let len = cfg.samples;
    let reality = q.hmrc_residual(HmrcLevel::Group, len)?;
    if reality > SPLIT_HMRC_TOL {
        return Err(Error::RealityViolation(reality));
    }
    let (q0, qi) = q.sample(len)?;
    birkhoff_harmonic_samples(&q0, &qi, q.radii().0, cfg, tol)
}

/// Sample-space core of [`birkhoff_harmonic`]: `q0` on `|λ| = ε`, `qi` on `|λ| = 1/ε`,
/// both at `N` equally spaced angles.
pub fn birkhoff_harmonic_samples(
    q0: &[CMatrix],
    qi: &[CMatrix],
    eps: f64,
    cfg: &AnnulusConfig,
    tol: f64,
) -> Result<FactorPair<DoubleLoop>> {
    let len = q0.len();
    if qi.len() != len {
        return Err(Error::DimensionMismatch(len, qi.len()));
    }
    let n = q0[0].nrows();
    let mut e0 = vec![linalg::identity(n); len];
    let mut ei = e0.clone();
    let mut f0 = e0.clone();
    let mut fi = e0.clone();
    let mut iterations = 0;
    for it in 0..=MAX_ITERATIONS {
        let log_at = |q: &[CMatrix], e: &[CMatrix], f: &[CMatrix]| -> Result<Vec<CMatrix>> {
            q.iter()
                .zip(e.iter().zip(f))
                .map(|(qm, (em, fm))| {
                    pointwise_log(&(linalg::inverse(em)? * qm * linalg::inverse(fm)?), it)
                })
                .collect()
        };
        let v0 = log_at(q0, &e0, &f0)?;
        let vi = log_at(qi, &ei, &fi)?;
        let size = samples_max(&v0).max(samples_max(&vi));
        if size < STOP_NORM {
            iterations = it;
            break;
        }
        if it == MAX_ITERATIONS {
            return Err(Error::OutsideBigCell { iterations: it, residual: size });
        }
        let (p0, pi) = harmonic_plus_samples(&v0, &vi, eps);
        for m in 0..len {
            e0[m] = &e0[m] * linalg::expm(&p0[m]);
            ei[m] = &ei[m] * linalg::expm(&pi[m]);
            f0[m] = linalg::expm(&(&v0[m] - &p0[m])) * &f0[m];
            fi[m] = linalg::expm(&(&vi[m] - &pi[m])) * &fi[m];
        }
        let drift = pairwise_hmrc(&e0, &ei)?;
        if drift > SPLIT_HMRC_TOL {
            return Err(Error::HmrcDrift(drift));
        }
    }

    let order = cfg.max_order();
    let annulus = Annulus::punctured(eps)?;
    let plus = LaurentLoop::from_circle_pair(&e0, &ei, annulus, order)?;
    let mut near0 = LaurentLoop::from_samples(&f0, eps, order)?;
    let mut near_inf = LaurentLoop::from_samples(&fi, 1.0 / eps, order)?;
    let mut minus_membership = 0.0f64;
    for k in 1..=order as i64 {
        let w = eps.powi(k as i32);
        minus_membership = minus_membership
            .max(max_norm(near0.coeff(-k).expect("in range")) / w)
            .max(max_norm(near_inf.coeff(k).expect("in range")) / w);
        *near0.coeff_mut(-k) = CMatrix::zeros(n, n);
        *near_inf.coeff_mut(k) = CMatrix::zeros(n, n);
    }
    let minus = DoubleLoop::new(near0, near_inf)?;
    minus_membership = minus_membership.max(minus.hmrc_residual(HmrcLevel::Group, len)?);

    let pe0 = plus.sample_circle(eps, len)?;
    let pei = plus.sample_circle(1.0 / eps, len)?;
    let (m0, mi) = minus.sample(len)?;
    let mut residual = 0.0f64;
    let mut consistency = 0.0f64;
    for m in 0..len {
        residual = residual
            .max(linalg::max_dist(&(&pe0[m] * &m0[m]), &q0[m]))
            .max(linalg::max_dist(&(&pei[m] * &mi[m]), &qi[m]));
        consistency = consistency
            .max(linalg::max_dist(&pe0[m], &e0[m]))
            .max(linalg::max_dist(&pei[m], &ei[m]));
    }
    let normalization = linalg::dist_to_identity(&plus.eval(C64::new(1.0, 0.0))?);
    let plus_membership = normalization
        .max(plus.hmrc_residual(HmrcLevel::Group, len)?)
        .max(consistency);
    check_residual(residual, tol)?;
    Ok(FactorPair {
        plus,
        minus,
        residual,
        diagnostics: FactorDiagnostics {
            iterations,
            plus_membership,
            minus_membership,
        },
    })
}

/// Dressing action of `s_minus` on `s_plus`: the plus factor of `s_minus · s_plus`.
pub fn dressing(
    s_minus: &LaurentLoop,
    s_plus: &LaurentLoop,
    cfg: &AnnulusConfig,
    tol: f64,
) -> Result<LaurentLoop> {
    let product = s_minus.mul(s_plus)?;
    Ok(birkhoff_standard(&product, cfg, tol)?.plus)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::identity;

    fn cfg() -> AnnulusConfig {
        AnnulusConfig::default()
    }

    #[test]
    fn identity_factors_trivially() {
        let i = LaurentLoop::identity(2, Annulus::unit_circle());
        let pair = birkhoff_standard(&i, &cfg(), 1e-9).unwrap();
        assert_eq!(pair.residual, 0.0);
        assert!(pair.plus.coeff_distance(&i) < 1e-15);
        assert!(pair.minus.coeff_distance(&i) < 1e-15);

        let d = DoubleLoop::identity(2, 0.5).unwrap();
        let pair = birkhoff_harmonic(&d, &cfg(), 1e-9).unwrap();
        assert_eq!(pair.residual, 0.0);
        assert_eq!(pair.diagnostics.iterations, 0);
    }

    #[test]
    fn plus_pure_nilpotent_loop() {
        let mut c = CMatrix::zeros(2, 2);
        c[(0, 1)] = C64::new(0.3, -0.1);
        let u = Annulus::unit_circle();
        let mut q = LaurentLoop::identity(2, u).with_order(1);
        *q.coeff_mut(-1) = c;
        let pair = birkhoff_standard(&q, &cfg(), 1e-9).unwrap();
        assert!(pair.plus.coeff_distance(&q) < 1e-14);
        assert!(pair.minus.coeff_distance(&LaurentLoop::identity(2, u)) < 1e-14);
        assert!(pair.diagnostics.membership() < 1e-14);
    }

    #[test]
    fn far_loop_is_outside_big_cell() {
        let q = LaurentLoop::monomial(identity(2) * C64::new(3.0, 0.0), 0, Annulus::unit_circle());
        assert!(matches!(
            birkhoff_standard(&q, &cfg(), 1e-9),
            Err(Error::OutsideBigCell { .. })
        ));
    }
}
