use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, C64};

use super::{Annulus, LaurentLoop};

/// Which form of the reality condition applies.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HmrcLevel {
    /// `Q(λ) = (Q(1/λ̄)^*)^{-1}`
    Group,
    /// `W(λ) = -W(1/λ̄)^*`
    Algebra,
}

/// Predicate threshold for `check_hmrc`.
pub const HMRC_TOL: f64 = 1e-10;

fn image_value(m: &CMatrix, level: HmrcLevel) -> Result<CMatrix> {
    match level {
        HmrcLevel::Group => Ok(linalg::inverse(m)?.adjoint()),
        HmrcLevel::Algebra => Ok(-m.adjoint()),
    }
}

/// Pair of expansions around `|λ| = ε` and `|λ| = 1/ε`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DoubleLoop {
    pub near0: LaurentLoop,
    #[serde(rename = "nearInf")]
    pub near_inf: LaurentLoop,
}

impl DoubleLoop {
    pub fn new(near0: LaurentLoop, near_inf: LaurentLoop) -> Result<Self> {
        if near0.n() != near_inf.n() {
            return Err(Error::DimensionMismatch(near0.n(), near_inf.n()));
        }
        Ok(DoubleLoop { near0, near_inf })
    }

    pub fn n(&self) -> usize {
        self.near0.n()
    }

    pub fn identity(n: usize, eps: f64) -> Result<Self> {
        Self::lift(&LaurentLoop::identity(n, Annulus::punctured(eps)?))
    }

    /// Views a loop trusted on `r_in <= |λ| <= r_out` as a pair living on its two boundary circles.
    pub fn lift(l: &LaurentLoop) -> Result<Self> {
        let a = l.annulus();
        Ok(DoubleLoop {
            near0: l.clone().with_annulus(Annulus::circle(a.r_in)?),
            near_inf: l.clone().with_annulus(Annulus::circle(a.r_out)?),
        })
    }

    /// Radii `(ε, 1/ε)` of the two home circles.
    pub fn radii(&self) -> (f64, f64) {
        (self.near0.annulus().home_radius(), self.near_inf.annulus().home_radius())
    }

    /// Samples of both ends on their home circles.
    pub fn sample(&self, samples: usize) -> Result<(Vec<CMatrix>, Vec<CMatrix>)> {
        let (r0, r1) = self.radii();
        Ok((
            self.near0.sample_circle(r0, samples)?,
            self.near_inf.sample_circle(r1, samples)?,
        ))
    }

    pub fn map_pair<F>(&self, f: F) -> Result<Self>
    where
        F: Fn(&LaurentLoop) -> Result<LaurentLoop>,
    {
        Self::new(f(&self.near0)?, f(&self.near_inf)?)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        Self::new(self.near0.sub(&other.near0)?, self.near_inf.sub(&other.near_inf)?)
    }

    pub fn coeff_distance(&self, other: &Self) -> f64 {
        self.near0
            .coeff_distance(&other.near0)
            .max(self.near_inf.coeff_distance(&other.near_inf))
    }

    /// Image under the reality involution; the two ends swap roles.
    pub fn hmrc_involution(&self, level: HmrcLevel, samples: usize) -> Result<Self> {
        Self::new(
            involution_of(&self.near_inf, level, samples)?,
            involution_of(&self.near0, level, samples)?,
        )
    }

    /// Max pointwise deviation from the reality condition, pairing `λ` on the
    /// near-0 circle with `1/λ̄` on the near-∞ circle.
    pub fn hmrc_residual(&self, level: HmrcLevel, samples: usize) -> Result<f64> {
        let (r0, r1) = self.radii();
        if ((r0 * r1) - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidAnnulus { r_in: r0, r_out: r1 });
        }
        let (a, b) = self.sample(samples)?;
        let mut worst = 0.0f64;
        for (x, y) in a.iter().zip(&b) {
            worst = worst.max(linalg::max_dist(x, &image_value(y, level)?));
            worst = worst.max(linalg::max_dist(y, &image_value(x, level)?));
        }
        Ok(worst)
    }

    pub fn check_hmrc(&self, level: HmrcLevel, samples: usize) -> Result<bool> {
        Ok(self.hmrc_residual(level, samples)? <= HMRC_TOL)
    }
}

fn involution_of(l: &LaurentLoop, level: HmrcLevel, samples: usize) -> Result<LaurentLoop> {
    let r = l.reflect_adjoint();
    match level {
        HmrcLevel::Algebra => Ok(r.scale(C64::new(-1.0, 0.0))),
        HmrcLevel::Group => r.inverse(samples, (samples / 4).saturating_sub(1).max(l.order())),
    }
}

impl LaurentLoop {
    /// Image under the reality involution, on the reflected annulus.
    ///
    /// At group level the pointwise inverse is re-expanded at order `N/4 - 1`
    /// (or the input's order, if larger).
    pub fn hmrc_involution(&self, level: HmrcLevel, samples: usize) -> Result<LaurentLoop> {
        involution_of(self, level, samples)
    }

    /// Max pointwise deviation from the reality condition on the boundary circles;
    /// the annulus must be mapped onto itself by `λ -> 1/λ̄`.
    pub fn hmrc_residual(&self, level: HmrcLevel, samples: usize) -> Result<f64> {
        let a = self.annulus();
        if !a.is_self_reflected() {
            return Err(Error::InvalidAnnulus { r_in: a.r_in, r_out: a.r_out });
        }
        let mut worst = 0.0f64;
        for r in a.boundary_radii() {
            let here = self.sample_circle(r, samples)?;
            let there = self.sample_circle(1.0 / r, samples)?;
            for (x, y) in here.iter().zip(&there) {
                worst = worst.max(linalg::max_dist(x, &image_value(y, level)?));
            }
        }
        Ok(worst)
    }

    pub fn check_hmrc(&self, level: HmrcLevel, samples: usize) -> Result<bool> {
        Ok(self.hmrc_residual(level, samples)? <= HMRC_TOL)
    }
}
