use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const RADIUS_SLACK: f64 = 1e-9;

/// Closed annulus `r_in <= |λ| <= r_out` on which a loop's evaluation is trusted.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Annulus {
    pub r_in: f64,
    pub r_out: f64,
}

impl Annulus {
    pub fn new(r_in: f64, r_out: f64) -> Result<Self> {
        if !(r_in.is_finite() && r_out.is_finite() && r_in > 0.0 && r_in <= r_out) {
            return Err(Error::InvalidAnnulus { r_in, r_out });
        }
        Ok(Annulus { r_in, r_out })
    }

    pub fn circle(r: f64) -> Result<Self> {
        if !(r.is_finite() && r > 0.0) {
            return Err(Error::InvalidRadius(r));
        }
        Ok(Annulus { r_in: r, r_out: r })
    }

    pub fn unit_circle() -> Self {
        Annulus { r_in: 1.0, r_out: 1.0 }
    }

    /// The window `ε <= |λ| <= 1/ε` standing in for all of ℂ*.
    pub fn punctured(eps: f64) -> Result<Self> {
        if !(eps > 0.0 && eps <= 1.0) {
            return Err(Error::InvalidRadius(eps));
        }
        Ok(Annulus { r_in: eps, r_out: 1.0 / eps })
    }

    pub fn is_circle(&self) -> bool {
        (self.r_out - self.r_in).abs() <= RADIUS_SLACK * self.r_out
    }

    /// Geometric mean of the radii; the circle a `DoubleLoop` end lives on.
    pub fn home_radius(&self) -> f64 {
        (self.r_in * self.r_out).sqrt()
    }

    pub fn contains(&self, modulus: f64) -> bool {
        modulus >= self.r_in * (1.0 - RADIUS_SLACK) && modulus <= self.r_out * (1.0 + RADIUS_SLACK)
    }

    pub fn intersect(&self, other: &Annulus) -> Result<Annulus> {
        let r_in = self.r_in.max(other.r_in);
        let r_out = self.r_out.min(other.r_out);
        if r_in <= r_out {
            Ok(Annulus { r_in, r_out })
        } else if r_in <= r_out * (1.0 + RADIUS_SLACK) {
            Ok(Annulus { r_in, r_out: r_in })
        } else {
            Err(Error::InvalidAnnulus { r_in, r_out })
        }
    }

    /// Image under `λ -> 1/λ̄`.
    pub fn reflected(&self) -> Annulus {
        Annulus {
            r_in: 1.0 / self.r_out,
            r_out: 1.0 / self.r_in,
        }
    }

    /// Whether the annulus is mapped onto itself by `λ -> 1/λ̄`.
    pub fn is_self_reflected(&self) -> bool {
        (self.r_in * self.r_out - 1.0).abs() <= 1e-9
    }

    /// The one or two circles bounding the annulus, inner first.
    pub fn boundary_radii(&self) -> Vec<f64> {
        if self.is_circle() {
            vec![self.r_in]
        } else {
            vec![self.r_in, self.r_out]
        }
    }

    /// `max |λ^k|` over the annulus.
    pub fn weight(&self, k: i64) -> f64 {
        self.r_in.powi(k as i32).max(self.r_out.powi(k as i32))
    }
}
