use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::linalg::C64;

use super::field::VectorFieldLambda;

/// Points per circle used to bound a map's displacement.
const DISPLACEMENT_SAMPLES: usize = 256;

/// Holomorphic map `f(λ) = Σ_{k≥1} f_k λ^k` fixing 0, acting near 0 directly and near ∞
/// through the induced map `f̃(μ) = 1 / conj(f(1/μ̄))`.
#[derive(Clone, Debug, PartialEq)]
pub struct HoloMap {
    /// `f_k` for `k = 0..`; `f_0 = 0`.
    poly: Vec<C64>,
}

impl HoloMap {
    pub fn identity() -> Self {
        HoloMap { poly: vec![C64::new(0.0, 0.0), C64::new(1.0, 0.0)] }
    }

    /// `f(λ) = λ + t v(λ)`; `v` must be a polynomial vanishing at 0.
    pub fn from_field(v: &VectorFieldLambda, t: f64) -> Result<Self> {
        if !v.vanishes_at_zero() {
            return Err(Error::Construction("flow field must vanish at lambda = 0".into()));
        }
        let mut f = Self::identity();
        for (p, c) in v.terms() {
            let p = p as usize;
            if f.poly.len() <= p {
                f.poly.resize(p + 1, C64::new(0.0, 0.0));
            }
            f.poly[p] += c * t;
        }
        Ok(f)
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.poly
    }

    pub fn eval(&self, lambda: C64) -> C64 {
        self.poly.iter().rev().fold(C64::new(0.0, 0.0), |acc, c| acc * lambda + c)
    }

    /// `f̃(μ) = 1 / conj(f(1/μ̄))`.
    pub fn eval_induced(&self, mu: C64) -> C64 {
        self.eval(mu.conj().inv()).conj().inv()
    }

    /// `self ∘ inner`.
    pub fn compose(&self, inner: &HoloMap) -> HoloMap {
        let mut acc: Vec<C64> = vec![C64::new(0.0, 0.0)];
        for c in self.poly.iter().rev() {
            let mut next = vec![C64::new(0.0, 0.0); acc.len() + inner.poly.len() - 1];
            for (i, a) in acc.iter().enumerate() {
                for (j, b) in inner.poly.iter().enumerate() {
                    next[i + j] += a * b;
                }
            }
            next[0] += c;
            acc = next;
        }
        while acc.len() > 2 && acc.last() == Some(&C64::new(0.0, 0.0)) {
            acc.pop();
        }
        HoloMap { poly: acc }
    }

    /// `max |f(λ) - λ|` on the circle of radius `r`.
    pub fn displacement(&self, r: f64) -> f64 {
        (0..DISPLACEMENT_SAMPLES)
            .map(|m| {
                let l = C64::from_polar(r, 2.0 * PI * m as f64 / DISPLACEMENT_SAMPLES as f64);
                (self.eval(l) - l).norm()
            })
            .fold(0.0, f64::max)
    }

    /// Keeps `f` injective on the trusted annulus: displacement on the ε-circle below ε/4.
    pub fn check_small(&self, eps: f64) -> Result<()> {
        let d = self.displacement(eps);
        if !(d < eps / 4.0) {
            return Err(Error::MapTooLarge(d));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn induced_map_of_identity_is_identity() {
        let f = HoloMap::identity();
        let mu = C64::new(1.3, -0.7);
        assert!((f.eval_induced(mu) - mu).norm() < 1e-15);
    }

    #[test]
    fn composition_matches_pointwise() {
        let f = HoloMap::from_field(&VectorFieldLambda::generator(1), 0.1).unwrap();
        let g = HoloMap::from_field(&VectorFieldLambda::from_half(&[C64::new(0.0, 0.2), C64::new(0.3, 0.0)]), 0.5).unwrap();
        let l = C64::new(0.3, 0.4);
        assert!((f.compose(&g).eval(l) - f.eval(g.eval(l))).norm() < 1e-15);
        let mu = C64::new(-1.5, 1.1);
        assert!((f.compose(&g).eval_induced(mu) - f.eval_induced(g.eval_induced(mu))).norm() < 1e-14);
    }

    #[test]
    fn large_maps_are_rejected() {
        assert!(HoloMap::from_field(&VectorFieldLambda::generator(-1), 0.1).is_err());
        let f = HoloMap::from_field(&VectorFieldLambda::generator(0), 0.3).unwrap();
        assert!(matches!(f.check_small(0.5), Err(Error::MapTooLarge(_))));
        assert!(HoloMap::from_field(&VectorFieldLambda::generator(0), 0.1).unwrap().check_small(0.5).is_ok());
    }
}
