use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::linalg::{self, CMatrix, C64};
use crate::loop_algebra::{Annulus, LaurentLoop};

use super::rational::RationalFn;

/// Order at which closed-form uniton frames are stored: the exact degree plus two
/// empty guard modes, so the truncation tail is identically zero.
pub const UNITON_ORDER: usize = 3;

/// Orientation of the raw uniton loop.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum UnitonVariant {
    /// `π + λ π^⊥`
    Positive,
    /// `π + λ^{-1} π^⊥`
    Negative,
}

impl UnitonVariant {
    pub fn name(&self) -> &'static str {
        match self {
            UnitonVariant::Positive => "pi + lambda pi_perp",
            UnitonVariant::Negative => "pi + lambda^-1 pi_perp",
        }
    }
}

/// Anything that produces an extended frame `λ -> E_λ(z)` at arbitrary points `z`.
pub trait FrameField {
    fn frame_at(&self, z: C64) -> Result<LaurentLoop>;
}

/// Closed-form uniton built from a rational `f`: `π(z)` projects onto `(1, f(z))^T`
/// and the frame is left-normalized at the basepoint.
#[derive(Clone, Debug)]
pub struct Uniton {
    f: RationalFn,
    basepoint: C64,
    variant: UnitonVariant,
    pi_p: CMatrix,
    annulus: Annulus,
}

fn line(f: C64) -> DVector<C64> {
    DVector::from_vec(vec![C64::new(1.0, 0.0), f])
}

impl Uniton {
    pub fn new(f: RationalFn, basepoint: C64, variant: UnitonVariant, eps: f64) -> Result<Self> {
        let mut u = Uniton {
            f,
            basepoint,
            variant,
            pi_p: CMatrix::zeros(2, 2),
            annulus: Annulus::punctured(eps)?,
        };
        u.pi_p = u.projection(basepoint)?;
        Ok(u)
    }

    pub fn variant(&self) -> UnitonVariant {
        self.variant
    }

    pub fn basepoint(&self) -> C64 {
        self.basepoint
    }

    pub fn projection(&self, z: C64) -> Result<CMatrix> {
        let v = line(self.f.eval(z)?);
        let norm2 = v.norm_squared();
        Ok(&v * v.adjoint() / C64::new(norm2, 0.0))
    }

    /// `E_λ(z) = G_λ(p)^{-1} G_λ(z)`, a Laurent polynomial of degree one in `λ^{±1}`.
    pub fn frame(&self, z: C64) -> Result<LaurentLoop> {
        let id = linalg::identity(2);
        let pz = self.projection(z)?;
        let (pp, pz_perp, pp_perp) = (&self.pi_p, &id - &pz, &id - &self.pi_p);
        let mut e = LaurentLoop::zeros(2, UNITON_ORDER, self.annulus);
        *e.coeff_mut(0) = pp * &pz + &pp_perp * &pz_perp;
        let (up, down) = (pp * &pz_perp, &pp_perp * &pz);
        match self.variant {
            UnitonVariant::Positive => {
                *e.coeff_mut(1) = up;
                *e.coeff_mut(-1) = down;
            }
            UnitonVariant::Negative => {
                *e.coeff_mut(-1) = up;
                *e.coeff_mut(1) = down;
            }
        }
        Ok(e)
    }

    /// `s(z) = E_{-1}(z) = (2π(p) - I)(2π(z) - I)`.
    pub fn harmonic_map(&self, z: C64) -> Result<CMatrix> {
        let id = linalg::identity(2);
        let two = C64::new(2.0, 0.0);
        Ok((&self.pi_p * two - &id) * (self.projection(z)? * two - id))
    }

    /// Exact `A = s^{-1} s_z = 2(2π - I) π_z` and `B = s^{-1} s_z̄ = 2(2π - I) π_z̄`.
    pub fn maurer_cartan(&self, z: C64) -> Result<(CMatrix, CMatrix)> {
        let f = self.f.eval(z)?;
        let df = self.f.derivative(z)?;
        let v = line(f);
        let vz = DVector::from_vec(vec![C64::new(0.0, 0.0), df]);
        let n2 = v.norm_squared();
        let pi = &v * v.adjoint() / C64::new(n2, 0.0);
        let pi_z = &vz * v.adjoint() / C64::new(n2, 0.0) - &pi * (f.conj() * df / n2);
        let pi_zbar = pi_z.adjoint();
        let g = pi * C64::new(2.0, 0.0) - linalg::identity(2);
        let two = C64::new(2.0, 0.0);
        Ok((&g * pi_z * two, g * pi_zbar * two))
    }
}

impl FrameField for Uniton {
    fn frame_at(&self, z: C64) -> Result<LaurentLoop> {
        self.frame(z)
    }
}
