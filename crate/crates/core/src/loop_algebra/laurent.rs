use crate::error::{Error, Result};
use crate::linalg::{self, max_norm, CMatrix, C64};
use crate::spectral::{centered, check_power_of_two, forward_modes, inverse_modes, slot};

use super::Annulus;

/// Truncated matrix Laurent series `Σ_{k=-K}^{K} c_k λ^k` with a trusted annulus.
///
/// Coefficients are the source of truth; samples are derived on demand.
#[derive(Clone, Debug, PartialEq)]
pub struct LaurentLoop {
    n: usize,
    order: usize,
    coeffs: Vec<CMatrix>,
    annulus: Annulus,
    truncation: f64,
}

impl LaurentLoop {
    pub fn zeros(n: usize, order: usize, annulus: Annulus) -> Self {
        LaurentLoop {
            n,
            order,
            coeffs: vec![CMatrix::zeros(n, n); 2 * order + 1],
            annulus,
            truncation: 0.0,
        }
    }

    /// Builds a loop from `2K + 1` coefficients ordered `k = -K..=K`.
    pub fn from_coeffs(coeffs: Vec<CMatrix>, annulus: Annulus) -> Result<Self> {
        if coeffs.is_empty() || coeffs.len().is_multiple_of(2) {
            return Err(Error::Construction(format!(
                "expected an odd number of coefficients, got {}",
                coeffs.len()
            )));
        }
        let n = coeffs[0].nrows();
        for c in &coeffs {
            if c.nrows() != n || c.ncols() != n {
                return Err(Error::DimensionMismatch(n, c.nrows().max(c.ncols())));
            }
        }
        Ok(LaurentLoop {
            n,
            order: coeffs.len() / 2,
            coeffs,
            annulus,
            truncation: 0.0,
        })
    }

    pub fn constant(m: CMatrix, annulus: Annulus) -> Self {
        Self::monomial(m, 0, annulus)
    }

    pub fn identity(n: usize, annulus: Annulus) -> Self {
        Self::constant(linalg::identity(n), annulus)
    }

    /// `m λ^k`, stored with order `|k|`.
    pub fn monomial(m: CMatrix, k: i64, annulus: Annulus) -> Self {
        let mut out = Self::zeros(m.nrows(), k.unsigned_abs() as usize, annulus);
        *out.coeff_mut(k) = m;
        out
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn annulus(&self) -> Annulus {
        self.annulus
    }

    /// Weighted norm of modes discarded by truncating operations.
    pub fn truncation(&self) -> f64 {
        self.truncation
    }

    pub fn coeffs(&self) -> &[CMatrix] {
        &self.coeffs
    }

    /// Iterates `(k, c_k)` for `k = -K..=K`.
    pub fn modes(&self) -> impl Iterator<Item = (i64, &CMatrix)> + '_ {
        let k0 = self.order as i64;
        self.coeffs.iter().enumerate().map(move |(i, c)| (i as i64 - k0, c))
    }

    pub fn coeff(&self, k: i64) -> Option<&CMatrix> {
        if k.unsigned_abs() as usize > self.order {
            None
        } else {
            Some(&self.coeffs[(k + self.order as i64) as usize])
        }
    }

    pub fn coeff_or_zero(&self, k: i64) -> CMatrix {
        self.coeff(k)
            .cloned()
            .unwrap_or_else(|| CMatrix::zeros(self.n, self.n))
    }

    /// Mutable access to `c_k`; panics when `|k| > K`.
    pub fn coeff_mut(&mut self, k: i64) -> &mut CMatrix {
        assert!(
            k.unsigned_abs() as usize <= self.order,
            "mode {k} outside order {}",
            self.order
        );
        &mut self.coeffs[(k + self.order as i64) as usize]
    }

    pub fn with_annulus(mut self, annulus: Annulus) -> Self {
        self.annulus = annulus;
        self
    }

    /// Pads with zero modes or truncates, recording discarded weighted mass.
    pub fn with_order(&self, order: usize) -> Self {
        let mut out = Self::zeros(self.n, order, self.annulus);
        out.truncation = self.truncation;
        for (k, c) in self.modes() {
            if k.unsigned_abs() as usize <= order {
                *out.coeff_mut(k) = c.clone();
            } else {
                out.truncation += self.annulus.weight(k) * max_norm(c);
            }
        }
        out
    }

    /// `Σ_{|k| > K-2} w_k |c_k|` with `w_k = max |λ^k|` over the annulus.
    pub fn tail_norm(&self) -> f64 {
        let cutoff = self.order as i64 - 2;
        self.modes()
            .filter(|(k, _)| k.abs() > cutoff)
            .map(|(k, c)| self.annulus.weight(k) * max_norm(c))
            .sum()
    }

    /// Largest `|c_k|` over all modes.
    pub fn coeff_norm(&self) -> f64 {
        self.coeffs.iter().map(max_norm).fold(0.0, f64::max)
    }

    /// Evaluates inside the trusted annulus.
    pub fn eval(&self, lambda: C64) -> Result<CMatrix> {
        let modulus = lambda.norm();
        if modulus == 0.0 {
            return Err(Error::ZeroLambda);
        }
        if !self.annulus.contains(modulus) {
            return Err(Error::OutsideAnnulus {
                modulus,
                r_in: self.annulus.r_in,
                r_out: self.annulus.r_out,
            });
        }
        self.eval_any(lambda)
    }

    /// Evaluates at any nonzero `λ`, overriding the trusted annulus.
    pub fn eval_any(&self, lambda: C64) -> Result<CMatrix> {
        if lambda.norm() == 0.0 {
            return Err(Error::ZeroLambda);
        }
        let k = self.order;
        let mut pos = self.coeffs[2 * k].clone();
        for i in (k..2 * k).rev() {
            pos = pos * lambda + &self.coeffs[i];
        }
        if k == 0 {
            return Ok(pos);
        }
        let mu = lambda.inv();
        let mut neg = self.coeffs[0].clone();
        for i in 1..k {
            neg = neg * mu + &self.coeffs[i];
        }
        Ok(pos + neg * mu)
    }

    /// Values at `r e^{2πim/N}` computed by FFT of the scaled modes `c_k r^k`.
    pub fn sample_circle(&self, r: f64, samples: usize) -> Result<Vec<CMatrix>> {
        check_power_of_two(samples)?;
        if !(r > 0.0 && r.is_finite()) {
            return Err(Error::InvalidRadius(r));
        }
        let mut buf = vec![CMatrix::zeros(self.n, self.n); samples];
        for (k, c) in self.modes() {
            buf[slot(k, samples)] += c * C64::new(r.powi(k as i32), 0.0);
        }
        Ok(inverse_modes(&buf))
    }

    /// Recovers modes `|k| <= order` from samples on one circle (annulus = that circle).
    pub fn from_samples(samples: &[CMatrix], r: f64, order: usize) -> Result<Self> {
        check_power_of_two(samples.len())?;
        if !(r > 0.0 && r.is_finite()) {
            return Err(Error::InvalidRadius(r));
        }
        let n = samples[0].nrows();
        let len = samples.len();
        let modes = forward_modes(samples);
        let mut out = Self::zeros(n, order, Annulus::circle(r)?);
        for (m, a) in modes.into_iter().enumerate() {
            let k = centered(m, len);
            if k.unsigned_abs() as usize <= order {
                *out.coeff_mut(k) = a * C64::new(r.powi(-k as i32), 0.0);
            }
        }
        Ok(out)
    }

    /// Recovers a loop on `annulus` from samples on its two boundary circles:
    /// negative modes from the inner circle, nonnegative modes from the outer one.
    pub fn from_circle_pair(
        inner: &[CMatrix],
        outer: &[CMatrix],
        annulus: Annulus,
        order: usize,
    ) -> Result<Self> {
        let len = inner.len();
        check_power_of_two(len)?;
        if outer.len() != len {
            return Err(Error::DimensionMismatch(len, outer.len()));
        }
        if 2 * order + 2 > len {
            return Err(Error::OrderTooLarge {
                order,
                samples: len,
                needed: 2 * order + 2,
            });
        }
        let n = inner[0].nrows();
        let a = forward_modes(inner);
        let b = forward_modes(outer);
        let mut out = Self::zeros(n, order, annulus);
        for k in -(order as i64)..=order as i64 {
            let m = slot(k, len);
            *out.coeff_mut(k) = if k < 0 {
                &a[m] * C64::new(annulus.r_in.powi(-k as i32), 0.0)
            } else {
                &b[m] * C64::new(annulus.r_out.powi(-k as i32), 0.0)
            };
        }
        Ok(out)
    }

    /// Samples the loop on its boundary circles, applies `f` pointwise and re-expands.
    pub fn map_pointwise<F>(&self, samples: usize, order: usize, f: F) -> Result<Self>
    where
        F: Fn(&CMatrix) -> Result<CMatrix>,
    {
        let radii = self.annulus.boundary_radii();
        let apply = |r: f64| -> Result<Vec<CMatrix>> {
            self.sample_circle(r, samples)?.iter().map(&f).collect()
        };
        if radii.len() == 1 {
            let vals = apply(radii[0])?;
            Ok(Self::from_samples(&vals, radii[0], order)?.with_annulus(self.annulus))
        } else {
            let inner = apply(radii[0])?;
            let outer = apply(radii[1])?;
            Self::from_circle_pair(&inner, &outer, self.annulus, order)
        }
    }

    /// Pointwise inverse on the sample grid followed by re-expansion.
    pub fn inverse(&self, samples: usize, order: usize) -> Result<Self> {
        self.map_pointwise(samples, order, linalg::inverse)
    }

    pub fn exp(&self, samples: usize, order: usize) -> Result<Self> {
        self.map_pointwise(samples, order, |m| Ok(linalg::expm(m)))
    }

    fn check_dims(&self, other: &Self) -> Result<()> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch(self.n, other.n));
        }
        Ok(())
    }

    fn combine(&self, other: &Self, sign: f64) -> Result<Self> {
        self.check_dims(other)?;
        let order = self.order.max(other.order);
        let mut out = self.with_order(order);
        out.annulus = self.annulus.intersect(&other.annulus)?;
        out.truncation += other.truncation;
        for (k, c) in other.modes() {
            *out.coeff_mut(k) += c * C64::new(sign, 0.0);
        }
        Ok(out)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.combine(other, 1.0)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.combine(other, -1.0)
    }

    pub fn scale(&self, s: C64) -> Self {
        let mut out = self.clone();
        for c in &mut out.coeffs {
            *c *= s;
        }
        out
    }

    /// Exact Cauchy product; the order is the sum of the orders.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_dims(other)?;
        let annulus = self.annulus.intersect(&other.annulus)?;
        let (k1, k2) = (self.order as i64, other.order as i64);
        let mut out = Self::zeros(self.n, (k1 + k2) as usize, annulus);
        out.truncation = self.truncation + other.truncation;
        for (i, a) in self.modes() {
            if a.iter().all(|z| *z == C64::new(0.0, 0.0)) {
                continue;
            }
            for (j, b) in other.modes() {
                *out.coeff_mut(i + j) += a * b;
            }
        }
        Ok(out)
    }

    /// Cauchy product truncated to `cap`, with the dropped mass recorded.
    pub fn mul_capped(&self, other: &Self, cap: usize) -> Result<Self> {
        let full = self.mul(other)?;
        Ok(if full.order > cap { full.with_order(cap) } else { full })
    }

    /// Left multiplication by a matrix constant.
    pub fn left_mul_matrix(&self, m: &CMatrix) -> Self {
        let mut out = self.clone();
        for c in &mut out.coeffs {
            *c = m * &*c;
        }
        out
    }

    /// Product with the scalar Laurent polynomial `Σ a_p λ^p` given as `(p, a_p)` terms.
    pub fn mul_scalar_series(&self, terms: &[(i64, C64)]) -> Self {
        let shift = terms.iter().map(|(p, _)| p.unsigned_abs() as usize).max().unwrap_or(0);
        let mut out = Self::zeros(self.n, self.order + shift, self.annulus);
        out.truncation = self.truncation;
        for (k, c) in self.modes() {
            for &(p, a) in terms {
                *out.coeff_mut(k + p) += c * a;
            }
        }
        out
    }

    /// `d/dλ`: `c_k -> (k + 1) c_{k+1}`; the order grows by one.
    pub fn dlambda(&self) -> Self {
        let mut out = Self::zeros(self.n, self.order + 1, self.annulus);
        out.truncation = self.truncation;
        for (k, c) in self.modes() {
            if k != 0 {
                *out.coeff_mut(k - 1) = c * C64::new(k as f64, 0.0);
            }
        }
        out
    }

    /// `λ -> L(1/λ̄)^*`: `c_k -> c_{-k}^*` on the reflected annulus.
    pub fn reflect_adjoint(&self) -> Self {
        let mut out = Self::zeros(self.n, self.order, self.annulus.reflected());
        out.truncation = self.truncation;
        for (k, c) in self.modes() {
            *out.coeff_mut(-k) = c.adjoint();
        }
        out
    }

    /// Max coefficient difference over the union of mode ranges.
    pub fn coeff_distance(&self, other: &Self) -> f64 {
        let order = self.order.max(other.order) as i64;
        (-order..=order)
            .map(|k| match (self.coeff(k), other.coeff(k)) {
                (Some(a), Some(b)) => linalg::max_dist(a, b),
                (Some(a), None) | (None, Some(a)) => max_norm(a),
                (None, None) => 0.0,
            })
            .fold(0.0, f64::max)
    }

    /// Max pointwise difference on this loop's boundary circles.
    pub fn sample_distance(&self, other: &Self, samples: usize) -> Result<f64> {
        self.check_dims(other)?;
        let mut worst = 0.0f64;
        for r in self.annulus.boundary_radii() {
            let a = self.sample_circle(r, samples)?;
            let b = other.sample_circle(r, samples)?;
            for (x, y) in a.iter().zip(&b) {
                worst = worst.max(linalg::max_dist(x, y));
            }
        }
        Ok(worst)
    }

    /// `max |det L(λ) - 1|` over the boundary sample points.
    pub fn det_defect(&self, samples: usize) -> Result<f64> {
        let mut worst = 0.0f64;
        for r in self.annulus.boundary_radii() {
            for m in self.sample_circle(r, samples)? {
                worst = worst.max((linalg::det(&m) - 1.0).norm());
            }
        }
        Ok(worst)
    }
}
