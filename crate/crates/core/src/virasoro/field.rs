use std::collections::BTreeMap;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::linalg::C64;

/// Largest `|power|` a bracket may produce before it is reported as an overflow.
pub const DEFAULT_DEGREE_CAP: i32 = 64;

/// Vector field `v(λ) d/dλ` with `v` a finite Laurent polynomial `Σ a_p λ^p`.
///
/// Zero coefficients are never stored, so structural equality is equality of fields.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct VectorFieldLambda {
    terms: BTreeMap<i32, C64>,
}

impl VectorFieldLambda {
    pub fn new<I: IntoIterator<Item = (i32, C64)>>(terms: I) -> Self {
        let mut out = VectorFieldLambda::default();
        for (p, c) in terms {
            out.add_term(p, c);
        }
        out
    }

    pub fn zero() -> Self {
        Self::default()
    }

    /// `Σ_j c_j λ^{j+1} d/dλ`.
    pub fn from_half(coeffs: &[C64]) -> Self {
        Self::new(coeffs.iter().enumerate().map(|(j, &c)| (j as i32 + 1, c)))
    }

    /// `L_j = λ^{j+1} d/dλ`.
    pub fn generator(j: i32) -> Self {
        Self::new([(j + 1, C64::new(1.0, 0.0))])
    }

    fn add_term(&mut self, p: i32, c: C64) {
        let slot = self.terms.entry(p).or_insert(C64::new(0.0, 0.0));
        *slot += c;
        if *slot == C64::new(0.0, 0.0) {
            self.terms.remove(&p);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (i32, C64)> + '_ {
        self.terms.iter().map(|(p, c)| (*p, *c))
    }

    pub fn coeff(&self, p: i32) -> C64 {
        self.terms.get(&p).copied().unwrap_or_default()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Lowest power is at least one, so `v(0) = 0`.
    pub fn vanishes_at_zero(&self) -> bool {
        self.terms.keys().all(|p| *p >= 1)
    }

    pub fn has_real_coeffs(&self) -> bool {
        self.terms.values().all(|c| c.im == 0.0)
    }

    pub fn scale(&self, s: C64) -> Self {
        Self::new(self.terms().map(|(p, c)| (p, c * s)))
    }

    pub fn add(&self, other: &Self) -> Self {
        Self::new(self.terms().chain(other.terms()))
    }

    pub fn eval(&self, lambda: C64) -> C64 {
        self.terms().map(|(p, c)| c * lambda.powi(p)).sum()
    }

    /// `(p, a_p)` pairs in the form used for scalar multiplication of loops.
    pub fn series(&self) -> Vec<(i64, C64)> {
        self.terms().map(|(p, c)| (p as i64, c)).collect()
    }

    /// `max |v(λ)|` over `m` equally spaced points of the circle of radius `r`.
    pub fn max_on_circle(&self, r: f64, m: usize) -> f64 {
        (0..m)
            .map(|k| self.eval(C64::from_polar(r, 2.0 * std::f64::consts::PI * k as f64 / m as f64)).norm())
            .fold(0.0, f64::max)
    }
}

/// `[V, W] = (v w' - w v') d/dλ`, so `[L_j, L_k] = (k - j) L_{j+k}`.
pub fn vira_bracket(v: &VectorFieldLambda, w: &VectorFieldLambda, cap: i32) -> Result<VectorFieldLambda> {
    let mut out = VectorFieldLambda::zero();
    for (p, a) in v.terms() {
        for (q, b) in w.terms() {
            if q == p {
                continue;
            }
            let power = p + q - 1;
            if power.abs() > cap {
                return Err(Error::DegreeOverflow { power, cap });
            }
            out.add_term(power, a * b * (q - p) as f64);
        }
    }
    Ok(out)
}

/// Field at ∞ paired with `V` by the reality involution: `c λ^p -> -c̄ λ^{2-p}`.
pub fn reality_extend(v: &VectorFieldLambda) -> VectorFieldLambda {
    VectorFieldLambda::new(v.terms().map(|(p, c)| (2 - p, -c.conj())))
}

#[derive(Serialize, Deserialize)]
struct FieldJson {
    powers: Vec<i32>,
    coeffs: Vec<[f64; 2]>,
}

impl Serialize for VectorFieldLambda {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        FieldJson {
            powers: self.terms.keys().copied().collect(),
            coeffs: self.terms.values().map(|c| [c.re, c.im]).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for VectorFieldLambda {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let j = FieldJson::deserialize(d)?;
        if j.powers.len() != j.coeffs.len() {
            return Err(D::Error::custom("powers and coeffs differ in length"));
        }
        Ok(VectorFieldLambda::new(
            j.powers.into_iter().zip(j.coeffs).map(|(p, [re, im])| (p, C64::new(re, im))),
        ))
    }
}
