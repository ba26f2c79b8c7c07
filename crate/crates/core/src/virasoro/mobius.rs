use num_rational::Rational64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::C64;

use super::field::VectorFieldLambda;

fn zero() -> Rational64 {
    Rational64::from_integer(0)
}

fn trim(mut p: Vec<Rational64>) -> Vec<Rational64> {
    while p.last() == Some(&zero()) {
        p.pop();
    }
    p
}

fn poly_mul(a: &[Rational64], b: &[Rational64]) -> Vec<Rational64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    trim(out)
}

fn poly_sub(a: &[Rational64], b: &[Rational64]) -> Vec<Rational64> {
    let mut out = vec![zero(); a.len().max(b.len())];
    for (i, x) in a.iter().enumerate() {
        out[i] += x;
    }
    for (i, y) in b.iter().enumerate() {
        out[i] -= y;
    }
    trim(out)
}

fn poly_derivative(a: &[Rational64]) -> Vec<Rational64> {
    trim(a.iter().enumerate().skip(1).map(|(k, c)| c * Rational64::from_integer(k as i64)).collect())
}

fn poly_pow(base: &[Rational64], e: u32) -> Vec<Rational64> {
    (0..e).fold(vec![Rational64::from_integer(1)], |acc, _| poly_mul(&acc, base))
}

/// First `len` coefficients of the power series `num / den`; needs `den[0] != 0`.
fn series_div(num: &[Rational64], den: &[Rational64], len: usize) -> Vec<Rational64> {
    let mut out = Vec::with_capacity(len);
    for k in 0..len {
        let mut acc = num.get(k).copied().unwrap_or_else(zero);
        for j in 1..=k.min(den.len().saturating_sub(1)) {
            acc -= den[j] * out[k - j];
        }
        out.push(acc / den[0]);
    }
    out
}

/// Vector field `(num / den)(λ) d/dλ` with exact rational coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct RationalField {
    num: Vec<Rational64>,
    den: Vec<Rational64>,
}

impl RationalField {
    pub fn new(num: Vec<Rational64>, den: Vec<Rational64>) -> Result<Self> {
        let den = trim(den);
        if den.is_empty() {
            return Err(Error::Construction("rational field with zero denominator".into()));
        }
        Ok(RationalField { num: trim(num), den })
    }

    pub fn num(&self) -> &[Rational64] {
        &self.num
    }

    pub fn den(&self) -> &[Rational64] {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_empty()
    }

    pub fn scale(&self, s: Rational64) -> Self {
        RationalField { num: trim(self.num.iter().map(|c| c * s).collect()), den: self.den.clone() }
    }

    /// `[a/b, c/d] = (a/b)(c/d)' - (c/d)(a/b)'`, over the common denominator `b^2 d^2`.
    pub fn bracket(&self, other: &Self) -> Self {
        let (a, b, c, d) = (&self.num, &self.den, &other.num, &other.den);
        let cp = poly_sub(&poly_mul(&poly_derivative(c), d), &poly_mul(c, &poly_derivative(d)));
        let ap = poly_sub(&poly_mul(&poly_derivative(a), b), &poly_mul(a, &poly_derivative(b)));
        let num = poly_sub(&poly_mul(&poly_mul(a, b), &cp), &poly_mul(&poly_mul(c, d), &ap));
        let bb = poly_mul(b, b);
        let dd = poly_mul(d, d);
        RationalField { num, den: poly_mul(&bb, &dd) }
    }

    /// Equality as rational functions, by cross-multiplication.
    pub fn same_field(&self, other: &Self) -> bool {
        poly_mul(&self.num, &other.den) == poly_mul(&other.num, &self.den)
    }

    /// `(power, coeff)` for the first `len` terms of the Laurent expansion at 0.
    pub fn expand_at_zero(&self, len: usize) -> Result<Vec<(i32, Rational64)>> {
        let shift = self.den.iter().take_while(|c| **c == zero()).count();
        let s = series_div(&self.num, &self.den[shift..], len);
        Ok(s.into_iter().enumerate().map(|(k, c)| (k as i32 - shift as i32, c)).filter(|(_, c)| *c != zero()).collect())
    }

    /// `(power, coeff)` for the first `len` terms of the expansion at ∞, in descending powers.
    pub fn expand_at_infinity(&self, len: usize) -> Vec<(i32, Rational64)> {
        if self.is_zero() {
            return Vec::new();
        }
        let top = self.num.len() as i32 - self.den.len() as i32;
        let rn: Vec<Rational64> = self.num.iter().rev().copied().collect();
        let rd: Vec<Rational64> = self.den.iter().rev().copied().collect();
        series_div(&rn, &rd, len).into_iter().enumerate().map(|(k, c)| (top - k as i32, c)).filter(|(_, c)| *c != zero()).collect()
    }
}

/// Floating-point field from exact `(power, coeff)` terms.
pub fn to_vector_field(terms: &[(i32, Rational64)]) -> VectorFieldLambda {
    VectorFieldLambda::new(terms.iter().map(|&(p, c)| (p, C64::new(*c.numer() as f64 / *c.denom() as f64, 0.0))))
}

/// Pushforward of the generator `L_j` through the Cayley transform, `j >= -1`:
/// `(λ - 1)^{j+1} (λ + 1)^{1-j} / 2 · d/dλ`.
pub fn mobius_field(j: i32) -> Result<RationalField> {
    if j < -1 {
        return Err(Error::Construction(format!("Cayley pushforward needs j >= -1, got {j}")));
    }
    let one = Rational64::from_integer(1);
    let lm = [-one, one];
    let lp = [one, one];
    let half = Rational64::new(1, 2);
    let a = poly_pow(&lm, (j + 1) as u32);
    if j <= 1 {
        let num = poly_mul(&a, &poly_pow(&lp, (1 - j) as u32));
        Ok(RationalField::new(num.iter().map(|c| c * half).collect(), vec![one])?)
    } else {
        Ok(RationalField::new(a.iter().map(|c| c * half).collect(), poly_pow(&lp, (j - 1) as u32))?)
    }
}

/// A Cayley-pushed generator with its exact expansions at 0 and ∞.
#[derive(Clone, Debug, PartialEq)]
pub struct MobiusField {
    pub j: i32,
    pub field: RationalField,
    pub near_zero: Vec<(i32, Rational64)>,
    pub near_infinity: Vec<(i32, Rational64)>,
}

/// [`mobius_field`] with `len` terms of each expansion.
pub fn mobius_pushforward(j: i32, len: usize) -> Result<MobiusField> {
    let field = mobius_field(j)?;
    let near_zero = field.expand_at_zero(len)?;
    let near_infinity = field.expand_at_infinity(len);
    Ok(MobiusField { j, field, near_zero, near_infinity })
}

fn show(c: &Rational64) -> String {
    if *c.denom() == 1 {
        c.numer().to_string()
    } else {
        format!("{}/{}", c.numer(), c.denom())
    }
}

#[derive(Serialize)]
struct TermsJson {
    powers: Vec<i32>,
    coeffs: Vec<String>,
}

impl TermsJson {
    fn of(terms: &[(i32, Rational64)]) -> Self {
        TermsJson { powers: terms.iter().map(|t| t.0).collect(), coeffs: terms.iter().map(|t| show(&t.1)).collect() }
    }
}

#[derive(Serialize)]
struct MobiusJson {
    j: i32,
    numerator: Vec<String>,
    denominator: Vec<String>,
    near_zero: TermsJson,
    near_infinity: TermsJson,
}

impl Serialize for MobiusField {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        MobiusJson {
            j: self.j,
            numerator: self.field.num.iter().map(show).collect(),
            denominator: self.field.den.iter().map(show).collect(),
            near_zero: TermsJson::of(&self.near_zero),
            near_infinity: TermsJson::of(&self.near_infinity),
        }
        .serialize(s)
    }
}
