//! Rational functions of `z` and a small parser for expressions like `"(1+i)*z^2 - 1/(z-3)"`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::C64;

/// Complex polynomial with ascending coefficients.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Poly(pub Vec<C64>);

impl Poly {
    pub fn constant(c: C64) -> Self {
        Poly(vec![c])
    }

    pub fn z() -> Self {
        Poly(vec![C64::new(0.0, 0.0), C64::new(1.0, 0.0)])
    }

    pub fn eval(&self, z: C64) -> C64 {
        self.0.iter().rev().fold(C64::new(0.0, 0.0), |acc, c| acc * z + c)
    }

    pub fn derivative(&self) -> Poly {
        if self.0.len() <= 1 {
            return Poly::constant(C64::new(0.0, 0.0));
        }
        Poly(self.0.iter().enumerate().skip(1).map(|(k, c)| c * k as f64).collect())
    }

    fn add(&self, other: &Poly) -> Poly {
        let len = self.0.len().max(other.0.len());
        Poly(
            (0..len)
                .map(|k| {
                    self.0.get(k).copied().unwrap_or_default() + other.0.get(k).copied().unwrap_or_default()
                })
                .collect(),
        )
    }

    fn neg(&self) -> Poly {
        Poly(self.0.iter().map(|c| -c).collect())
    }

    fn mul(&self, other: &Poly) -> Poly {
        let mut out = vec![C64::new(0.0, 0.0); self.0.len() + other.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            for (j, b) in other.0.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly(out)
    }

    fn is_zero(&self) -> bool {
        self.0.iter().all(|c| *c == C64::new(0.0, 0.0))
    }
}

/// `f = num / den`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RationalFn {
    pub num: Poly,
    pub den: Poly,
}

impl RationalFn {
    pub fn new(num: Vec<C64>, den: Vec<C64>) -> Result<Self> {
        if num.is_empty() || den.is_empty() {
            return Err(Error::Parse("empty coefficient list".into()));
        }
        let den = Poly(den);
        if den.is_zero() {
            return Err(Error::Parse("denominator is identically zero".into()));
        }
        Ok(RationalFn { num: Poly(num), den })
    }

    pub fn polynomial(coeffs: Vec<C64>) -> Result<Self> {
        Self::new(coeffs, vec![C64::new(1.0, 0.0)])
    }

    pub fn identity() -> Self {
        RationalFn { num: Poly::z(), den: Poly::constant(C64::new(1.0, 0.0)) }
    }

    fn denominator_at(&self, z: C64) -> Result<C64> {
        let d = self.den.eval(z);
        let scale = self.den.0.iter().map(|c| c.norm()).fold(0.0, f64::max);
        if d.norm() <= 1e-12 * scale.max(1.0) {
            return Err(Error::Pole(z));
        }
        Ok(d)
    }

    pub fn eval(&self, z: C64) -> Result<C64> {
        Ok(self.num.eval(z) / self.denominator_at(z)?)
    }

    /// `f'(z)` by the quotient rule.
    pub fn derivative(&self, z: C64) -> Result<C64> {
        let d = self.denominator_at(z)?;
        let n = self.num.eval(z);
        Ok((self.num.derivative().eval(z) * d - n * self.den.derivative().eval(z)) / (d * d))
    }

    /// Parses an arithmetic expression in `z` with complex literals (`i`, `2.5i`),
    /// `+ - * /`, integer powers `^n` and parentheses.
    pub fn parse(text: &str) -> Result<Self> {
        let tokens = tokenize(text)?;
        let mut p = Parser { tokens, pos: 0 };
        let r = p.expr()?;
        if p.pos != p.tokens.len() {
            return Err(Error::Parse(format!("unexpected trailing input in {text:?}")));
        }
        if r.den.is_zero() {
            return Err(Error::Parse("denominator is identically zero".into()));
        }
        Ok(r)
    }

    fn add(&self, o: &Self) -> Self {
        RationalFn {
            num: self.num.mul(&o.den).add(&o.num.mul(&self.den)),
            den: self.den.mul(&o.den),
        }
    }

    fn mul(&self, o: &Self) -> Self {
        RationalFn { num: self.num.mul(&o.num), den: self.den.mul(&o.den) }
    }

    fn recip(&self) -> Result<Self> {
        if self.num.is_zero() {
            return Err(Error::Parse("division by zero".into()));
        }
        Ok(RationalFn { num: self.den.clone(), den: self.num.clone() })
    }

    fn neg(&self) -> Self {
        RationalFn { num: self.num.neg(), den: self.den.clone() }
    }

    fn constant(c: C64) -> Self {
        RationalFn { num: Poly::constant(c), den: Poly::constant(C64::new(1.0, 0.0)) }
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Token {
    Num(C64),
    Z,
    Op(char),
}

fn tokenize(text: &str) -> Result<Vec<Token>> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut k = 0;
    while k < chars.len() {
        let c = chars[k];
        if c.is_whitespace() {
            k += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = k;
            while k < chars.len() && (chars[k].is_ascii_digit() || chars[k] == '.' || chars[k] == 'e'
                || ((chars[k] == '-' || chars[k] == '+') && k > start && chars[k - 1] == 'e'))
            {
                k += 1;
            }
            let literal: String = chars[start..k].iter().collect();
            let value: f64 = literal
                .parse()
                .map_err(|_| Error::Parse(format!("bad number {literal:?}")))?;
            if k < chars.len() && chars[k] == 'i' {
                k += 1;
                out.push(Token::Num(C64::new(0.0, value)));
            } else {
                out.push(Token::Num(C64::new(value, 0.0)));
            }
        } else if c == 'i' {
            out.push(Token::Num(C64::new(0.0, 1.0)));
            k += 1;
        } else if c == 'z' {
            out.push(Token::Z);
            k += 1;
        } else if "+-*/^()".contains(c) {
            out.push(Token::Op(c));
            k += 1;
        } else {
            return Err(Error::Parse(format!("unexpected character {c:?}")));
        }
    }
    Ok(out)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek_op(&self) -> Option<char> {
        match self.tokens.get(self.pos) {
            Some(Token::Op(c)) => Some(*c),
            _ => None,
        }
    }

    fn expr(&mut self) -> Result<RationalFn> {
        let mut acc = self.term()?;
        while let Some(op @ ('+' | '-')) = self.peek_op() {
            self.pos += 1;
            let rhs = self.term()?;
            acc = if op == '+' { acc.add(&rhs) } else { acc.add(&rhs.neg()) };
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<RationalFn> {
        let mut acc = self.unary()?;
        loop {
            match self.peek_op() {
                Some('*') => {
                    self.pos += 1;
                    acc = acc.mul(&self.unary()?);
                }
                Some('/') => {
                    self.pos += 1;
                    acc = acc.mul(&self.unary()?.recip()?);
                }
                // Implicit multiplication such as `2z` or `3(z+1)`.
                Some('(') => acc = acc.mul(&self.unary()?),
                None if matches!(self.tokens.get(self.pos), Some(Token::Z | Token::Num(_))) => {
                    acc = acc.mul(&self.unary()?);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn unary(&mut self) -> Result<RationalFn> {
        match self.peek_op() {
            Some('-') => {
                self.pos += 1;
                Ok(self.unary()?.neg())
            }
            Some('+') => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<RationalFn> {
        let base = self.atom()?;
        if self.peek_op() != Some('^') {
            return Ok(base);
        }
        self.pos += 1;
        let negative = if self.peek_op() == Some('-') {
            self.pos += 1;
            true
        } else {
            false
        };
        let exponent = match self.tokens.get(self.pos) {
            Some(Token::Num(c)) if c.im == 0.0 && c.re.fract() == 0.0 && c.re >= 0.0 && c.re <= 64.0 => c.re as u32,
            _ => return Err(Error::Parse("exponent must be a small nonnegative integer".into())),
        };
        self.pos += 1;
        let mut out = RationalFn::constant(C64::new(1.0, 0.0));
        for _ in 0..exponent {
            out = out.mul(&base);
        }
        if negative {
            out = out.recip()?;
        }
        Ok(out)
    }

    fn atom(&mut self) -> Result<RationalFn> {
        let token = self
            .tokens
            .get(self.pos)
            .cloned()
            .ok_or_else(|| Error::Parse("unexpected end of expression".into()))?;
        self.pos += 1;
        match token {
            Token::Num(c) => Ok(RationalFn::constant(c)),
            Token::Z => Ok(RationalFn::identity()),
            Token::Op('(') => {
                let inner = self.expr()?;
                if self.peek_op() != Some(')') {
                    return Err(Error::Parse("missing ')'".into()));
                }
                self.pos += 1;
                Ok(inner)
            }
            Token::Op(c) => Err(Error::Parse(format!("unexpected {c:?}"))),
        }
    }
}
