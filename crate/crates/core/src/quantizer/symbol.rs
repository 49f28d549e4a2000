//! Classical polynomial symbols `h(q, p) = sum c q^a p^b` and their text form.
//!
//! Grammar (whitespace is insignificant):
//!
//! ```text
//! symbol := ['+' | '-'] term (('+' | '-') term)*
//! term   := factor ('*' factor)*
//! factor := number | 'q' ['^' int] | 'p' ['^' int]
//! ```
//!
//! Factors within a term commute, so `p*q` and `q*p` denote the same monomial.

use std::fmt;
use std::ops::{Add, Mul};
use std::str::FromStr;

use thiserror::Error;

/// Largest total degree `a + b` accepted for a monomial.
pub const MAX_DEGREE: u32 = 8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SymbolError {
    #[error("parse error at column {column}: {message}")]
    Parse { column: usize, message: String },
    #[error("monomial q^{q_power} p^{p_power} exceeds the maximum total degree {MAX_DEGREE}")]
    DegreeTooHigh { q_power: u32, p_power: u32 },
    #[error("coefficient {0} is not finite")]
    NonFinite(f64),
    #[error("symbol has no terms")]
    Empty,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Monomial {
    pub q_power: u32,
    pub p_power: u32,
    pub coeff: f64,
}

impl Monomial {
    pub fn new(q_power: u32, p_power: u32, coeff: f64) -> Self {
        Self {
            q_power,
            p_power,
            coeff,
        }
    }

    pub fn degree(&self) -> u32 {
        self.q_power + self.p_power
    }
}

/// Real polynomial in `q` and `p`. Terms keep their insertion order; equal
/// powers are merged.
#[derive(Debug, Clone, PartialEq)]
pub struct PolynomialSymbol {
    terms: Vec<Monomial>,
}

impl PolynomialSymbol {
    pub fn new(terms: impl IntoIterator<Item = Monomial>) -> Result<Self, SymbolError> {
        let mut merged: Vec<Monomial> = Vec::new();
        for t in terms {
            if !t.coeff.is_finite() {
                return Err(SymbolError::NonFinite(t.coeff));
            }
            if t.degree() > MAX_DEGREE {
                return Err(SymbolError::DegreeTooHigh {
                    q_power: t.q_power,
                    p_power: t.p_power,
                });
            }
            match merged
                .iter_mut()
                .find(|m| m.q_power == t.q_power && m.p_power == t.p_power)
            {
                Some(m) => m.coeff += t.coeff,
                None => merged.push(t),
            }
        }
        if merged.is_empty() {
            return Err(SymbolError::Empty);
        }
        Ok(Self { terms: merged })
    }

    pub fn monomial(q_power: u32, p_power: u32, coeff: f64) -> Result<Self, SymbolError> {
        Self::new([Monomial::new(q_power, p_power, coeff)])
    }

    pub fn terms(&self) -> &[Monomial] {
        &self.terms
    }

    pub fn degree(&self) -> u32 {
        self.terms.iter().map(Monomial::degree).max().unwrap_or(0)
    }
}

impl Add for &PolynomialSymbol {
    type Output = PolynomialSymbol;

    fn add(self, rhs: &PolynomialSymbol) -> PolynomialSymbol {
        PolynomialSymbol::new(self.terms.iter().chain(&rhs.terms).copied())
            .expect("sum of valid symbols is valid")
    }
}

impl Mul<&PolynomialSymbol> for f64 {
    type Output = PolynomialSymbol;

    fn mul(self, rhs: &PolynomialSymbol) -> PolynomialSymbol {
        PolynomialSymbol::new(rhs.terms.iter().map(|m| Monomial {
            coeff: self * m.coeff,
            ..*m
        }))
        .expect("finite scaling of a valid symbol")
    }
}

impl fmt::Display for PolynomialSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, m) in self.terms.iter().enumerate() {
            let (sign, mag) = if m.coeff.is_sign_negative() {
                ("-", -m.coeff)
            } else {
                ("+", m.coeff)
            };
            match (k, sign) {
                (0, "-") => write!(f, "-")?,
                (0, _) => {}
                _ => write!(f, " {sign} ")?,
            }
            // `{:?}` prints the shortest representation that round-trips
            write!(f, "{mag:?}")?;
            if m.q_power > 0 {
                write!(f, "*q^{}", m.q_power)?;
            }
            if m.p_power > 0 {
                write!(f, "*p^{}", m.p_power)?;
            }
        }
        Ok(())
    }
}

impl FromStr for PolynomialSymbol {
    type Err = SymbolError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Parser::new(s).parse()
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn new(s: &'a str) -> Self {
        Self {
            src: s.as_bytes(),
            pos: 0,
        }
    }

    fn error<T>(&self, message: impl Into<String>) -> Result<T, SymbolError> {
        Err(SymbolError::Parse {
            column: self.pos + 1,
            message: message.into(),
        })
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn parse(mut self) -> Result<PolynomialSymbol, SymbolError> {
        let mut terms = Vec::new();
        let mut sign = match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                -1.0
            }
            Some(b'+') => {
                self.pos += 1;
                1.0
            }
            None => return self.error("empty symbol"),
            _ => 1.0,
        };
        loop {
            let mut m = self.term()?;
            m.coeff *= sign;
            terms.push(m);
            match self.peek() {
                None => break,
                Some(b'+') => sign = 1.0,
                Some(b'-') => sign = -1.0,
                Some(c) => return self.error(format!("unexpected character '{}'", c as char)),
            }
            self.pos += 1;
        }
        PolynomialSymbol::new(terms)
    }

    fn term(&mut self) -> Result<Monomial, SymbolError> {
        let mut m = Monomial::new(0, 0, 1.0);
        loop {
            self.factor(&mut m)?;
            if self.peek() == Some(b'*') {
                self.pos += 1;
            } else {
                return Ok(m);
            }
        }
    }

    fn factor(&mut self, m: &mut Monomial) -> Result<(), SymbolError> {
        match self.peek() {
            Some(c @ (b'q' | b'p')) => {
                self.pos += 1;
                let power = if self.peek() == Some(b'^') {
                    self.pos += 1;
                    self.integer()?
                } else {
                    1
                };
                let slot = if c == b'q' {
                    &mut m.q_power
                } else {
                    &mut m.p_power
                };
                *slot = slot.saturating_add(power);
                Ok(())
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => {
                m.coeff *= self.number()?;
                Ok(())
            }
            Some(c) => self.error(format!("expected a number, 'q' or 'p', found '{}'", c as char)),
            None => self.error("unexpected end of input"),
        }
    }

    fn integer(&mut self) -> Result<u32, SymbolError> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return self.error("expected an integer exponent");
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii digits");
        text.parse().or_else(|_| {
            self.pos = start;
            self.error(format!("exponent '{text}' is out of range"))
        })
    }

    /// Unsigned decimal literal with optional fraction and exponent.
    fn number(&mut self) -> Result<f64, SymbolError> {
        let start = self.pos;
        let digits = |p: &mut Self| {
            while p.pos < p.src.len() && p.src[p.pos].is_ascii_digit() {
                p.pos += 1;
            }
        };
        digits(self);
        if self.src.get(self.pos) == Some(&b'.') {
            self.pos += 1;
            digits(self);
        }
        if matches!(self.src.get(self.pos), Some(b'e' | b'E')) {
            let mark = self.pos;
            self.pos += 1;
            if matches!(self.src.get(self.pos), Some(b'+' | b'-')) {
                self.pos += 1;
            }
            let exp_start = self.pos;
            digits(self);
            if exp_start == self.pos {
                self.pos = mark;
                return self.error("malformed exponent in number");
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
        text.parse::<f64>().or_else(|_| {
            self.pos = start;
            self.error(format!("invalid number '{text}'"))
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_documented_example() {
        let s: PolynomialSymbol = "1.0*q^2*p^2 + 0.5*q".parse().unwrap();
        assert_eq!(
            s.terms(),
            &[Monomial::new(2, 2, 1.0), Monomial::new(1, 0, 0.5)]
        );
    }

    #[test]
    fn whitespace_signs_and_implicit_coefficients() {
        let s: PolynomialSymbol = " - q ^ 2 *0.5- p*p*0.5 + 2e-1 * p * q ".parse().unwrap();
        assert_eq!(
            s.terms(),
            &[
                Monomial::new(2, 0, -0.5),
                Monomial::new(0, 2, -0.5),
                Monomial::new(1, 1, 0.2)
            ]
        );
    }

    #[test]
    fn like_terms_merge() {
        let s: PolynomialSymbol = "q*p + p*q".parse().unwrap();
        assert_eq!(s.terms(), &[Monomial::new(1, 1, 2.0)]);
    }

    #[test]
    fn constants_are_allowed() {
        let s: PolynomialSymbol = "3 + q".parse().unwrap();
        assert_eq!(s.terms()[0], Monomial::new(0, 0, 3.0));
    }

    #[test]
    fn errors_report_columns() {
        let err = "q + x".parse::<PolynomialSymbol>().unwrap_err();
        assert_eq!(
            err,
            SymbolError::Parse {
                column: 5,
                message: "expected a number, 'q' or 'p', found 'x'".into()
            }
        );
        assert!(matches!(
            "q^".parse::<PolynomialSymbol>(),
            Err(SymbolError::Parse { column: 3, .. })
        ));
        assert!("".parse::<PolynomialSymbol>().is_err());
        assert!("q +".parse::<PolynomialSymbol>().is_err());
        assert!("1e".parse::<PolynomialSymbol>().is_err());
    }

    #[test]
    fn degree_envelope() {
        assert!("q^4*p^4".parse::<PolynomialSymbol>().is_ok());
        assert!(matches!(
            "q^5*p^4".parse::<PolynomialSymbol>(),
            Err(SymbolError::DegreeTooHigh { .. })
        ));
    }

    fn arb_symbol() -> impl Strategy<Value = PolynomialSymbol> {
        prop::collection::vec((0u32..5, 0u32..4, -1e3f64..1e3), 1..6).prop_filter_map(
            "valid symbol",
            |terms| {
                PolynomialSymbol::new(terms.into_iter().map(|(a, b, c)| Monomial::new(a, b, c)))
                    .ok()
            },
        )
    }

    proptest! {
        #[test]
        fn display_round_trips(s in arb_symbol()) {
            let text = s.to_string();
            let back: PolynomialSymbol = text.parse().unwrap();
            prop_assert_eq!(back, s);
        }
    }
}
