//! Exact rational helpers.
//!
//! Everything exact in this crate is a [`Rational`], an alias for
//! `num_rational::BigRational` (always reduced, positive denominator). The
//! text form used in reports and on the command line is `num/den`; plain
//! integers are accepted on input but decimals are rejected so that no value
//! silently loses precision.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use thiserror::Error;

pub type Rational = BigRational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseRationalError {
    #[error("empty rational literal")]
    Empty,
    #[error("decimal literals are not accepted, write `{0}` as num/den")]
    Decimal(String),
    #[error("malformed rational literal `{0}`")]
    Malformed(String),
    #[error("zero denominator in `{0}`")]
    ZeroDenominator(String),
}

/// `num/den` as a reduced rational. Panics on a zero denominator.
pub fn ratio(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn int(v: i64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

pub fn parse_rational(s: &str) -> Result<Rational, ParseRationalError> {
    let s = s.trim();
    if s.is_empty() {
        return Err(ParseRationalError::Empty);
    }
    if s.contains('.') || s.contains('e') || s.contains('E') {
        return Err(ParseRationalError::Decimal(s.to_string()));
    }
    let parse_int = |t: &str| -> Result<BigInt, ParseRationalError> {
        let t = t.trim();
        let digits = t.strip_prefix(['-', '+']).unwrap_or(t);
        if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
            return Err(ParseRationalError::Malformed(s.to_string()));
        }
        t.parse::<BigInt>()
            .map_err(|_| ParseRationalError::Malformed(s.to_string()))
    };
    match s.split_once('/') {
        None => Ok(Rational::from_integer(parse_int(s)?)),
        Some((n, d)) => {
            let n = parse_int(n)?;
            let d = parse_int(d)?;
            if d.is_zero() {
                return Err(ParseRationalError::ZeroDenominator(s.to_string()));
            }
            Ok(Rational::new(n, d))
        }
    }
}

/// Canonical text form, always `num/den` (so `1` prints as `1/1`).
pub fn format_rational(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

pub fn to_f64(r: &Rational) -> f64 {
    // Ratio::to_f64 handles huge numerators/denominators without overflow.
    r.to_f64().unwrap_or_else(|| {
        if r.is_negative() {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        }
    })
}

/// Nearest rational with the given denominator (ties away from zero).
pub fn round_to_denominator(v: f64, den: u64) -> Rational {
    let scaled = (v * den as f64).round();
    let num = BigInt::from(scaled as i128);
    Rational::new(num, BigInt::from(den))
}

pub fn ramp(x: &Rational) -> Rational {
    if x.is_negative() {
        Rational::zero()
    } else {
        x.clone()
    }
}

/// Accumulates `Σ num_i / den_i` over many terms with small integer
/// denominators, keeping one integer numerator per distinct denominator and
/// reducing to a single rational only at the end.
#[derive(Debug, Default, Clone)]
pub struct FractionSum {
    buckets: HashMap<u64, i128>,
}

impl FractionSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, num: i128, den: u64) {
        debug_assert!(den != 0);
        *self.buckets.entry(den).or_insert(0) += num;
    }

    pub fn merge(&mut self, other: &FractionSum) {
        for (&den, &num) in &other.buckets {
            self.add(num, den);
        }
    }

    pub fn total(&self) -> Rational {
        let mut dens: Vec<_> = self.buckets.iter().filter(|(_, n)| **n != 0).collect();
        dens.sort_unstable_by_key(|(d, _)| **d);
        dens.into_iter().fold(Rational::zero(), |acc, (&d, &n)| {
            acc + Rational::new(BigInt::from(n), BigInt::from(d))
        })
    }
}
