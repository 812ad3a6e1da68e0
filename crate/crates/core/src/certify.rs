//! Exact polynomials and the derivative sign chain showing that the
//! threshold polynomial `W(d)` is negative on an interval.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::rational::{format_rational, Rational};

/// Dense univariate polynomial with exact coefficients, lowest degree first.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Polynomial {
    coeffs: Vec<Rational>,
}

impl Polynomial {
    pub fn new(mut coeffs: Vec<Rational>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn from_integers(coeffs: &[i64]) -> Self {
        Self::new(coeffs.iter().map(|&c| Rational::from_integer(BigInt::from(c))).collect())
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: Rational) -> Self {
        Self::new(vec![c])
    }

    /// `a + b·d`.
    pub fn linear(a: i64, b: i64) -> Self {
        Self::from_integers(&[a, b])
    }

    pub fn coefficients(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn eval(&self, d: &Rational) -> Rational {
        self.coeffs.iter().rev().fold(Rational::zero(), |acc, c| acc * d + c)
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c * Rational::from_integer(BigInt::from(i)))
                .collect(),
        )
    }

    /// The `k`-th derivative.
    pub fn nth_derivative(&self, k: usize) -> Self {
        (0..k).fold(self.clone(), |p, _| p.derivative())
    }

    pub fn pow(&self, e: u32) -> Self {
        (0..e).fold(Self::constant(Rational::one()), |acc, _| &acc * self)
    }
}

impl Add for &Polynomial {
    type Output = Polynomial;

    fn add(self, rhs: &Polynomial) -> Polynomial {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let zero = Rational::zero();
        Polynomial::new(
            (0..n)
                .map(|i| self.coeffs.get(i).unwrap_or(&zero) + rhs.coeffs.get(i).unwrap_or(&zero))
                .collect(),
        )
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;

    fn neg(self) -> Polynomial {
        Polynomial::new(self.coeffs.iter().map(|c| -c).collect())
    }
}

impl Sub for &Polynomial {
    type Output = Polynomial;

    fn sub(self, rhs: &Polynomial) -> Polynomial {
        self + &(-rhs)
    }
}

impl Mul for &Polynomial {
    type Output = Polynomial;

    fn mul(self, rhs: &Polynomial) -> Polynomial {
        if self.is_zero() || rhs.is_zero() {
            return Polynomial::zero();
        }
        let mut out = vec![Rational::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Polynomial::new(out)
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let mag = c.abs().to_string();
            match (first, c.is_negative()) {
                (true, true) => f.write_str("-")?,
                (true, false) => {}
                (false, true) => f.write_str(" - ")?,
                (false, false) => f.write_str(" + ")?,
            }
            match i {
                0 => write!(f, "{mag}")?,
                1 => write!(f, "{mag}d")?,
                _ => write!(f, "{mag}d^{i}")?,
            }
            first = false;
        }
        Ok(())
    }
}

/// `W(d) = (W13(d) - 1)(1-3d)^3(1-2d)^3`, expanded from its six-term
/// product form.
pub fn threshold_polynomial() -> Polynomial {
    let d = Polynomial::linear(0, 1);
    let u = Polynomial::linear(1, -1);
    let a = Polynomial::linear(1, -2);
    let b = Polynomial::linear(1, -3);
    let three = Polynomial::from_integers(&[3]);
    let prod = |fs: &[&Polynomial]| fs.iter().fold(Polynomial::from_integers(&[1]), |acc, f| &acc * f);
    let u2 = u.pow(2);
    let u3 = u.pow(3);
    let terms = [
        prod(&[&three, &d, &u2, &b.pow(3)]),
        prod(&[&three, &d, &u2, &b.pow(2), &a]),
        prod(&[&u2, &d, &a.pow(2), &b]),
        prod(&[&d, &u3, &b, &a]),
        prod(&[&three, &u3, &d, &a.pow(2)]),
    ];
    let sum = terms.iter().fold(Polynomial::zero(), |acc, t| &acc + t);
    &sum - &(&b.pow(3) * &a.pow(3))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Increasing,
    Decreasing,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Sign {
    Negative,
    Positive,
}

/// How a step's monotonicity was established.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Monotonicity {
    /// The interval is a single point.
    Degenerate,
    /// A quadratic with this leading coefficient and vertex, lying outside
    /// the open interval.
    Vertex { leading: Rational, vertex: Rational },
    /// The sign of the next derivative, concluded by the previous record.
    NextDerivative(Sign),
}

/// One link of the chain: derivative `order` is monotone on the interval,
/// and its value at `endpoint` fixes its sign there.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignRecord {
    pub order: usize,
    pub direction: Direction,
    pub monotonicity: Monotonicity,
    pub endpoint: Rational,
    pub value: Rational,
    pub sign: Option<Sign>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignCertificate {
    pub lo: Rational,
    pub hi: Rational,
    pub records: Vec<SignRecord>,
    pub verdict: bool,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CertifyError {
    #[error("invalid interval [{lo}, {hi}]")]
    InvalidInterval { lo: String, hi: String },
    #[error("certification failed at the order-{step} step: {reason}")]
    CertificationFailed {
        step: usize,
        reason: String,
        certificate: Box<SignCertificate>,
    },
}

/// The sign a monotone function has on `[lo, hi]`, read from one endpoint,
/// along with that endpoint.
fn conclude(
    dir: Direction,
    p: &Polynomial,
    lo: &Rational,
    hi: &Rational,
) -> (Rational, Rational, Option<Sign>) {
    let (neg_at, pos_at) = match dir {
        Direction::Increasing => (hi, lo),
        Direction::Decreasing => (lo, hi),
    };
    let v = p.eval(neg_at);
    if v.is_negative() {
        return (neg_at.clone(), v, Some(Sign::Negative));
    }
    let w = p.eval(pos_at);
    if w.is_positive() {
        return (pos_at.clone(), w, Some(Sign::Positive));
    }
    (neg_at.clone(), v, None)
}

fn entailed_sign(dir: Direction, lo: &Rational, hi: &Rational, at: &Rational, value: &Rational) -> Option<Sign> {
    let (neg_at, pos_at) = match dir {
        Direction::Increasing => (hi, lo),
        Direction::Decreasing => (lo, hi),
    };
    if at == neg_at && value.is_negative() {
        Some(Sign::Negative)
    } else if at == pos_at && value.is_positive() {
        Some(Sign::Positive)
    } else {
        None
    }
}

fn vertex_direction(q: &Polynomial, lo: &Rational, hi: &Rational) -> Option<(Direction, Monotonicity)> {
    if lo == hi {
        return Some((Direction::Increasing, Monotonicity::Degenerate));
    }
    let c = q.coefficients();
    if c.len() != 3 {
        return None;
    }
    let vertex = -&c[1] / (Rational::from_integer(BigInt::from(2)) * &c[2]);
    let leading = c[2].clone();
    let left_of_vertex = hi <= &vertex;
    let right_of_vertex = lo >= &vertex;
    let dir = match (leading.is_negative(), left_of_vertex, right_of_vertex) {
        (true, true, _) | (false, _, true) => Direction::Increasing,
        (true, _, true) | (false, true, _) => Direction::Decreasing,
        _ => return None,
    };
    Some((dir, Monotonicity::Vertex { leading, vertex }))
}

/// Certifies `W(d) < 0` on `[lo, hi]` by the chain
/// `W'''' -> W''' -> W'' -> W' -> W`: the quadratic `W''''` is monotone
/// because its vertex lies outside the interval, each derivative's sign
/// follows from monotonicity and one endpoint, and each sign gives the
/// monotonicity of the derivative below it.
pub fn certify_sign_chain(lo: &Rational, hi: &Rational) -> Result<SignCertificate, CertifyError> {
    if lo.is_negative() || lo > hi {
        return Err(CertifyError::InvalidInterval { lo: format_rational(lo), hi: format_rational(hi) });
    }
    let w = threshold_polynomial();
    let mut cert = SignCertificate { lo: lo.clone(), hi: hi.clone(), records: Vec::new(), verdict: false };
    let fail = |cert: &SignCertificate, step: usize, reason: String| CertifyError::CertificationFailed {
        step,
        reason,
        certificate: Box::new(cert.clone()),
    };

    let top = w.nth_derivative(4);
    let Some((mut direction, mut monotonicity)) = vertex_direction(&top, lo, hi) else {
        return Err(fail(&cert, 4, "the vertex of W'''' lies inside the interval".into()));
    };
    for order in (0..=4).rev() {
        let p = w.nth_derivative(order);
        let (endpoint, value, sign) = conclude(direction, &p, lo, hi);
        cert.records.push(SignRecord {
            order,
            direction,
            monotonicity: monotonicity.clone(),
            endpoint: endpoint.clone(),
            value: value.clone(),
            sign,
        });
        match sign {
            None => {
                return Err(fail(
                    &cert,
                    order,
                    format!("no sign: value {} at d = {}", format_rational(&value), format_rational(&endpoint)),
                ))
            }
            Some(Sign::Positive) if order == 0 => {
                return Err(fail(&cert, 0, "W is positive on the interval".into()))
            }
            Some(s) => {
                direction = match s {
                    Sign::Negative => Direction::Decreasing,
                    Sign::Positive => Direction::Increasing,
                };
                monotonicity = Monotonicity::NextDerivative(s);
            }
        }
    }
    cert.verdict = true;
    Ok(cert)
}

impl SignCertificate {
    /// Re-derives the verdict from the records alone: every sign must follow
    /// from its direction and endpoint value, every direction from the
    /// previous sign or the recorded vertex, and the chain must end with
    /// `W < 0`.
    pub fn recheck(&self) -> bool {
        if self.records.len() != 5 {
            return false;
        }
        let mut expected_sign: Option<Sign> = None;
        for (i, r) in self.records.iter().enumerate() {
            if r.order != 4 - i {
                return false;
            }
            let direction_ok = match (&r.monotonicity, expected_sign) {
                (Monotonicity::Degenerate, None) => self.lo == self.hi,
                (Monotonicity::Vertex { leading, vertex }, None) => match r.direction {
                    Direction::Increasing => {
                        (leading.is_negative() && &self.hi <= vertex)
                            || (leading.is_positive() && &self.lo >= vertex)
                    }
                    Direction::Decreasing => {
                        (leading.is_negative() && &self.lo >= vertex)
                            || (leading.is_positive() && &self.hi <= vertex)
                    }
                },
                (Monotonicity::NextDerivative(s), Some(prev)) => {
                    *s == prev
                        && r.direction
                            == match prev {
                                Sign::Negative => Direction::Decreasing,
                                Sign::Positive => Direction::Increasing,
                            }
                }
                _ => false,
            };
            if !direction_ok {
                return false;
            }
            let entailed = entailed_sign(r.direction, &self.lo, &self.hi, &r.endpoint, &r.value);
            if entailed.is_none() || entailed != r.sign {
                return false;
            }
            expected_sign = r.sign;
        }
        expected_sign == Some(Sign::Negative) && self.verdict
    }
}

/// Largest `d` on the dyadic grid of `[0, 1/4]` refined until the bracket is
/// narrower than `precision`, for which the sign chain still closes on
/// `[0, d]`.
pub fn bisect_threshold(precision: &Rational) -> Rational {
    assert!(precision.is_positive(), "precision must be positive");
    let zero = Rational::zero();
    let mut lo = zero.clone();
    let mut hi = Rational::new(BigInt::from(1), BigInt::from(4));
    let half = Rational::new(BigInt::from(1), BigInt::from(2));
    while &(&hi - &lo) > precision {
        let mid = (&lo + &hi) * &half;
        if certify_sign_chain(&zero, &mid).is_ok() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};

    #[test]
    fn ring_operations() {
        let p = Polynomial::from_integers(&[1, 2]);
        let q = Polynomial::from_integers(&[-1, 0, 3]);
        assert_eq!(&p * &q, Polynomial::from_integers(&[-1, -2, 3, 6]));
        assert_eq!(&p - &p, Polynomial::zero());
        assert_eq!((&p + &q).degree(), Some(2));
        assert_eq!(Polynomial::from_integers(&[0, 0]).degree(), None);
        assert_eq!(Polynomial::from_integers(&[5]).derivative(), Polynomial::zero());
        assert_eq!(q.to_string(), "-1 + 3d^2");
    }

    #[test]
    fn evaluation_is_horner_exact() {
        let p = Polynomial::from_integers(&[1, -3, 2]);
        assert_eq!(p.eval(&ratio(1, 2)), int(0));
        assert_eq!(p.eval(&int(1)), int(0));
        assert_eq!(p.eval(&int(3)), int(10));
    }

    #[test]
    fn chain_closes_on_small_intervals() {
        let c = certify_sign_chain(&int(0), &ratio(1, 20)).unwrap();
        assert!(c.verdict && c.recheck());
        let c = certify_sign_chain(&int(0), &int(0)).unwrap();
        assert!(c.recheck());
        assert_eq!(c.records[4].value, int(-1));
    }

    #[test]
    fn tampered_certificate_fails_recheck() {
        let mut c = certify_sign_chain(&int(0), &ratio(2, 33)).unwrap();
        c.records[2].value = -c.records[2].value.clone();
        assert!(!c.recheck());
    }

    #[test]
    fn invalid_interval_rejected() {
        assert!(matches!(
            certify_sign_chain(&ratio(1, 10), &ratio(1, 20)),
            Err(CertifyError::InvalidInterval { .. })
        ));
    }

    #[test]
    fn threshold_is_bracketed() {
        let precision = ratio(1, 100_000);
        let t = bisect_threshold(&precision);
        assert!(certify_sign_chain(&int(0), &t).is_ok());
        assert!(certify_sign_chain(&int(0), &(&t + &precision)).is_err());
        assert!(t >= ratio(2, 33) && t < ratio(1, 5), "{t}");
    }
}
