//! The chain of relaxed programs bounding `W'_G(O)`.
//!
//! Programs `P1`..`P12` are stated over common-neighbour densities; each one's
//! optimum bounds its predecessor's, and the closed form `W13(d)` bounds the
//! last. This module evaluates every objective exactly, checks the interval
//! constraints, applies the pinning substitutions, and samples the pointwise
//! inequalities the reductions rest on.

pub mod chain;
pub mod objectives;
pub mod reduce;
pub mod structured;

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};
use rand::Rng;
use serde::Serialize;
use thiserror::Error;

use crate::rational::{format_rational, Rational};

pub use chain::{
    chain_inequality_check, run_chain_suite, ChainConfig, ChainReport, CheckResult, Witness,
};
pub use objectives::w13;
pub use reduce::{pinned_point, reduce_point};
pub use structured::{
    graph_to_p1_point, p1_to_p2, p2_to_p3, sample_p1, sample_p2, symmetrize_p1, symmetrize_p2,
    BlockLimits, InnerBlock, P1Block, P2Block, StructuredFamily, StructuredPoint,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NlpError {
    #[error("point lacks variable `{0}`")]
    MissingVariable(Var),
    #[error("zero denominator while evaluating {0}")]
    ZeroDenominator(ProgramId),
    #[error("{0} is evaluated on a {1} point")]
    WrongPointKind(ProgramId, &'static str),
    #[error("{0} has no pinning substitution")]
    NoSubstitution(ProgramId),
    #[error("unsupported program pair ({0}, {1})")]
    UnsupportedPair(ProgramId, ProgramId),
    #[error("unknown program `{0}`")]
    UnknownProgram(String),
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
}

/// The programs of the reduction chain, in chain order, followed by the
/// closed-form bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum ProgramId {
    P1,
    P2,
    P3,
    P4,
    P5,
    P6,
    P7,
    P8,
    P9,
    P10,
    P11,
    P12,
    W13,
}

impl ProgramId {
    pub const ALL: [ProgramId; 13] = [
        ProgramId::P1,
        ProgramId::P2,
        ProgramId::P3,
        ProgramId::P4,
        ProgramId::P5,
        ProgramId::P6,
        ProgramId::P7,
        ProgramId::P8,
        ProgramId::P9,
        ProgramId::P10,
        ProgramId::P11,
        ProgramId::P12,
        ProgramId::W13,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ProgramId::P1 => "P1",
            ProgramId::P2 => "P2",
            ProgramId::P3 => "P3",
            ProgramId::P4 => "P4",
            ProgramId::P5 => "P5",
            ProgramId::P6 => "P6",
            ProgramId::P7 => "P7",
            ProgramId::P8 => "P8",
            ProgramId::P9 => "P9",
            ProgramId::P10 => "P10",
            ProgramId::P11 => "P11",
            ProgramId::P12 => "P12",
            ProgramId::W13 => "W13",
        }
    }

    /// The next program in the chain; `W13` follows `P12` and has no successor.
    pub fn successor(self) -> Option<ProgramId> {
        let i = ProgramId::ALL.iter().position(|&p| p == self)?;
        ProgramId::ALL.get(i + 1).copied()
    }

    pub fn is_structured(self) -> bool {
        matches!(self, ProgramId::P1 | ProgramId::P2)
    }

    /// Variables of a scalar program, in constraint order. Empty for the
    /// structured programs and for `W13`.
    pub fn variables(self) -> &'static [Var] {
        use Var::*;
        match self {
            ProgramId::P3 | ProgramId::P4 => &[X, YPrime, E0, E, F, G0, Q0, Q, P0, P, H, R0, R],
            ProgramId::P5 => &[X, YPrime, E0, E, F, G0, Q0, Q, P0],
            ProgramId::P6 => &[X, YPrime, E0, E, F, G0, Q],
            ProgramId::P7 => &[X, YPrime, E0, E, F, G0],
            ProgramId::P8 => &[X, YPrime, E0, E, F],
            ProgramId::P9 => &[X, YPrime, A, B],
            ProgramId::P10 => &[X, A, B],
            ProgramId::P11 => &[A, B],
            ProgramId::P12 => &[A],
            ProgramId::P1 | ProgramId::P2 | ProgramId::W13 => &[],
        }
    }
}

impl fmt::Display for ProgramId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ProgramId {
    type Err = NlpError;

    fn from_str(s: &str) -> Result<Self, NlpError> {
        ProgramId::ALL
            .into_iter()
            .find(|p| p.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| NlpError::UnknownProgram(s.to_string()))
    }
}

/// Scalar variables shared by programs `P3`..`P12`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Var {
    X,
    YPrime,
    E0,
    E,
    F,
    G0,
    Q0,
    Q,
    P0,
    P,
    H,
    R0,
    R,
    A,
    B,
}

impl Var {
    pub const ALL: [Var; 15] = [
        Var::X,
        Var::YPrime,
        Var::E0,
        Var::E,
        Var::F,
        Var::G0,
        Var::Q0,
        Var::Q,
        Var::P0,
        Var::P,
        Var::H,
        Var::R0,
        Var::R,
        Var::A,
        Var::B,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Var::X => "x",
            Var::YPrime => "y'",
            Var::E0 => "e0",
            Var::E => "e",
            Var::F => "f",
            Var::G0 => "g0",
            Var::Q0 => "q0",
            Var::Q => "q",
            Var::P0 => "p0",
            Var::P => "p",
            Var::H => "h",
            Var::R0 => "r0",
            Var::R => "r",
            Var::A => "a",
            Var::B => "b",
        }
    }

    fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Var {
    type Err = NlpError;

    fn from_str(s: &str) -> Result<Self, NlpError> {
        Var::ALL
            .into_iter()
            .find(|v| v.name() == s.trim())
            .ok_or_else(|| NlpError::UnknownVariable(s.to_string()))
    }
}

/// A partial assignment of exact values to the scalar variables.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct ScalarPoint {
    values: [Option<Rational>; 15],
}

impl ScalarPoint {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (Var, Rational)>) -> Self {
        let mut p = Self::new();
        for (v, x) in pairs {
            p.set(v, x);
        }
        p
    }

    pub fn with(mut self, var: Var, value: Rational) -> Self {
        self.set(var, value);
        self
    }

    pub fn set(&mut self, var: Var, value: Rational) {
        self.values[var.index()] = Some(value);
    }

    pub fn unset(&mut self, var: Var) {
        self.values[var.index()] = None;
    }

    pub fn get(&self, var: Var) -> Option<&Rational> {
        self.values[var.index()].as_ref()
    }

    pub fn req(&self, var: Var) -> Result<Rational, NlpError> {
        self.get(var).cloned().ok_or(NlpError::MissingVariable(var))
    }

    /// Assigned variables in canonical order.
    pub fn iter(&self) -> impl Iterator<Item = (Var, &Rational)> {
        Var::ALL
            .into_iter()
            .filter_map(move |v| self.get(v).map(|x| (v, x)))
    }

    /// Copy holding only the variables of `p`.
    pub fn restrict(&self, p: ProgramId) -> Self {
        Self::from_pairs(
            p.variables()
                .iter()
                .filter_map(|&v| self.get(v).map(|x| (v, x.clone()))),
        )
    }
}

impl fmt::Display for ScalarPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .iter()
            .map(|(v, x)| format!("{v}={}", format_rational(x)))
            .collect();
        f.write_str(&parts.join(" "))
    }
}

/// A point of any program in the chain.
#[derive(Debug, Clone, PartialEq)]
#[allow(clippy::large_enum_variant)]
pub enum ProgramPoint {
    Scalar(ScalarPoint),
    Structured(StructuredPoint),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum BoundSide {
    Lower,
    Upper,
}

/// One violated interval constraint.
#[derive(Debug, Clone, PartialEq)]
pub struct DomainViolation {
    pub variable: String,
    pub bound: BoundSide,
    pub bound_value: Rational,
    pub actual: Rational,
}

impl fmt::Display for DomainViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let op = match self.bound {
            BoundSide::Lower => "<",
            BoundSide::Upper => ">",
        };
        write!(
            f,
            "{} = {} {op} {}",
            self.variable,
            format_rational(&self.actual),
            format_rational(&self.bound_value)
        )
    }
}

/// Interval `[lo, hi]` of `var`, given the variables before it in
/// constraint order.
pub fn interval(
    var: Var,
    pt: &ScalarPoint,
    d: &Rational,
) -> Result<(Rational, Rational), NlpError> {
    use Var::*;
    let g = |v| pt.req(v);
    Ok(match var {
        X | YPrime => (Rational::one() - d, Rational::one()),
        E0 => (g(X)? - d, g(X)?),
        E => (g(X)? + g(YPrime)? - Rational::one(), g(X)?),
        F => (g(YPrime)? - d, g(YPrime)?),
        G0 => (g(E0)? - d, g(E0)?),
        Q0 => (g(E)? + g(E0)? - g(X)?, g(E0)?),
        Q => (g(E)? + g(F)? - g(YPrime)?, g(E)?),
        P0 => (g(G0)? + g(E)? - g(X)?, g(G0)?),
        P => (g(Q0)? + g(F)? - g(YPrime)?, g(Q0)?),
        H => (g(P0)? + g(Q)? - g(E)?, g(P0)?),
        R0 => (Rational::zero(), g(G0)?),
        R => (Rational::zero(), g(P0)?),
        A | B => (Rational::zero(), d.clone()),
    })
}

pub(crate) fn check_interval(
    out: &mut Vec<DomainViolation>,
    name: impl Fn() -> String,
    value: &Rational,
    lo: Rational,
    hi: Rational,
) {
    if value < &lo {
        out.push(DomainViolation {
            variable: name(),
            bound: BoundSide::Lower,
            bound_value: lo,
            actual: value.clone(),
        });
    } else if value > &hi {
        out.push(DomainViolation {
            variable: name(),
            bound: BoundSide::Upper,
            bound_value: hi,
            actual: value.clone(),
        });
    }
}

/// All interval violations of `pt` for scalar program `p`.
pub fn domain_check_scalar(
    p: ProgramId,
    pt: &ScalarPoint,
    d: &Rational,
) -> Result<Vec<DomainViolation>, NlpError> {
    if p.is_structured() {
        return Err(NlpError::WrongPointKind(p, "scalar"));
    }
    let mut out = Vec::new();
    for &var in p.variables() {
        let value = pt.req(var)?;
        let (lo, hi) = interval(var, pt, d)?;
        check_interval(&mut out, || var.name().to_string(), &value, lo, hi);
    }
    Ok(out)
}

/// All interval violations of `pt` for program `p`; an empty list means the
/// point is feasible.
pub fn domain_check(
    p: ProgramId,
    pt: &ProgramPoint,
    d: &Rational,
) -> Result<Vec<DomainViolation>, NlpError> {
    match pt {
        ProgramPoint::Scalar(s) => domain_check_scalar(p, s, d),
        ProgramPoint::Structured(s) => s.domain_check(p, d),
    }
}

/// Exact objective value of program `p` at `pt`.
pub fn eval_objective(
    p: ProgramId,
    pt: &ProgramPoint,
    d: &Rational,
) -> Result<Rational, NlpError> {
    match pt {
        ProgramPoint::Scalar(s) => objectives::eval_scalar(p, s, d),
        ProgramPoint::Structured(s) => s.objective(p),
    }
}

/// Draws a feasible point of scalar program `p` by fixing variables in
/// constraint order, each on a grid of `resolution + 1` values spanning its
/// current interval. Interval endpoints are drawn with extra weight since the
/// ramp terms change behaviour there.
pub fn sample_point<R: Rng + ?Sized>(
    p: ProgramId,
    d: &Rational,
    resolution: u32,
    rng: &mut R,
) -> Result<ScalarPoint, NlpError> {
    let lattice = Lattice::new(d, resolution);
    let mut pt = ScalarPoint::new();
    for &var in p.variables() {
        let (lo, hi) = interval(var, &pt, d)?;
        pt.set(var, lattice.pick(&lo, &hi, rng));
    }
    Ok(pt)
}

/// The multiples of `1 / (den(d) · resolution)`.
///
/// Every interval bound is an integer combination of `1`, `d` and earlier
/// variables, so drawing each variable from this lattice keeps all bounds on
/// it and every denominator at `den(d) · resolution`. Nested grids of the
/// form `lo + (hi - lo) k / M` would multiply the denominator by `M` per
/// level instead.
pub(crate) struct Lattice {
    scale: BigInt,
}

impl Lattice {
    pub(crate) fn new(d: &Rational, resolution: u32) -> Self {
        Self { scale: d.denom() * BigInt::from(resolution.max(1)) }
    }

    /// `lo` or `hi` with probability 1/8 each, otherwise a uniform lattice
    /// point of `[lo, hi]`.
    pub(crate) fn pick<R: Rng + ?Sized>(&self, lo: &Rational, hi: &Rational, rng: &mut R) -> Rational {
        match rng.gen_range(0..8) {
            0 => return lo.clone(),
            1 => return hi.clone(),
            _ => {}
        }
        let scale = Rational::from_integer(self.scale.clone());
        let first = (lo * &scale).ceil().to_integer();
        let last = (hi * &scale).floor().to_integer();
        match (&last - &first).to_u64() {
            Some(span) => {
                let k = first + BigInt::from(rng.gen_range(0..=span));
                Rational::new(k, self.scale.clone())
            }
            // Empty (bounds off the lattice) or wider than u64 steps.
            None if last < first => lo.clone(),
            None => {
                let t = Rational::new(BigInt::from(rng.gen::<u64>()), BigInt::from(u64::MAX));
                lo + (hi - lo) * t
            }
        }
    }
}
