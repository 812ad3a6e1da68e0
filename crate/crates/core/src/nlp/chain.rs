//! Sampled verification of every pointwise step of the reduction chain.
//!
//! Each check draws its samples from its own ChaCha stream indexed by
//! `(check, sample)`, so the report does not depend on the thread count.

use num_traits::One;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::objectives::{self, eval_scalar};
use super::structured::{
    p1_to_p2, p2_to_p3, sample_p1, sample_p2, symmetrize_p1, symmetrize_p2, BlockLimits,
};
use super::{pinned_point, reduce_point, sample_point, NlpError, ProgramId, ScalarPoint, Var};
use crate::certify::threshold_polynomial;
use crate::rational::{format_rational, ratio, Rational};

/// Parameters of [`run_chain_suite`].
#[derive(Debug, Clone, PartialEq)]
pub struct ChainConfig {
    pub d: Rational,
    /// Samples per check.
    pub samples: usize,
    pub seed: u64,
    /// Samples lie on the multiples of `1 / (den(d) · resolution)`.
    pub resolution: u32,
    /// Block counts for the structured programs.
    pub limits: BlockLimits,
    /// Witnesses kept per check; the count is always exact.
    pub keep_witnesses: usize,
}

impl Default for ChainConfig {
    fn default() -> Self {
        Self {
            d: ratio(2, 33),
            samples: 10_000,
            seed: 0,
            resolution: 1 << 12,
            limits: BlockLimits { max_blocks: 3, max_inner: 3 },
            keep_witnesses: 8,
        }
    }
}

/// A sample at which a checked relation failed or could not be evaluated.
#[derive(Debug, Clone, PartialEq)]
pub struct Witness {
    pub sample: Option<usize>,
    pub relation: String,
    pub point: String,
    pub left: Option<Rational>,
    pub right: Option<Rational>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: String,
    /// Short tag naming the claim the check exercises.
    pub claim: &'static str,
    pub samples: usize,
    pub witness_count: usize,
    pub witnesses: Vec<Witness>,
}

impl CheckResult {
    pub fn passed(&self) -> bool {
        self.witness_count == 0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChainReport {
    pub d: Rational,
    pub seed: u64,
    pub samples: usize,
    pub checks: Vec<CheckResult>,
}

impl ChainReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(CheckResult::passed)
    }

    pub fn witness_count(&self) -> usize {
        self.checks.iter().map(|c| c.witness_count).sum()
    }

    pub fn check(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }
}

struct Failure {
    relation: String,
    left: Option<Rational>,
    right: Option<Rational>,
}

impl From<NlpError> for Box<Failure> {
    fn from(e: NlpError) -> Self {
        Box::new(Failure { relation: format!("evaluation error: {e}"), left: None, right: None })
    }
}

type Outcome = Result<(), Box<Failure>>;

fn ge(relation: &str, left: Rational, right: Rational) -> Outcome {
    if left >= right {
        Ok(())
    } else {
        Err(Box::new(Failure { relation: relation.to_string(), left: Some(left), right: Some(right) }))
    }
}

fn eq(relation: &str, left: Rational, right: Rational) -> Outcome {
    if left == right {
        Ok(())
    } else {
        Err(Box::new(Failure { relation: relation.to_string(), left: Some(left), right: Some(right) }))
    }
}

/// Checks the pointwise majorisation between two programs at `pt`:
/// `(P3,P4)`, `(P6,P7)`, `(P7,P8)` compare at the same point, `(P11,P12)`
/// drops `b`, and `(P12,W13)` compares with the closed form.
pub fn chain_inequality_check(
    pair: (ProgramId, ProgramId),
    pt: &ScalarPoint,
    d: &Rational,
) -> Result<Option<Witness>, NlpError> {
    use ProgramId::*;
    let (weak, strong) = pair;
    if !matches!(pair, (P3, P4) | (P6, P7) | (P7, P8) | (P11, P12) | (P12, W13)) {
        return Err(NlpError::UnsupportedPair(weak, strong));
    }
    let lower = eval_scalar(weak, pt, d)?;
    let upper = eval_scalar(strong, pt, d)?;
    Ok(ge(&format!("{strong} >= {weak}"), upper, lower).err().map(|f| Witness {
        sample: None,
        relation: f.relation,
        point: pt.to_string(),
        left: f.left,
        right: f.right,
    }))
}

type Located = Result<(), (String, Box<Failure>)>;
type Sampler<'a> = dyn Fn(&mut ChaCha8Rng) -> Located + Sync + 'a;

/// Attaches the sampled point to a failure; formatting is deferred since
/// almost every sample passes.
fn located(point: impl FnOnce() -> String, outcome: Outcome) -> Located {
    outcome.map_err(|f| (point(), f))
}

fn run_check(
    cfg: &ChainConfig,
    index: u64,
    name: &str,
    claim: &'static str,
    f: &Sampler<'_>,
) -> CheckResult {
    let failures: Vec<Witness> = (0..cfg.samples)
        .into_par_iter()
        .filter_map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream((index << 40) | i as u64);
            f(&mut rng).err().map(|(point, fl)| Witness {
                sample: Some(i),
                relation: fl.relation,
                point,
                left: fl.left,
                right: fl.right,
            })
        })
        .collect();
    let witness_count = failures.len();
    let mut witnesses = failures;
    witnesses.truncate(cfg.keep_witnesses);
    CheckResult { name: name.to_string(), claim, samples: cfg.samples, witness_count, witnesses }
}

fn scalar_sampler<'a>(
    cfg: &'a ChainConfig,
    p: ProgramId,
    body: impl Fn(&ScalarPoint) -> Outcome + Sync + 'a,
) -> impl Fn(&mut ChaCha8Rng) -> Located + Sync + 'a {
    move |rng| match sample_point(p, &cfg.d, cfg.resolution, rng) {
        Ok(pt) => located(|| pt.to_string(), body(&pt)),
        Err(e) => Err((String::new(), e.into())),
    }
}

/// A pinning step: the successor at the reduced point dominates the
/// predecessor at the original point and equals it at the pinned point.
fn pin_check(p: ProgramId, pt: &ScalarPoint, d: &Rational) -> Outcome {
    let next = p.successor().expect("pinned programs have successors");
    let reduced = reduce_point(p, pt, d)?;
    let pinned = pinned_point(p, pt, d)?;
    let after = eval_scalar(next, &reduced, d)?;
    ge(&format!("{next}(reduced) >= {p}(point)"), after.clone(), eval_scalar(p, pt, d)?)?;
    eq(&format!("{next}(reduced) == {p}(pinned)"), after, eval_scalar(p, &pinned, d)?)
}

fn draw_atom(rng: &mut ChaCha8Rng) -> Rational {
    ratio(1, rng.gen_range(8..=64))
}

/// Runs every check of the chain at `cfg.d`.
pub fn run_chain_suite(cfg: &ChainConfig) -> ChainReport {
    use ProgramId::*;
    let d = &cfg.d;
    let mut checks = Vec::new();
    let mut add = |name: &str, claim: &'static str, f: &Sampler<'_>| {
        let index = checks.len() as u64;
        checks.push(run_check(cfg, index, name, claim, f));
    };

    add(
        "ramp-dominance P4 >= P3",
        "ramp-majorization",
        &scalar_sampler(cfg, P3, |pt| {
            ge("P4 >= P3", eval_scalar(P4, pt, d)?, eval_scalar(P3, pt, d)?)
        }),
    );
    add("pin P4 -> P5", "pin-r-r0-h-p", &scalar_sampler(cfg, P4, |pt| pin_check(P4, pt, d)));
    add("pin P5 -> P6", "pin-p0-q0", &scalar_sampler(cfg, P5, |pt| pin_check(P5, pt, d)));
    add(
        "majorize P7 >= P6",
        "q-majorization",
        &scalar_sampler(cfg, P6, |pt| {
            ge("P7 >= P6", eval_scalar(P7, pt, d)?, eval_scalar(P6, pt, d)?)
        }),
    );
    add(
        "majorize P7 >= P6 at q = e+f-y'",
        "q-majorization",
        &scalar_sampler(cfg, P6, |pt| {
            let q = pt.req(Var::E)? + pt.req(Var::F)? - pt.req(Var::YPrime)?;
            let low = pt.clone().with(Var::Q, q);
            ge("P7 >= P6(q = e+f-y')", eval_scalar(P7, pt, d)?, eval_scalar(P6, &low, d)?)
        }),
    );
    add(
        "majorize P8 >= P7",
        "g0-majorization",
        &scalar_sampler(cfg, P7, |pt| {
            ge("P8 >= P7", eval_scalar(P8, pt, d)?, eval_scalar(P7, pt, d)?)
        }),
    );
    add(
        "pin P8 -> P9",
        "pin-e",
        &scalar_sampler(cfg, P8, |pt| {
            pin_check(P8, pt, d)?;
            let g = |v| pt.req(v);
            let hat = objectives::w9_hat(&g(Var::X)?, &g(Var::YPrime)?, &g(Var::E0)?, &g(Var::F)?, d)?;
            let reduced = reduce_point(P8, pt, d)?;
            eq("W9(a, b) == W9hat(e0, f)", eval_scalar(P9, &reduced, d)?, hat)
        }),
    );
    add("pin P9 -> P10", "pin-y", &scalar_sampler(cfg, P9, |pt| pin_check(P9, pt, d)));
    add("pin P10 -> P11", "pin-x", &scalar_sampler(cfg, P10, |pt| pin_check(P10, pt, d)));
    add(
        "majorize P12 >= P11",
        "b-majorization",
        &scalar_sampler(cfg, P11, |pt| {
            ge("P12 >= P11", eval_scalar(P12, pt, d)?, eval_scalar(P11, pt, d)?)
        }),
    );
    add(
        "closed form W13 >= P12",
        "closed-form-bound",
        &scalar_sampler(cfg, P12, |pt| {
            ge("W13 >= P12", objectives::w13(d)?, eval_scalar(P12, pt, d)?)
        }),
    );

    let structured = |rng: &mut ChaCha8Rng, two: bool| {
        let atom = draw_atom(rng);
        if two {
            sample_p2(d, &atom, cfg.limits, cfg.resolution, rng)
        } else {
            sample_p1(d, &atom, cfg.limits, cfg.resolution, rng)
        }
    };
    add("symmetrize P1", "inner-symmetrization", &|rng| match structured(rng, false) {
        Ok(pt) => {
            let outcome = (|| {
                let sym = symmetrize_p1(&pt)?;
                ge("P1(sym) >= P1(point)", sym.objective(P1)?, pt.objective(P1)?)
            })();
            located(|| format!("{pt:?}"), outcome)
        }
        Err(e) => Err((String::new(), e.into())),
    });
    add("collapse P1 -> P2", "inner-collapse", &|rng| match structured(rng, false) {
        Ok(pt) => {
            let outcome = (|| {
                let sym = symmetrize_p1(&pt)?;
                eq("P2(collapsed) == P1(sym)", p1_to_p2(&sym)?.objective(P2)?, sym.objective(P1)?)
            })();
            located(|| format!("{pt:?}"), outcome)
        }
        Err(e) => Err((String::new(), e.into())),
    });
    add("symmetrize P2", "outer-symmetrization", &|rng| match structured(rng, true) {
        Ok(pt) => {
            let outcome = (|| {
                let sym = symmetrize_p2(&pt)?;
                ge("P2(sym) >= P2(point)", sym.objective(P2)?, pt.objective(P2)?)
            })();
            located(|| format!("{pt:?}"), outcome)
        }
        Err(e) => Err((String::new(), e.into())),
    });
    add("collapse P2 -> P3", "outer-collapse", &|rng| match structured(rng, true) {
        Ok(pt) => {
            let outcome = (|| {
                let sym = symmetrize_p2(&pt)?;
                let p3 = p2_to_p3(&sym)?;
                eq("P3(collapsed) == P2(sym)", eval_scalar(P3, &p3, d)?, sym.objective(P2)?)
            })();
            located(|| format!("{pt:?}"), outcome)
        }
        Err(e) => Err((String::new(), e.into())),
    });

    let poly = threshold_polynomial();
    add("W13 polynomial identity", "threshold-polynomial", &|rng| {
        let k = rng.gen_range(0..=cfg.resolution);
        let t = d * Rational::from_integer(k.into()) / Rational::from_integer(cfg.resolution.max(1).into());
        let outcome = (|| {
            let one = Rational::one();
            let a = &one - Rational::from_integer(2.into()) * &t;
            let b = &one - Rational::from_integer(3.into()) * &t;
            let cubes = &a * &a * &a * &b * &b * &b;
            eq("(W13 - 1)(1-3d)^3(1-2d)^3 == W(d)", (objectives::w13(&t)? - one) * cubes, poly.eval(&t))
        })();
        located(|| format!("d={}", format_rational(&t)), outcome)
    });

    ChainReport { d: d.clone(), seed: cfg.seed, samples: cfg.samples, checks }
}
