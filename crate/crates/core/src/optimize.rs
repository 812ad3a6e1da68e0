//! Floating-point search over the box-constrained programs `P9`..`P12`,
//! with every reported maximum re-evaluated exactly.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::nlp::objectives::{eval_scalar, w13};
use crate::nlp::{domain_check_scalar, NlpError, ProgramId, ScalarPoint, Var};
use crate::rational::{round_to_denominator, to_f64, Rational};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OptimizeError {
    #[error("{0} is not a box-constrained program (expected P9..P12)")]
    UnsupportedProgram(ProgramId),
    #[error("invalid search configuration: {0}")]
    InvalidConfig(&'static str),
    #[error("could not place {0} on its domain with any rounding denominator")]
    Exactify(ProgramId),
    #[error(transparent)]
    Nlp(#[from] NlpError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchConfig {
    pub program: ProgramId,
    pub d: Rational,
    /// Grid points per axis, endpoints included.
    pub resolution: usize,
    /// Random starting points for local refinement, besides the grid best.
    pub multistart: usize,
    pub shrink: f64,
    pub tolerance: f64,
    pub seed: u64,
}

impl SearchConfig {
    pub fn new(program: ProgramId, d: Rational) -> Self {
        Self {
            program,
            d,
            resolution: default_resolution(program),
            multistart: 8,
            shrink: 0.5,
            tolerance: 1e-12,
            seed: 0,
        }
    }

    fn validate(&self) -> Result<(), OptimizeError> {
        if !matches!(self.program, ProgramId::P9 | ProgramId::P10 | ProgramId::P11 | ProgramId::P12) {
            return Err(OptimizeError::UnsupportedProgram(self.program));
        }
        if self.resolution < 2 {
            return Err(OptimizeError::InvalidConfig("resolution must be at least 2"));
        }
        if self.tolerance.is_nan() || self.tolerance <= 0.0 {
            return Err(OptimizeError::InvalidConfig("tolerance must be positive"));
        }
        if !(self.shrink > 0.0 && self.shrink < 1.0) {
            return Err(OptimizeError::InvalidConfig("shrink must lie in (0, 1)"));
        }
        Ok(())
    }
}

/// Grid points per axis used when none is given.
pub fn default_resolution(p: ProgramId) -> usize {
    match p {
        ProgramId::P9 => 60,
        ProgramId::P10 => 200,
        _ => 2000,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchResult {
    pub program: ProgramId,
    pub d: Rational,
    /// Best point after rounding to rationals.
    pub point: ScalarPoint,
    pub float_value: f64,
    /// Bound on the rounding error of `float_value`.
    pub float_error: f64,
    pub evaluations: u64,
    pub exact_value: Rational,
    /// Denominator the coordinates were rounded to.
    pub denominator: u64,
    /// `W13(d)`.
    pub upper_bound: Rational,
    /// `upper_bound - exact_value`; negative would contradict the chain.
    pub margin: Rational,
}

/// A float objective value and a bound on its accumulated rounding error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FloatEval {
    pub value: f64,
    pub error: f64,
}

fn float_eval(terms: &[f64]) -> FloatEval {
    let value: f64 = terms.iter().sum();
    let scale: f64 = terms.iter().map(|t| t.abs()).sum();
    FloatEval { value, error: 64.0 * f64::EPSILON * scale }
}

fn pos(x: f64) -> f64 {
    x.max(0.0)
}

fn w9_f64(x: f64, yp: f64, a: f64, b: f64, d: f64) -> FloatEval {
    let xa = x - a;
    let s = x + yp - 1.0;
    let xay = xa + yp - 1.0;
    let xayb = xay - b;
    let lift = pos(1.0 - yp - a);
    let sq = xa * xa;
    let t1 = (sq / xay + sq / xayb) * ((lift + 1.0 - yp) / (xay * s) + lift / ((xa - d) * s));
    let t2 = sq * lift / (s * xayb * xayb);
    let t3 = a * sq * xa / (xayb * xayb * s * s);
    let t4 = 3.0 * xay * sq * xa * pos(1.0 - x - b) / ((s - b) * s * (yp - b) * xayb * xayb);
    float_eval(&[t1, t2, t3, t4])
}

fn w10_f64(x: f64, a: f64, b: f64, d: f64) -> FloatEval {
    let xa = x - a;
    let xad = xa - d;
    let xd = x - d;
    let xabd = xad - b;
    let sq = xa * xa;
    let t1 = (sq / xad + sq / xabd) * (3.0 * d - 2.0 * a) / (xad * xd);
    let t2 = sq * (d - a) / (xd * xabd * xabd);
    let t3 = a * sq * xa / (xabd * xabd * xd * xd);
    let t4 = 3.0 * xad * sq * xa * pos(1.0 - x - b) / ((xd - b) * xd * (1.0 - d - b) * xabd * xabd);
    float_eval(&[t1, t2, t3, t4])
}

fn w11_f64(a: f64, b: f64, d: f64) -> FloatEval {
    let u = 1.0 - d - a;
    let v = 1.0 - a - 2.0 * d;
    let w = 1.0 - 2.0 * d;
    let vb = v - b;
    let sq = u * u;
    let t1 = (sq / v + sq / vb) * (3.0 * d - 2.0 * a) / (v * w);
    let t2 = sq * (d - a) / (w * vb * vb);
    let t3 = a * sq * u / (vb * vb * w * w);
    let t4 = 3.0 * v * sq * u * (d - b) / ((w - b) * w * (1.0 - d - b) * vb * vb);
    float_eval(&[t1, t2, t3, t4])
}

fn w12_f64(a: f64, d: f64) -> FloatEval {
    let u = 1.0 - d - a;
    let v = 1.0 - a - 2.0 * d;
    let v3 = 1.0 - a - 3.0 * d;
    let w = 1.0 - 2.0 * d;
    let sq = u * u;
    let t1 = (sq / v + sq / v3) * (3.0 * d - 2.0 * a) / (v * w);
    let t2 = sq * (d - a) / (w * v3 * v3);
    let t3 = a * sq * u / (v3 * v3 * w * w);
    let t4 = 3.0 * v * sq * u * d / ((1.0 - 3.0 * d) * w * w * v3 * v3);
    float_eval(&[t1, t2, t3, t4])
}

/// Float objective of a box program at coordinates in `p.variables()` order.
pub fn eval_f64(p: ProgramId, d: f64, v: &[f64]) -> FloatEval {
    match p {
        ProgramId::P9 => w9_f64(v[0], v[1], v[2], v[3], d),
        ProgramId::P10 => w10_f64(v[0], v[1], v[2], d),
        ProgramId::P11 => w11_f64(v[0], v[1], d),
        ProgramId::P12 => w12_f64(v[0], d),
        _ => panic!("{p} has no float objective"),
    }
}

fn bounds(var: Var, d: &Rational) -> (Rational, Rational) {
    let one = Rational::from_integer(1.into());
    match var {
        Var::X | Var::YPrime => (&one - d, one),
        _ => (Rational::from_integer(0.into()), d.clone()),
    }
}

struct Box_ {
    lo: Vec<f64>,
    hi: Vec<f64>,
}

impl Box_ {
    fn new(p: ProgramId, d: &Rational) -> Self {
        let (lo, hi) = p
            .variables()
            .iter()
            .map(|&v| {
                let (l, h) = bounds(v, d);
                (to_f64(&l), to_f64(&h))
            })
            .unzip();
        Self { lo, hi }
    }

    fn grid_value(&self, axis: usize, i: usize, res: usize) -> f64 {
        if i + 1 == res {
            return self.hi[axis];
        }
        self.lo[axis] + (self.hi[axis] - self.lo[axis]) * i as f64 / (res - 1) as f64
    }
}

/// Better of two candidates: larger value, then lexicographically smaller
/// coordinates.
fn better(a: (f64, Vec<f64>), b: (f64, Vec<f64>)) -> (f64, Vec<f64>) {
    match a.0.partial_cmp(&b.0) {
        Some(std::cmp::Ordering::Greater) => a,
        Some(std::cmp::Ordering::Less) => b,
        _ => {
            if b.1 < a.1 {
                b
            } else {
                a
            }
        }
    }
}

/// Rounds float coordinates to rationals, trying denominators `10^3`, `10^6`,
/// `10^9`, `10^12` in turn until the point is on the domain and evaluates;
/// the last attempt clamps into the box instead.
pub fn exactify(
    p: ProgramId,
    d: &Rational,
    coords: &[f64],
) -> Result<(ScalarPoint, Rational, u64), OptimizeError> {
    const LADDER: [u64; 4] = [1_000, 1_000_000, 1_000_000_000, 1_000_000_000_000];
    let vars = p.variables();
    for (attempt, &den) in LADDER.iter().enumerate() {
        let last = attempt + 1 == LADDER.len();
        let mut pt = ScalarPoint::new();
        for (&var, &c) in vars.iter().zip(coords) {
            let mut r = round_to_denominator(c, den);
            if last {
                let (lo, hi) = bounds(var, d);
                r = r.clamp(lo, hi);
            }
            pt.set(var, r);
        }
        if !domain_check_scalar(p, &pt, d)?.is_empty() {
            continue;
        }
        match eval_scalar(p, &pt, d) {
            Ok(v) => return Ok((pt, v, den)),
            Err(NlpError::ZeroDenominator(_)) => continue,
            Err(e) => return Err(e.into()),
        }
    }
    Err(OptimizeError::Exactify(p))
}

fn finish(
    cfg: &SearchConfig,
    coords: &[f64],
    value: f64,
    evaluations: u64,
) -> Result<SearchResult, OptimizeError> {
    let d = to_f64(&cfg.d);
    let float = eval_f64(cfg.program, d, coords);
    let (point, exact_value, denominator) = exactify(cfg.program, &cfg.d, coords)?;
    let upper_bound = w13(&cfg.d)?;
    let margin = &upper_bound - &exact_value;
    Ok(SearchResult {
        program: cfg.program,
        d: cfg.d.clone(),
        point,
        float_value: value,
        float_error: float.error,
        evaluations,
        exact_value,
        denominator,
        upper_bound,
        margin,
    })
}

fn grid_best(cfg: &SearchConfig) -> (f64, Vec<f64>, u64) {
    let bx = Box_::new(cfg.program, &cfg.d);
    let k = bx.lo.len();
    let res = cfg.resolution;
    let total = (res as u64).pow(k as u32);
    let d = to_f64(&cfg.d);
    let (value, point) = (0..total)
        .into_par_iter()
        .map(|mut idx| {
            let mut v = vec![0.0; k];
            for axis in (0..k).rev() {
                v[axis] = bx.grid_value(axis, (idx % res as u64) as usize, res);
                idx /= res as u64;
            }
            let f = eval_f64(cfg.program, d, &v).value;
            (if f.is_nan() { f64::NEG_INFINITY } else { f }, v)
        })
        .reduce(|| (f64::NEG_INFINITY, vec![f64::INFINITY; k]), better);
    (value, point, total)
}

/// Exhaustive grid over the box, `resolution^k` evaluations.
pub fn grid_search(cfg: &SearchConfig) -> Result<SearchResult, OptimizeError> {
    cfg.validate()?;
    let (value, point, evals) = grid_best(cfg);
    finish(cfg, &point, value, evals)
}

fn refine(cfg: &SearchConfig, start: Vec<f64>) -> (f64, Vec<f64>, u64) {
    let bx = Box_::new(cfg.program, &cfg.d);
    let d = to_f64(&cfg.d);
    let eval = |v: &[f64]| {
        let f = eval_f64(cfg.program, d, v).value;
        if f.is_nan() {
            f64::NEG_INFINITY
        } else {
            f
        }
    };
    let mut cur = start;
    let mut best = eval(&cur);
    let mut evals = 1u64;
    let mut steps: Vec<f64> = bx
        .lo
        .iter()
        .zip(&bx.hi)
        .map(|(l, h)| (h - l) / (cfg.resolution - 1) as f64)
        .collect();
    while steps.iter().any(|&s| s >= cfg.tolerance) {
        let mut improved = false;
        for axis in 0..cur.len() {
            for dir in [1.0, -1.0] {
                let mut cand = cur.clone();
                cand[axis] = (cand[axis] + dir * steps[axis]).clamp(bx.lo[axis], bx.hi[axis]);
                let f = eval(&cand);
                evals += 1;
                if f > best {
                    best = f;
                    cur = cand;
                    improved = true;
                }
            }
        }
        if !improved {
            for s in &mut steps {
                *s *= cfg.shrink;
            }
        }
    }
    (best, cur, evals)
}

/// Coordinate ascent from `start`, never accepting a worse point, with steps
/// shrinking until below the tolerance.
pub fn local_refine(cfg: &SearchConfig, start: &ScalarPoint) -> Result<SearchResult, OptimizeError> {
    cfg.validate()?;
    let coords = cfg
        .program
        .variables()
        .iter()
        .map(|&v| start.req(v).map(|r| to_f64(&r)))
        .collect::<Result<Vec<_>, _>>()?;
    let (value, point, evals) = refine(cfg, coords);
    finish(cfg, &point, value, evals)
}

/// Grid search, then local refinement from the grid best and from
/// `multistart` seeded random points; the overall best is exactified.
pub fn search(cfg: &SearchConfig) -> Result<SearchResult, OptimizeError> {
    cfg.validate()?;
    let (gv, gp, mut evals) = grid_best(cfg);
    let bx = Box_::new(cfg.program, &cfg.d);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut starts = vec![gp.clone()];
    for _ in 0..cfg.multistart {
        starts.push(bx.lo.iter().zip(&bx.hi).map(|(&l, &h)| rng.gen_range(l..=h)).collect());
    }
    let refined: Vec<(f64, Vec<f64>, u64)> = starts.into_par_iter().map(|s| refine(cfg, s)).collect();
    let mut best = (gv, gp);
    for (v, p, e) in refined {
        evals += e;
        best = better(best, (v, p));
    }
    finish(cfg, &best.1, best.0, evals)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nlp::sample_point;
    use crate::rational::{int, ratio};

    #[test]
    fn float_objectives_track_exact_ones() {
        let d = ratio(2, 33);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for p in [ProgramId::P9, ProgramId::P10, ProgramId::P11, ProgramId::P12] {
            for _ in 0..200 {
                let pt = sample_point(p, &d, 1000, &mut rng).unwrap();
                let exact = to_f64(&eval_scalar(p, &pt, &d).unwrap());
                let coords: Vec<f64> = p.variables().iter().map(|&v| to_f64(pt.get(v).unwrap())).collect();
                let f = eval_f64(p, to_f64(&d), &coords);
                assert!((f.value - exact).abs() <= f.error + 1e-15, "{p} {pt}: {} vs {exact}", f.value);
            }
        }
    }

    #[test]
    fn grid_counts_and_zero_d() {
        let mut cfg = SearchConfig::new(ProgramId::P11, int(0));
        cfg.resolution = 7;
        let r = grid_search(&cfg).unwrap();
        assert_eq!(r.evaluations, 49);
        assert_eq!(r.exact_value, int(0));
    }

    #[test]
    fn p12_stays_below_closed_form() {
        let mut cfg = SearchConfig::new(ProgramId::P12, ratio(2, 33));
        cfg.resolution = 200;
        let g = grid_search(&cfg).unwrap();
        let s = search(&cfg).unwrap();
        assert!(s.float_value >= g.float_value);
        assert!(s.margin >= int(0));
        assert!(s.upper_bound < int(1));
        assert_eq!(search(&cfg).unwrap(), s);
    }

    #[test]
    fn exactify_falls_back_to_finer_denominators() {
        let d = ratio(2, 33);
        // 1 - d = 0.93939.. rounds down to 939/1000, below the box.
        let x = 1.0 - 2.0 / 33.0;
        let (pt, _, den) = exactify(ProgramId::P10, &d, &[x, 0.0, 0.0]).unwrap();
        assert_eq!(den, 1_000_000);
        assert_eq!(pt.get(Var::X).unwrap(), &ratio(939_394, 1_000_000));
        let (_, v, _) = exactify(ProgramId::P11, &d, &[0.0, 0.0]).unwrap();
        assert!(v >= int(0));
    }

    #[test]
    fn rejects_bad_configs() {
        let mut cfg = SearchConfig::new(ProgramId::P8, ratio(1, 20));
        assert_eq!(grid_search(&cfg), Err(OptimizeError::UnsupportedProgram(ProgramId::P8)));
        cfg.program = ProgramId::P12;
        cfg.resolution = 1;
        assert!(matches!(grid_search(&cfg), Err(OptimizeError::InvalidConfig(_))));
    }
}
