//! Acceptance suite: one PASS/FAIL line per criterion, then a single assert.
//!
//! The criteria run sequentially inside one test so the reported timings are
//! not inflated by sibling tests sharing the cores.

use std::io::Write;
use std::time::{Duration, Instant};

use k4frac::certify::{certify_sign_chain, threshold_polynomial};
use k4frac::gadget::{
    compute_k4_weights, gadget_edge_sum_with, w_prime, weight_k4, weight_ordered,
    weight_ordered_k4, Arithmetic, SweepOptions, Value,
};
use k4frac::generate::{complete, complete_minus_matching, random_min_degree};
use k4frac::nlp::{eval_objective, graph_to_p1_point, run_chain_suite, w13, ChainConfig};
use k4frac::optimize::{search, SearchConfig};
use k4frac::rational::{int, ratio};
use k4frac::{Graph, OrderedClique, ProgramId, ProgramPoint, Rational, VertexSet};
use num_traits::{One, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Verdict {
    criterion: usize,
    title: &'static str,
    ok: bool,
    detail: String,
    elapsed: Duration,
    target: Option<Duration>,
}

fn run(
    criterion: usize,
    title: &'static str,
    target_secs: Option<u64>,
    f: impl FnOnce() -> Result<String, String>,
) -> Verdict {
    let start = Instant::now();
    let (ok, detail) = match f() {
        Ok(d) => (true, d),
        Err(d) => (false, d),
    };
    Verdict {
        criterion,
        title,
        ok,
        detail,
        elapsed: start.elapsed(),
        target: target_secs.map(Duration::from_secs),
    }
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn gadget_corpus() -> Vec<(String, Graph)> {
    let mut out = vec![
        ("K8".to_string(), complete(8)),
        ("K10".to_string(), complete(10)),
        ("K12 minus matching".to_string(), complete_minus_matching(12)),
    ];
    for seed in 1..=3 {
        let g = random_min_degree(12, 10, seed, None).expect("feasible");
        out.push((format!("random n=12 seed={seed}"), g));
    }
    out
}

fn binom(n: i64, k: i64) -> i64 {
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

fn edge_seed(g: &Graph, u: usize, v: usize) -> VertexSet {
    VertexSet::from_vertices(g.n(), [u, v]).unwrap()
}

/// Every 6-clique `K`, every `e` in `K`, against every edge `f` of `g` (all
/// corpus graphs have at most 200 edges, so no sampling is needed) plus 200
/// seeded draws.
fn criterion_1() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut evaluated = 0usize;
    for (name, g) in gadget_corpus() {
        let edges: Vec<(usize, usize)> = g.edges().collect();
        let mut fs = edges.clone();
        fs.extend((0..200).map(|_| *edges.choose(&mut rng).unwrap()));
        let k4s_by_f: Vec<Vec<OrderedClique>> = fs
            .iter()
            .map(|&(u, v)| g.cliques_containing(4, &edge_seed(&g, u, v)).unwrap())
            .collect();
        for k6 in g.enumerate_cliques(6).unwrap() {
            let kv = k6.vertices();
            for i in 0..6 {
                for j in i + 1..6 {
                    let e = (kv[i], kv[j]);
                    for (f, k4s) in fs.iter().zip(&k4s_by_f) {
                        let got = gadget_edge_sum_with(&g, &k6, e, k4s).map_err(|x| x.to_string())?;
                        let want = if *f == e { int(1) } else { int(0) };
                        ensure(got == want, || {
                            format!("{name}: K={kv:?} e={e:?} f={f:?} gives {got}")
                        })?;
                        evaluated += 1;
                    }
                }
            }
        }
    }
    Ok(format!("{evaluated} gadget sums exact"))
}

/// The sweep's edge sums, plus an independent per-`K4` recomputation summed
/// edge by edge for the small graphs.
fn criterion_2() -> Result<String, String> {
    let mut corpus = gadget_corpus();
    corpus.push(("K14 minus matching".into(), complete_minus_matching(14)));
    let mut edges_checked = 0;
    for (name, g) in &corpus {
        ensure(5 * g.min_degree() > 4 * g.n(), || format!("{name} is below the degree bound"))?;
        let map = compute_k4_weights(g, &SweepOptions::default()).map_err(|e| e.to_string())?;
        for (u, v) in g.edges() {
            ensure(map.edge_sum(u, v) == Value::Exact(int(1)), || {
                format!("{name}: sweep sum on {{{u},{v}}} is {}", map.edge_sum(u, v))
            })?;
            if g.n() <= 12 {
                let mut total = Rational::zero();
                for t in g.cliques_containing(4, &edge_seed(g, u, v)).unwrap() {
                    total += weight_k4(g, &t).map_err(|e| e.to_string())?;
                }
                ensure(total.is_one(), || format!("{name}: direct sum on {{{u},{v}}} is {total}"))?;
            }
            edges_checked += 1;
        }
    }
    let g33 = complete_minus_matching(33);
    let opts = SweepOptions { arithmetic: Arithmetic::Float, float_tolerance: 1e-9 };
    let map = compute_k4_weights(&g33, &opts).map_err(|e| e.to_string())?;
    let worst = map.max_edge_sum_deviation.to_f64();
    ensure(worst <= 1e-9, || format!("n=33 float deviation {worst:e}"))?;
    Ok(format!("{edges_checked} exact edge sums; n=33 float deviation {worst:.1e}"))
}

fn criterion_3() -> Result<String, String> {
    let g = complete_minus_matching(33);
    ensure(g.min_degree() == 31, || format!("min degree {}", g.min_degree()))?;
    let opts = SweepOptions { arithmetic: Arithmetic::Float, float_tolerance: 1e-9 };
    let map = compute_k4_weights(&g, &opts).map_err(|e| e.to_string())?;
    let min = map.min_weight.as_ref().map(|(v, _)| v.to_f64()).unwrap();
    ensure(min >= -1e-9, || format!("float min weight {min:e}"))?;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..20 {
        let i = rng.gen_range(0..map.len());
        let t = map.cliques[i];
        let exact = weight_k4(&g, &OrderedClique::new(&g, t.to_vec()).unwrap()).map_err(|e| e.to_string())?;
        ensure(exact >= Rational::zero(), || format!("W({t:?}) = {exact}"))?;
        let float = map.value_at(i).to_f64();
        let gap = (k4frac::rational::to_f64(&exact) - float).abs();
        ensure(gap <= 1e-9, || format!("W({t:?}) float {float:e} vs exact {exact}"))?;
    }
    Ok(format!("{} K4s, float min {min:.6e}, 20 exact re-checks nonnegative", map.len()))
}

fn criterion_4() -> Result<String, String> {
    for n in [8usize, 10, 12] {
        let g = complete(n);
        let map = compute_k4_weights(&g, &SweepOptions::default()).map_err(|e| e.to_string())?;
        let want = ratio(1, binom(n as i64 - 2, 2));
        ensure(map.len() as i64 == binom(n as i64, 4), || format!("K{n}: {} K4s", map.len()))?;
        for i in 0..map.len() {
            ensure(map.value_at(i) == Value::Exact(want.clone()), || {
                format!("K{n}: W({:?}) = {}", map.cliques[i], map.value_at(i))
            })?;
        }
    }
    Ok("K8 1/15, K10 1/28, K12 1/45".into())
}

fn permutations4(v: &[usize]) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for a in 0..4 {
        for b in 0..4 {
            for c in 0..4 {
                for d in 0..4 {
                    if a != b && a != c && a != d && b != c && b != d && c != d {
                        out.push(vec![v[a], v[b], v[c], v[d]]);
                    }
                }
            }
        }
    }
    out
}

fn criterion_5() -> Result<String, String> {
    let mut orderings = 0;
    for (name, g) in [("K10", complete(10)), ("K12 minus matching", complete_minus_matching(12))] {
        for t in g.enumerate_cliques(4).unwrap() {
            for perm in permutations4(t.vertices()) {
                let o = OrderedClique::new(&g, perm.clone()).unwrap();
                let wp = w_prime(&g, &o).map_err(|e| format!("{name} {perm:?}: {e}"))?;
                let (pt, d) = graph_to_p1_point(&g, &o).map_err(|e| e.to_string())?;
                let p1 = eval_objective(ProgramId::P1, &ProgramPoint::Structured(pt), &d)
                    .map_err(|e| e.to_string())?;
                ensure(wp == p1, || format!("{name} {perm:?}: W' = {wp}, P1 = {p1}"))?;
                let prefix = OrderedClique::new(&g, perm[..3].to_vec()).unwrap();
                let w3 = weight_ordered(&g, &prefix).map_err(|e| e.to_string())?;
                let wo = weight_ordered_k4(&g, &o).map_err(|e| e.to_string())?;
                let bridge = w3 * (int(1) - &wp) / int(12);
                ensure(wo == bridge, || format!("{name} {perm:?}: W_G(O) = {wo}, bridge {bridge}"))?;
                orderings += 1;
            }
        }
    }
    Ok(format!("{orderings} ordered 4-cliques"))
}

fn criterion_6() -> Result<String, String> {
    let cfg = ChainConfig::default();
    ensure(cfg.d == ratio(2, 33) && cfg.samples == 10_000, || "unexpected defaults".into())?;
    let report = run_chain_suite(&cfg);
    for c in &report.checks {
        ensure(c.samples == 10_000, || format!("{}: {} samples", c.name, c.samples))?;
        ensure(c.passed(), || {
            let w = &c.witnesses[0];
            format!("{}: {} witnesses, first {} at {}", c.name, c.witness_count, w.relation, w.point)
        })?;
    }
    Ok(format!("{} checks x 10000 samples, 0 witnesses", report.checks.len()))
}

/// Power-sum evaluation, independent of the Horner routine.
fn naive_eval(coeffs: &[i64], d: &Rational) -> Rational {
    let mut total = Rational::zero();
    let mut power = Rational::one();
    for &c in coeffs {
        total += &power * int(c);
        power *= d;
    }
    total
}

fn criterion_7() -> Result<String, String> {
    let coeffs = [-1i64, 26, -194, 669, -1192, 1065, -381];
    let w = threshold_polynomial();
    let want: Vec<Rational> = coeffs.iter().map(|&c| int(c)).collect();
    ensure(w.coefficients() == want.as_slice(), || format!("coefficients {w}"))?;
    let d = ratio(2, 33);
    let expected = [
        ratio(-1345519, 430489323),
        ratio(38549710, 4348377),
        ratio(-25389224, 131769),
        ratio(10001326, 3993),
        ratio(-2585328, 121),
    ];
    for (k, e) in expected.iter().enumerate() {
        let got = w.nth_derivative(k).eval(&d);
        ensure(&got == e, || format!("W^({k})(2/33) = {got}, expected {e}"))?;
    }
    ensure(naive_eval(&coeffs, &d) == expected[0], || "power-sum evaluation disagrees".into())?;
    // Formal derivative of the power sum: the fourth derivative has
    // coefficients c_k k(k-1)(k-2)(k-3).
    let fourth: Vec<i64> = (4..7).map(|k| coeffs[k] * (k * (k - 1) * (k - 2) * (k - 3)) as i64).collect();
    ensure(naive_eval(&fourth, &d) == expected[4], || "power-sum fourth derivative disagrees".into())?;
    // A neighbouring value that circulates for this derivative is off by 2.
    let nearby = ratio(-2585086, 121);
    ensure(&nearby - &expected[4] == int(2) && w.nth_derivative(4).eval(&d) != nearby, || {
        "fourth derivative matches -2585086/121".into()
    })?;
    let cert = certify_sign_chain(&int(0), &d).map_err(|e| e.to_string())?;
    ensure(cert.verdict && cert.recheck(), || "certificate does not hold".into())?;
    Ok("coefficients, five endpoint values, certificate on [0, 2/33]; W''''(2/33) = -2585328/121, not -2585086/121".into())
}

fn criterion_8() -> Result<String, String> {
    let w = threshold_polynomial();
    for k in 0..=20 {
        let d = ratio(k, 330);
        let one = int(1);
        let a = &one - int(2) * &d;
        let b = &one - int(3) * &d;
        let cubes = (&a * &a * &a) * (&b * &b * &b);
        let lhs = (w13(&d).map_err(|e| e.to_string())? - &one) * cubes;
        ensure(lhs == w.eval(&d), || format!("d = {d}: {lhs} vs {}", w.eval(&d)))?;
    }
    Ok("21 grid values k/330, k = 0..20".into())
}

fn criterion_9() -> Result<String, String> {
    let d = ratio(2, 33);
    let res = search(&SearchConfig::new(ProgramId::P12, d.clone())).map_err(|e| e.to_string())?;
    let bound = w13(&d).map_err(|e| e.to_string())?;
    let again = eval_objective(ProgramId::P12, &ProgramPoint::Scalar(res.point.clone()), &d)
        .map_err(|e| e.to_string())?;
    ensure(again == res.exact_value, || "exact value does not match the reported point".into())?;
    ensure(res.exact_value <= bound, || format!("max {} exceeds W13 {bound}", res.exact_value))?;
    ensure(bound < int(1), || format!("W13(2/33) = {bound}"))?;
    ensure(bound == ratio(158670710, 160016229), || format!("W13(2/33) = {bound}"))?;
    Ok(format!("max P12 = {} <= W13(2/33) = {bound} < 1", res.exact_value))
}

#[test]
fn acceptance() {
    let verdicts = vec![
        run(1, "gadget edge sums exact", Some(30), criterion_1),
        run(2, "edge-sum identity", Some(300), criterion_2),
        run(3, "threshold instance n=33", Some(600), criterion_3),
        run(4, "complete-graph oracle", None, criterion_4),
        run(5, "ordered-weight bridge", None, criterion_5),
        run(6, "chain inequalities at 2/33", Some(120), criterion_6),
        run(7, "polynomial certificate", Some(1), criterion_7),
        run(8, "closed-form identity", None, criterion_8),
        run(9, "optimizer corroboration", None, criterion_9),
    ];
    let mut out = std::io::stdout().lock();
    for v in &verdicts {
        let timing = match v.target {
            Some(t) if v.elapsed > t => format!(", target < {}s, OVER TARGET", t.as_secs()),
            Some(t) => format!(", target < {}s", t.as_secs()),
            None => String::new(),
        };
        // Written to the stdout handle directly so the lines survive the
        // harness's output capture.
        writeln!(
            out,
            "{} criterion {}: {} ({}) [{:.2}s{timing}]",
            if v.ok { "PASS" } else { "FAIL" },
            v.criterion,
            v.title,
            v.detail,
            v.elapsed.as_secs_f64(),
        )
        .unwrap();
    }
    let failed: Vec<usize> = verdicts.iter().filter(|v| !v.ok).map(|v| v.criterion).collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
