//! Edge gadgets and the fractional K4 weighting built from them.
//!
//! `W_G(T)` is defined as half the sum, over ordered 6-cliques
//! `(v1, …, v6)`, of `W(v1, …, v5) · ψ_{K, {v1,v2}}(T)`. Three evaluation
//! routes are provided and cross-checked in tests:
//!
//! * [`weight_k4`] sums the definition literally for one `T`;
//! * [`weight_k4_via_orderings`] splits `T` into its 24 orderings and uses the
//!   `O(|R|^2)` closed form for `W'_G(O)`;
//! * [`compute_k4_weights`] sweeps all ordered 5-cliques once and produces
//!   every `W_G(T)` together with the per-edge sums.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::sync::OnceLock;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use thiserror::Error;

use crate::graph::{Graph, GraphError, OrderedClique, VertexSet};
use crate::rational::{format_rational, parse_rational, FractionSum, Rational};

/// Sweeps allocate one accumulator per 4-subset of the vertex set.
pub const MAX_DENSE_K4_SLOTS: u128 = 1 << 25;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum WeightError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("expected a clique on {expected} vertices, got {found}")]
    WrongSize { expected: usize, found: usize },
    #[error("{{{0}, {1}}} is not an edge of the 6-clique")]
    NotAnEdgeOfClique(usize, usize),
    #[error("common neighbourhood of {0:?} is empty")]
    EmptyNeighborhood(Vec<usize>),
    #[error("minimum degree {min_degree} is not above 4n/5 = {}/5 (n = {n})", 4 * n)]
    DegreeTooLow { min_degree: usize, n: usize },
    #[error("{n} vertices is too many for a dense weight sweep")]
    TooLarge { n: usize },
    #[error("K4 {clique:?} has negative weight {value}")]
    NegativeWeight { clique: [usize; 4], value: Value },
    #[error("W'(O) for {ordering:?}: definition gives {definition}, closed form gives {closed_form}")]
    RouteMismatch {
        ordering: Vec<usize>,
        definition: String,
        closed_form: String,
    },
}

/// The four values an edge gadget can take.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GadgetValue {
    Half,
    NegSixth,
    Sixth,
    Zero,
}

impl GadgetValue {
    /// The value in units of 1/6.
    pub fn sixths(self) -> i64 {
        match self {
            GadgetValue::Half => 3,
            GadgetValue::NegSixth => -1,
            GadgetValue::Sixth => 1,
            GadgetValue::Zero => 0,
        }
    }

    pub fn value(self) -> Rational {
        Rational::new(BigInt::from(self.sixths()), BigInt::from(6))
    }

    fn from_shared(shared: usize) -> Self {
        match shared {
            0 => GadgetValue::Half,
            1 => GadgetValue::NegSixth,
            _ => GadgetValue::Sixth,
        }
    }
}

/// Either an exact weight or its floating-point approximation.
#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Exact(Rational),
    Float(f64),
}

impl Value {
    pub fn to_f64(&self) -> f64 {
        match self {
            Value::Exact(r) => crate::rational::to_f64(r),
            Value::Float(x) => *x,
        }
    }

    pub fn is_negative(&self) -> bool {
        match self {
            Value::Exact(r) => r.is_negative(),
            Value::Float(x) => *x < 0.0,
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Exact(r) => f.write_str(&format_rational(r)),
            Value::Float(x) => write!(f, "{x:e}"),
        }
    }
}

fn expect_size(c: &OrderedClique, expected: usize) -> Result<(), WeightError> {
    if c.len() != expected {
        return Err(WeightError::WrongSize {
            expected,
            found: c.len(),
        });
    }
    Ok(())
}

fn check_gadget_edge(k6: &OrderedClique, e: (usize, usize)) -> Result<(), WeightError> {
    expect_size(k6, 6)?;
    if e.0 == e.1 || !k6.contains(e.0) || !k6.contains(e.1) {
        return Err(WeightError::NotAnEdgeOfClique(e.0, e.1));
    }
    Ok(())
}

/// `ψ_{K,e}(T)`.
pub fn psi(
    g: &Graph,
    k6: &OrderedClique,
    e: (usize, usize),
    t: &OrderedClique,
) -> Result<GadgetValue, WeightError> {
    check_gadget_edge(k6, e)?;
    expect_size(t, 4)?;
    debug_assert!(g.has_edge(e.0, e.1));
    if !t.vertices().iter().all(|&v| k6.contains(v)) {
        return Ok(GadgetValue::Zero);
    }
    let shared = [e.0, e.1].iter().filter(|&&v| t.contains(v)).count();
    Ok(GadgetValue::from_shared(shared))
}

/// `Σ_{T ∋ f} ψ_{K,e}(T)`, summed literally over the 4-cliques of `g`
/// containing `f`.
pub fn gadget_edge_sum(
    g: &Graph,
    k6: &OrderedClique,
    e: (usize, usize),
    f: (usize, usize),
) -> Result<Rational, WeightError> {
    let seed = VertexSet::from_vertices(g.n(), [f.0, f.1])?;
    let k4s = g.cliques_containing(4, &seed)?;
    gadget_edge_sum_with(g, k6, e, &k4s)
}

/// As [`gadget_edge_sum`] with the 4-cliques through `f` supplied by the
/// caller, so one enumeration can serve many gadgets.
pub fn gadget_edge_sum_with(
    g: &Graph,
    k6: &OrderedClique,
    e: (usize, usize),
    k4s_on_f: &[OrderedClique],
) -> Result<Rational, WeightError> {
    let mut sixths = 0i64;
    for t in k4s_on_f {
        sixths += psi(g, k6, e, t)?.sixths();
    }
    Ok(Rational::new(BigInt::from(sixths), BigInt::from(6)))
}

/// `|N(v1..v_i)|` for `i = 2..=r`, failing on the first empty prefix.
fn prefix_sizes(g: &Graph, vertices: &[usize]) -> Result<Vec<usize>, WeightError> {
    let mut sizes = Vec::with_capacity(vertices.len().saturating_sub(1));
    for i in 2..=vertices.len() {
        let s = g.common_neighbor_count(&vertices[..i]);
        if s == 0 {
            return Err(WeightError::EmptyNeighborhood(vertices[..i].to_vec()));
        }
        sizes.push(s);
    }
    Ok(sizes)
}

fn reciprocal_product(sizes: &[usize]) -> Rational {
    let den = sizes
        .iter()
        .fold(BigInt::one(), |acc, &s| acc * BigInt::from(s));
    Rational::new(BigInt::one(), den)
}

/// `W(v1, …, vr) = Π_{i=2}^{r} 1/|N(v1, …, vi)|`.
pub fn weight_ordered(g: &Graph, k: &OrderedClique) -> Result<Rational, WeightError> {
    Ok(reciprocal_product(&prefix_sizes(g, k.vertices())?))
}

/// `n^{r-1} · W(v1, …, vr)`, the product of reciprocal densities.
pub fn weight_scaled(g: &Graph, k: &OrderedClique) -> Result<Rational, WeightError> {
    let scale = BigInt::from(g.n()).pow(k.len() as u32 - 1);
    Ok(weight_ordered(g, k)? * Rational::from_integer(scale))
}

fn permutations(k: usize) -> Vec<Vec<usize>> {
    fn rec(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                prefix.push(i);
                rec(prefix, used, out);
                prefix.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut vec![false; k], &mut out);
    out
}

fn perms5() -> &'static [Vec<usize>] {
    static P: OnceLock<Vec<Vec<usize>>> = OnceLock::new();
    P.get_or_init(|| permutations(5))
}

fn perms6() -> &'static [Vec<usize>] {
    static P: OnceLock<Vec<Vec<usize>>> = OnceLock::new();
    P.get_or_init(|| permutations(6))
}

/// `counts[mask] = |N({vertices[i] : bit i of mask})|`.
fn subset_counts(g: &Graph, vertices: &[usize]) -> Vec<usize> {
    let k = vertices.len();
    let mut counts = vec![g.n(); 1 << k];
    let mut subset = Vec::with_capacity(k);
    for (mask, slot) in counts.iter_mut().enumerate().skip(1) {
        subset.clear();
        subset.extend((0..k).filter(|i| mask >> i & 1 == 1).map(|i| vertices[i]));
        *slot = g.common_neighbor_count(&subset);
    }
    counts
}

/// Prefix sizes `|N(S_2)|..|N(S_5)|` of an ordering given as positions into
/// the vertex list that `counts` was built from.
fn ordering_sizes(
    counts: &[usize],
    order: &[usize],
    vertices: &[usize],
) -> Result<[u64; 4], WeightError> {
    let mut mask = 1usize << order[0];
    let mut out = [0u64; 4];
    for i in 1..5 {
        mask |= 1 << order[i];
        let s = counts[mask];
        if s == 0 {
            return Err(WeightError::EmptyNeighborhood(
                order[..=i].iter().map(|&p| vertices[p]).collect(),
            ));
        }
        out[i - 1] = s as u64;
    }
    Ok(out)
}

fn sorted4(t: &OrderedClique) -> Result<[usize; 4], WeightError> {
    expect_size(t, 4)?;
    let mut v = [0; 4];
    v.copy_from_slice(t.vertices());
    v.sort_unstable();
    Ok(v)
}

/// `W_G(T)` by literal summation over the ordered 6-cliques containing `T`.
pub fn weight_k4(g: &Graph, t: &OrderedClique) -> Result<Rational, WeightError> {
    let tv = sorted4(t)?;
    let r = g.common_neighbors_of(&tv);
    let mut sum = FractionSum::new();
    for y in r.iter() {
        for z in r.iter().filter(|&z| z > y && g.has_edge(y, z)) {
            let vertices = [tv[0], tv[1], tv[2], tv[3], y, z];
            let counts = subset_counts(g, &vertices);
            for order in perms6() {
                let [a, b, c, d] = ordering_sizes(&counts, order, &vertices)?;
                let shared = (order[0] < 4) as usize + (order[1] < 4) as usize;
                let psi6 = GadgetValue::from_shared(shared).sixths();
                sum.add(psi6 as i128, 12 * a * b * c * d);
            }
        }
    }
    Ok(sum.total())
}

/// `W_G(O)`: half the sum over ordered 6-cliques containing `O` as an ordered
/// subsequence.
pub fn weight_ordered_k4(g: &Graph, o: &OrderedClique) -> Result<Rational, WeightError> {
    expect_size(o, 4)?;
    let x = o.vertices();
    let r = g.common_neighbors_of(x);
    let mut sum = FractionSum::new();
    for u in r.iter() {
        for w in r.iter().filter(|&w| w != u && g.has_edge(u, w)) {
            let vertices = [x[0], x[1], x[2], x[3], u, w];
            let counts = subset_counts(g, &vertices);
            for i in 0..6 {
                for j in i + 1..6 {
                    // u at slot i, w at slot j, the ordered x's fill the rest.
                    let mut order = [0usize; 6];
                    let mut next_x = 0;
                    for (slot, pos) in order.iter_mut().enumerate() {
                        *pos = if slot == i {
                            4
                        } else if slot == j {
                            5
                        } else {
                            next_x += 1;
                            next_x - 1
                        };
                    }
                    let [a, b, c, d] = ordering_sizes(&counts, &order, &vertices)?;
                    let shared = (order[0] < 4) as usize + (order[1] < 4) as usize;
                    let psi6 = GadgetValue::from_shared(shared).sixths();
                    sum.add(psi6 as i128, 12 * a * b * c * d);
                }
            }
        }
    }
    Ok(sum.total())
}

fn w3(g: &Graph, o: &[usize]) -> Result<Rational, WeightError> {
    Ok(reciprocal_product(&prefix_sizes(g, &o[..3])?))
}

/// `W'_G(O) = 1 − 12·W_G(O)/W(x1, x2, x3)`.
pub fn w_prime_by_definition(g: &Graph, o: &OrderedClique) -> Result<Rational, WeightError> {
    let wo = weight_ordered_k4(g, o)?;
    let w3 = w3(g, o.vertices())?;
    Ok(Rational::one() - Rational::from_integer(BigInt::from(12)) * wo / w3)
}

/// `W'_G(O)` from the double sum over `y ∈ R` and `z ∈ N(y) ∩ R`, where
/// `R = N(x1, x2, x3, x4)`.
pub fn w_prime_closed_form(g: &Graph, o: &OrderedClique) -> Result<Rational, WeightError> {
    expect_size(o, 4)?;
    let x = o.vertices();
    let (x1, x2, x3) = (x[0], x[1], x[2]);
    let inv_w3 = {
        let s = prefix_sizes(g, &x[..3])?;
        (s[0] * s[1]) as i128
    };
    let r = g.common_neighbors_of(x);
    let mut sum = FractionSum::new();
    let mut term = |coef: i128, seq: &[usize]| -> Result<(), WeightError> {
        let den: u64 = prefix_sizes(g, seq)?.iter().map(|&s| s as u64).product();
        sum.add(coef * inv_w3, den);
        Ok(())
    };
    for y in r.iter() {
        term(2, &[x1, y, x2, x3])?;
        term(-1, &[x1, x2, x3, y])?;
        term(-1, &[x1, x2, y, x3])?;
        for z in r.iter().filter(|&z| g.has_edge(y, z)) {
            term(2, &[x1, y, x2, x3, z])?;
            term(2, &[x1, y, x2, z, x3])?;
            term(2, &[x1, y, z, x2, x3])?;
            term(-1, &[x1, x2, x3, y, z])?;
            term(-1, &[x1, x2, y, x3, z])?;
            term(-1, &[x1, x2, y, z, x3])?;
            term(-3, &[y, z, x1, x2, x3])?;
        }
    }
    Ok(sum.total())
}

/// `W'_G(O)`, computed by both routes; they must agree exactly.
pub fn w_prime(g: &Graph, o: &OrderedClique) -> Result<Rational, WeightError> {
    let definition = w_prime_by_definition(g, o)?;
    let closed_form = w_prime_closed_form(g, o)?;
    if definition != closed_form {
        return Err(WeightError::RouteMismatch {
            ordering: o.vertices().to_vec(),
            definition: format_rational(&definition),
            closed_form: format_rational(&closed_form),
        });
    }
    Ok(definition)
}

/// `W_G(T) = Σ_O W(x1,x2,x3)·(1 − W'_G(O))/12` over the 24 orderings of `T`,
/// with `W'_G(O)` taken from the closed form.
pub fn weight_k4_via_orderings(g: &Graph, t: &OrderedClique) -> Result<Rational, WeightError> {
    let tv = sorted4(t)?;
    let twelve = Rational::from_integer(BigInt::from(12));
    let mut total = Rational::zero();
    for p in permutations(4) {
        let o = OrderedClique::new_unchecked(p.iter().map(|&i| tv[i]).collect());
        let wp = w_prime_closed_form(g, &o)?;
        total += w3(g, o.vertices())? * (Rational::one() - wp) / &twelve;
    }
    Ok(total)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Arithmetic {
    Exact,
    Float,
}

#[derive(Debug, Clone, Copy)]
pub struct SweepOptions {
    pub arithmetic: Arithmetic,
    /// Slack allowed on weights and edge sums in float mode.
    pub float_tolerance: f64,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self {
            arithmetic: Arithmetic::Exact,
            float_tolerance: 1e-9,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum WeightValues {
    Exact(Vec<Rational>),
    Float(Vec<f64>),
}

/// All `W_G(T)` of a graph, keyed by sorted 4-cliques in lexicographic order.
#[derive(Debug, Clone, PartialEq)]
pub struct K4WeightMap {
    pub n: usize,
    pub min_degree: usize,
    pub cliques: Vec<[usize; 4]>,
    pub weights: WeightValues,
    pub min_weight: Option<(Value, [usize; 4])>,
    /// `max_e |Σ_{T ∋ e} W_G(T) − 1|` over all edges.
    pub max_edge_sum_deviation: Value,
}

impl K4WeightMap {
    pub fn arithmetic(&self) -> Arithmetic {
        match self.weights {
            WeightValues::Exact(_) => Arithmetic::Exact,
            WeightValues::Float(_) => Arithmetic::Float,
        }
    }

    pub fn len(&self) -> usize {
        self.cliques.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cliques.is_empty()
    }

    pub fn value_at(&self, i: usize) -> Value {
        match &self.weights {
            WeightValues::Exact(w) => Value::Exact(w[i].clone()),
            WeightValues::Float(w) => Value::Float(w[i]),
        }
    }

    pub fn weight(&self, t: [usize; 4]) -> Option<Value> {
        let mut key = t;
        key.sort_unstable();
        self.cliques
            .binary_search(&key)
            .ok()
            .map(|i| self.value_at(i))
    }

    /// Sum of the weights of the 4-cliques through `{u, v}`.
    pub fn edge_sum(&self, u: usize, v: usize) -> Value {
        let on_edge = self
            .cliques
            .iter()
            .enumerate()
            .filter(|(_, c)| c.contains(&u) && c.contains(&v));
        match &self.weights {
            WeightValues::Exact(w) => {
                Value::Exact(on_edge.fold(Rational::zero(), |acc, (i, _)| acc + &w[i]))
            }
            WeightValues::Float(w) => Value::Float(on_edge.map(|(i, _)| w[i]).sum()),
        }
    }

    pub fn all_nonnegative(&self, tolerance: f64) -> bool {
        match &self.min_weight {
            None => true,
            Some((Value::Exact(r), _)) => !r.is_negative(),
            Some((Value::Float(x), _)) => *x >= -tolerance,
        }
    }

    pub fn edge_sums_are_one(&self, tolerance: f64) -> bool {
        match &self.max_edge_sum_deviation {
            Value::Exact(r) => r.is_zero(),
            Value::Float(x) => *x <= tolerance,
        }
    }

    /// A valid fractional K4-decomposition: nonnegative weights, every edge
    /// sum equal to one.
    pub fn is_valid(&self, tolerance: f64) -> bool {
        self.all_nonnegative(tolerance) && self.edge_sums_are_one(tolerance)
    }

    /// Plain-text form: one header line, then `a b c d weight` per 4-clique.
    pub fn to_text(&self) -> String {
        let mode = match self.arithmetic() {
            Arithmetic::Exact => "exact",
            Arithmetic::Float => "float",
        };
        let min = self
            .min_weight
            .as_ref()
            .map_or_else(|| "none".to_string(), |(v, _)| v.to_string());
        let mut out = format!(
            "# k4-weights n={} min_degree={} arithmetic={} min_weight={} max_edge_sum_deviation={}\n",
            self.n, self.min_degree, mode, min, self.max_edge_sum_deviation
        );
        for (i, c) in self.cliques.iter().enumerate() {
            out.push_str(&format!(
                "{} {} {} {} {}\n",
                c[0],
                c[1],
                c[2],
                c[3],
                self.value_at(i)
            ));
        }
        out
    }

    pub fn parse_text(text: &str) -> Result<Self, GraphError> {
        let bad = |line: usize, message: String| GraphError::Parse { line, message };
        let mut lines = text.lines().enumerate();
        let (_, header) = lines.next().ok_or_else(|| bad(1, "missing header".into()))?;
        let fields: HashMap<&str, &str> = header
            .trim_start_matches('#')
            .split_whitespace()
            .filter_map(|f| f.split_once('='))
            .collect();
        let field = |k: &str| {
            fields
                .get(k)
                .copied()
                .ok_or_else(|| bad(1, format!("header lacks `{k}`")))
        };
        let exact = match field("arithmetic")? {
            "exact" => true,
            "float" => false,
            other => return Err(bad(1, format!("unknown arithmetic `{other}`"))),
        };
        let parse_value = |line: usize, s: &str| -> Result<Value, GraphError> {
            if exact {
                parse_rational(s)
                    .map(Value::Exact)
                    .map_err(|e| bad(line, e.to_string()))
            } else {
                s.parse::<f64>()
                    .map(Value::Float)
                    .map_err(|e| bad(line, e.to_string()))
            }
        };
        let parse_usize = |line: usize, s: &str| {
            s.parse::<usize>()
                .map_err(|_| bad(line, format!("bad integer `{s}`")))
        };
        let n = parse_usize(1, field("n")?)?;
        let min_degree = parse_usize(1, field("min_degree")?)?;
        let deviation = parse_value(1, field("max_edge_sum_deviation")?)?;
        let min_text = field("min_weight")?;

        let mut cliques = Vec::new();
        let mut exact_w = Vec::new();
        let mut float_w = Vec::new();
        for (idx, raw) in lines {
            let line = idx + 1;
            let parts: Vec<&str> = raw.split_whitespace().collect();
            if parts.is_empty() {
                continue;
            }
            if parts.len() != 5 {
                return Err(bad(line, "expected four vertices and a weight".into()));
            }
            let mut c = [0usize; 4];
            for (slot, p) in c.iter_mut().zip(&parts) {
                *slot = parse_usize(line, p)?;
            }
            cliques.push(c);
            match parse_value(line, parts[4])? {
                Value::Exact(r) => exact_w.push(r),
                Value::Float(x) => float_w.push(x),
            }
        }
        let weights = if exact {
            WeightValues::Exact(exact_w)
        } else {
            WeightValues::Float(float_w)
        };
        let mut map = K4WeightMap {
            n,
            min_degree,
            cliques,
            weights,
            min_weight: None,
            max_edge_sum_deviation: deviation,
        };
        map.min_weight = map.find_min();
        if min_text != "none" {
            let declared = parse_value(1, min_text)?;
            if map.min_weight.as_ref().map(|(v, _)| v) != Some(&declared) {
                return Err(bad(1, "min_weight disagrees with the records".into()));
            }
        }
        Ok(map)
    }

    fn find_min(&self) -> Option<(Value, [usize; 4])> {
        match &self.weights {
            WeightValues::Exact(w) => w
                .iter()
                .enumerate()
                .min_by(|a, b| a.1.cmp(b.1))
                .map(|(i, r)| (Value::Exact(r.clone()), self.cliques[i])),
            WeightValues::Float(w) => w
                .iter()
                .enumerate()
                .min_by(|a, b| a.1.total_cmp(b.1))
                .map(|(i, &x)| (Value::Float(x), self.cliques[i])),
        }
    }
}

fn binom(n: u128, k: u128) -> u128 {
    if k > n {
        return 0;
    }
    (0..k).fold(1u128, |acc, i| acc * (n - i) / (i + 1))
}

struct SlotIndex {
    table: [Vec<usize>; 5],
}

impl SlotIndex {
    fn new(n: usize) -> Self {
        let table = std::array::from_fn(|k| (0..n).map(|v| binom(v as u128, k as u128) as usize).collect());
        Self { table }
    }

    /// Combinatorial-number-system rank of a sorted 4-set.
    #[inline]
    fn rank(&self, s: [usize; 4]) -> usize {
        self.table[1][s[0]] + self.table[2][s[1]] + self.table[3][s[2]] + self.table[4][s[3]]
    }
}

/// One 5-clique's contribution, before it is spread over the 4-cliques.
///
/// `drop[i]` goes to the 4-set missing local vertex `i`; `pair[k]` goes to
/// every `T = S \ PAIRS[k] ∪ {w}` with `w ∈ N(S)`.
struct Local<N> {
    vertices: [usize; 5],
    common: Vec<usize>,
    drop: [N; 5],
    pair: [N; 10],
}

const PAIRS: [(usize, usize); 10] = [
    (0, 1),
    (0, 2),
    (0, 3),
    (0, 4),
    (1, 2),
    (1, 3),
    (1, 4),
    (2, 3),
    (2, 4),
    (3, 4),
];

/// Gadget value (in sixths) of the 4-set `S \ {dropped}` for an ordering
/// whose first two positions are `first`.
fn drop_sixths(dropped: usize, first: (usize, usize)) -> i64 {
    if dropped == first.0 || dropped == first.1 {
        -1
    } else {
        1
    }
}

/// Gadget value (in sixths) of `S \ {i, j} ∪ {w}`.
fn pair_sixths(removed: (usize, usize), first: (usize, usize)) -> i64 {
    let hits = [removed.0, removed.1]
        .iter()
        .filter(|&&p| p == first.0 || p == first.1)
        .count();
    match hits {
        2 => 3,
        1 => -1,
        _ => 1,
    }
}

fn five_clique_counts(g: &Graph, s: &[usize; 5]) -> ([usize; 32], Vec<usize>) {
    let mut counts = [0usize; 32];
    let c = subset_counts(g, s);
    counts.copy_from_slice(&c);
    let common = g.common_neighbors_of(s).iter().collect();
    (counts, common)
}

fn local_float(g: &Graph, s: [usize; 5]) -> Result<Local<f64>, WeightError> {
    let (counts, common) = five_clique_counts(g, &s);
    let mut drop = [0.0; 5];
    let mut pair = [0.0; 10];
    for order in perms5() {
        let [a, b, c, d] = ordering_sizes(&counts, order, &s)?;
        let first = (order[0], order[1]);
        let w = 1.0 / (a as f64 * b as f64 * c as f64 * d as f64);
        for (i, slot) in drop.iter_mut().enumerate() {
            *slot += drop_sixths(i, first) as f64 * w * d as f64;
        }
        for (k, &p) in PAIRS.iter().enumerate() {
            pair[k] += pair_sixths(p, first) as f64 * w;
        }
    }
    Ok(Local {
        vertices: s,
        common,
        drop,
        pair,
    })
}

/// Exact contribution scaled by the global common denominator `D`: every
/// term `ψ6 / (abcd)` becomes the integer `ψ6 · D / (abcd)`.
fn local_exact(
    g: &Graph,
    s: [usize; 5],
    scale: &HashMap<u64, BigInt>,
) -> Result<Local<BigInt>, WeightError> {
    let (counts, common) = five_clique_counts(g, &s);
    // Group by the product abcd first so big-integer work happens once per
    // distinct denominator.
    let mut drop: [HashMap<u64, i64>; 5] = Default::default();
    let mut pair: [HashMap<u64, i64>; 10] = Default::default();
    for order in perms5() {
        let [a, b, c, d] = ordering_sizes(&counts, order, &s)?;
        let first = (order[0], order[1]);
        let den = a * b * c * d;
        for (i, slot) in drop.iter_mut().enumerate() {
            *slot.entry(den).or_default() += drop_sixths(i, first) * d as i64;
        }
        for (k, &p) in PAIRS.iter().enumerate() {
            *pair[k].entry(den).or_default() += pair_sixths(p, first);
        }
    }
    let fold = |m: &HashMap<u64, i64>| -> BigInt {
        let mut entries: Vec<_> = m.iter().filter(|(_, &v)| v != 0).collect();
        entries.sort_unstable();
        entries
            .into_iter()
            .fold(BigInt::zero(), |acc, (den, &v)| acc + &scale[den] * v)
    };
    Ok(Local {
        vertices: s,
        common,
        drop: std::array::from_fn(|i| fold(&drop[i])),
        pair: std::array::from_fn(|k| fold(&pair[k])),
    })
}

fn sorted_insert(base: [usize; 3], w: usize) -> [usize; 4] {
    let mut t = [base[0], base[1], base[2], w];
    t.sort_unstable();
    t
}

fn spread<N: Clone>(
    local: &Local<N>,
    slots: &SlotIndex,
    acc: &mut [N],
    add: impl Fn(&mut N, &N),
) {
    let s = local.vertices;
    for (i, v) in local.drop.iter().enumerate() {
        let mut t = [0usize; 4];
        let mut k = 0;
        for (j, &x) in s.iter().enumerate() {
            if j != i {
                t[k] = x;
                k += 1;
            }
        }
        add(&mut acc[slots.rank(t)], v);
    }
    for (k, &(i, j)) in PAIRS.iter().enumerate() {
        let mut base = [0usize; 3];
        let mut m = 0;
        for (p, &x) in s.iter().enumerate() {
            if p != i && p != j {
                base[m] = x;
                m += 1;
            }
        }
        for &w in &local.common {
            add(&mut acc[slots.rank(sorted_insert(base, w))], &local.pair[k]);
        }
    }
}

/// 5-cliques per parallel block; blocks are reduced in order so the result
/// does not depend on the thread count.
const BLOCK: usize = 4096;

/// Computes every `W_G(T)` by sweeping the ordered 5-cliques once.
///
/// Requires `δ(G) > 4n/5`, which keeps every common neighbourhood of at most
/// five vertices nonempty.
pub fn compute_k4_weights(g: &Graph, opts: &SweepOptions) -> Result<K4WeightMap, WeightError> {
    let n = g.n();
    let min_degree = g.min_degree();
    if 5 * min_degree <= 4 * n {
        return Err(WeightError::DegreeTooLow { min_degree, n });
    }
    if binom(n as u128, 4) > MAX_DENSE_K4_SLOTS {
        return Err(WeightError::TooLarge { n });
    }
    let slots = SlotIndex::new(n);
    let slot_count = binom(n as u128, 4) as usize;
    let fives: Vec<[usize; 5]> = g
        .enumerate_cliques(5)?
        .map(|c| {
            let mut s = [0; 5];
            s.copy_from_slice(c.vertices());
            s
        })
        .collect();
    let cliques: Vec<[usize; 4]> = g
        .enumerate_cliques(4)?
        .map(|c| {
            let mut s = [0; 4];
            s.copy_from_slice(c.vertices());
            s
        })
        .collect();

    let (weights, deviation) = match opts.arithmetic {
        Arithmetic::Float => {
            let mut acc = vec![0.0f64; slot_count];
            for block in fives.chunks(BLOCK) {
                let locals: Vec<Local<f64>> = block
                    .par_iter()
                    .map(|&s| local_float(g, s))
                    .collect::<Result<_, _>>()?;
                for l in &locals {
                    spread(l, &slots, &mut acc, |a, b| *a += *b);
                }
            }
            let w: Vec<f64> = cliques.iter().map(|&t| acc[slots.rank(t)] / 12.0).collect();
            let mut edge = vec![0.0f64; n * n];
            for (t, &x) in cliques.iter().zip(&w) {
                for (u, v) in edge_pairs(t) {
                    edge[u * n + v] += x;
                }
            }
            let dev = g
                .edges()
                .map(|(u, v)| (edge[u * n + v] - 1.0).abs())
                .fold(0.0f64, f64::max);
            (WeightValues::Float(w), Value::Float(dev))
        }
        Arithmetic::Exact => {
            let dens: BTreeSet<u64> = fives
                .par_iter()
                .map(|s| -> Result<BTreeSet<u64>, WeightError> {
                    let (counts, _) = five_clique_counts(g, s);
                    perms5()
                        .iter()
                        .map(|o| ordering_sizes(&counts, o, s).map(|x| x.iter().product()))
                        .collect()
                })
                .collect::<Result<Vec<_>, _>>()?
                .into_iter()
                .flatten()
                .collect();
            let common_den = dens
                .iter()
                .fold(BigInt::one(), |acc, &d| acc.lcm(&BigInt::from(d)));
            let scale: HashMap<u64, BigInt> = dens
                .iter()
                .map(|&d| (d, &common_den / BigInt::from(d)))
                .collect();
            let mut acc = vec![BigInt::zero(); slot_count];
            for block in fives.chunks(BLOCK) {
                let locals: Vec<Local<BigInt>> = block
                    .par_iter()
                    .map(|&s| local_exact(g, s, &scale))
                    .collect::<Result<_, _>>()?;
                for l in &locals {
                    spread(l, &slots, &mut acc, |a, b| *a += b);
                }
            }
            let full = &common_den * BigInt::from(12);
            let numerators: Vec<BigInt> = cliques
                .iter()
                .map(|&t| std::mem::take(&mut acc[slots.rank(t)]))
                .collect();
            let mut edge: HashMap<(usize, usize), BigInt> = HashMap::new();
            for (t, x) in cliques.iter().zip(&numerators) {
                for e in edge_pairs(t) {
                    *edge.entry(e).or_default() += x;
                }
            }
            let max_dev = g
                .edges()
                .map(|e| {
                    let s = edge.get(&e).cloned().unwrap_or_default();
                    (s - &full).abs()
                })
                .max()
                .unwrap_or_default();
            let w = numerators
                .into_iter()
                .map(|x| Rational::new(x, full.clone()))
                .collect();
            (
                WeightValues::Exact(w),
                Value::Exact(Rational::new(max_dev, full)),
            )
        }
    };
    let mut map = K4WeightMap {
        n,
        min_degree,
        cliques,
        weights,
        min_weight: None,
        max_edge_sum_deviation: deviation,
    };
    map.min_weight = map.find_min();
    Ok(map)
}

fn edge_pairs(t: &[usize; 4]) -> [(usize, usize); 6] {
    [
        (t[0], t[1]),
        (t[0], t[2]),
        (t[0], t[3]),
        (t[1], t[2]),
        (t[1], t[3]),
        (t[2], t[3]),
    ]
}

/// Computes all weights and fails with [`WeightError::NegativeWeight`] if the
/// result is not a fractional K4-decomposition.
pub fn fractional_k4_decomposition_with(
    g: &Graph,
    opts: &SweepOptions,
) -> Result<K4WeightMap, WeightError> {
    let map = compute_k4_weights(g, opts)?;
    if !map.all_nonnegative(opts.float_tolerance) {
        let (value, clique) = map.min_weight.clone().expect("nonempty when negative");
        return Err(WeightError::NegativeWeight { clique, value });
    }
    Ok(map)
}

/// Exact [`fractional_k4_decomposition_with`].
pub fn fractional_k4_decomposition(g: &Graph) -> Result<K4WeightMap, WeightError> {
    fractional_k4_decomposition_with(g, &SweepOptions::default())
}

/// Reference value `1/C(n-2, 2)` of every weight on `K_n`.
pub fn complete_graph_weight(n: usize) -> Rational {
    let m = (n - 2) as i64;
    Rational::new(BigInt::one(), BigInt::from(m * (m - 1) / 2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::{complete, complete_minus_matching, cycle};
    use crate::rational::{int, ratio};

    fn clique(g: &Graph, v: &[usize]) -> OrderedClique {
        OrderedClique::new(g, v.to_vec()).unwrap()
    }

    #[test]
    fn psi_cases() {
        let g = complete(8);
        let k = clique(&g, &[0, 1, 2, 3, 4, 5]);
        let v = |t: &[usize]| psi(&g, &k, (0, 1), &clique(&g, t)).unwrap();
        assert_eq!(v(&[0, 1, 2, 3]), GadgetValue::Sixth);
        assert_eq!(v(&[0, 2, 3, 4]), GadgetValue::NegSixth);
        assert_eq!(v(&[2, 3, 4, 5]), GadgetValue::Half);
        assert_eq!(v(&[2, 3, 4, 6]), GadgetValue::Zero);
        assert_eq!(GadgetValue::NegSixth.value(), ratio(-1, 6));
        assert!(matches!(
            psi(&g, &k, (0, 7), &clique(&g, &[0, 1, 2, 3])),
            Err(WeightError::NotAnEdgeOfClique(0, 7))
        ));
    }

    #[test]
    fn gadget_sum_isolates_its_edge() {
        let g = complete(8);
        let k = clique(&g, &[0, 1, 2, 3, 4, 5]);
        assert_eq!(gadget_edge_sum(&g, &k, (0, 1), (0, 1)).unwrap(), int(1));
        assert_eq!(gadget_edge_sum(&g, &k, (0, 1), (1, 2)).unwrap(), int(0));
        assert_eq!(gadget_edge_sum(&g, &k, (0, 1), (2, 3)).unwrap(), int(0));
        assert_eq!(gadget_edge_sum(&g, &k, (0, 1), (5, 6)).unwrap(), int(0));
        assert_eq!(gadget_edge_sum(&g, &k, (0, 1), (6, 7)).unwrap(), int(0));
    }

    #[test]
    fn ordered_weights_on_complete_graphs() {
        let g = complete(12);
        assert_eq!(weight_ordered(&g, &clique(&g, &[3, 1, 7])).unwrap(), ratio(1, 90));
        let five = clique(&g, &[0, 1, 2, 3, 4]);
        assert_eq!(weight_ordered(&g, &five).unwrap(), ratio(1, 10 * 9 * 8 * 7));
        let k10 = complete(10);
        assert_eq!(weight_scaled(&k10, &clique(&k10, &[2, 5])).unwrap(), ratio(5, 4));
    }

    #[test]
    fn empty_neighbourhood_is_reported() {
        let g = complete(5);
        let k = clique(&g, &[0, 1, 2, 3, 4]);
        assert!(matches!(
            weight_ordered(&g, &k),
            Err(WeightError::EmptyNeighborhood(_))
        ));
    }

    #[test]
    fn complete_graph_weights_by_definition() {
        let g = complete(10);
        let t = clique(&g, &[0, 3, 5, 9]);
        assert_eq!(weight_k4(&g, &t).unwrap(), ratio(1, 28));
        let o = clique(&g, &[5, 0, 9, 3]);
        assert_eq!(weight_ordered_k4(&g, &o).unwrap(), ratio(1, 28 * 24));
    }

    #[test]
    fn routes_agree_on_matching_complement() {
        let g = complete_minus_matching(12);
        let t = clique(&g, &[0, 2, 4, 7]);
        let direct = weight_k4(&g, &t).unwrap();
        assert_eq!(weight_k4_via_orderings(&g, &t).unwrap(), direct);
        let o = clique(&g, &[7, 2, 0, 4]);
        assert_eq!(
            w_prime_by_definition(&g, &o).unwrap(),
            w_prime_closed_form(&g, &o).unwrap()
        );
        assert!(w_prime(&g, &o).unwrap() < int(1));
    }

    #[test]
    fn sweep_matches_direct_summation() {
        let g = complete_minus_matching(12);
        let map = compute_k4_weights(&g, &SweepOptions::default()).unwrap();
        assert!(map.is_valid(0.0));
        for &t in map.cliques.iter().step_by(37) {
            let direct = weight_k4(&g, &clique(&g, &t)).unwrap();
            assert_eq!(map.weight(t), Some(Value::Exact(direct)));
        }
    }

    #[test]
    fn sweep_on_complete_graph() {
        let map = fractional_k4_decomposition(&complete(10)).unwrap();
        assert_eq!(map.len(), 210);
        assert_eq!(
            map.min_weight.as_ref().map(|(v, _)| v.clone()),
            Some(Value::Exact(ratio(1, 28)))
        );
        assert_eq!(map.max_edge_sum_deviation, Value::Exact(int(0)));
    }

    #[test]
    fn float_sweep_agrees_with_exact() {
        let g = complete_minus_matching(12);
        let exact = compute_k4_weights(&g, &SweepOptions::default()).unwrap();
        let float = compute_k4_weights(
            &g,
            &SweepOptions {
                arithmetic: Arithmetic::Float,
                ..Default::default()
            },
        )
        .unwrap();
        for i in 0..exact.len() {
            assert!((exact.value_at(i).to_f64() - float.value_at(i).to_f64()).abs() < 1e-12);
        }
        assert!(float.is_valid(1e-9));
    }

    #[test]
    fn low_degree_is_rejected() {
        assert!(matches!(
            fractional_k4_decomposition(&cycle(5)),
            Err(WeightError::DegreeTooLow { min_degree: 2, n: 5 })
        ));
    }

    #[test]
    fn text_round_trip() {
        let g = complete_minus_matching(12);
        for arithmetic in [Arithmetic::Exact, Arithmetic::Float] {
            let map = compute_k4_weights(
                &g,
                &SweepOptions {
                    arithmetic,
                    ..Default::default()
                },
            )
            .unwrap();
            let back = K4WeightMap::parse_text(&map.to_text()).unwrap();
            assert_eq!(back, map);
        }
    }
}
