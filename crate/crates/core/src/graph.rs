//! Dense simple graphs with bitset adjacency rows.
//!
//! Every quantity the weight construction needs is a repeated intersection of
//! neighbourhoods, so adjacency is stored as fixed-width `u64` rows and
//! intersections are word-wise ANDs.

use std::fmt;

use num_bigint::BigInt;
use thiserror::Error;

use crate::rational::Rational;

pub const DEFAULT_MAX_VERTICES: usize = 4096;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("a graph needs at least one vertex")]
    Empty,
    #[error("{n} vertices exceeds the configured limit of {max}")]
    TooManyVertices { n: usize, max: usize },
    #[error("vertex {vertex} out of range for a graph on {n} vertices")]
    VertexOutOfRange { vertex: usize, n: usize },
    #[error("self-loop at vertex {0}")]
    SelfLoop(usize),
    #[error("clique size {0} outside the supported range 2..=6")]
    InvalidCliqueSize(usize),
    #[error("vertices {0:?} do not form a clique")]
    NotAClique(Vec<usize>),
    #[error("repeated vertex in {0:?}")]
    RepeatedVertex(Vec<usize>),
    #[error("seed set of size {seed} is larger than the clique size {r}")]
    SeedTooLarge { seed: usize, r: usize },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

#[inline]
pub(crate) fn words_for(n: usize) -> usize {
    n.div_ceil(64)
}

/// A subset of `0..n`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct VertexSet {
    n: usize,
    words: Vec<u64>,
}

impl VertexSet {
    pub fn empty(n: usize) -> Self {
        Self {
            n,
            words: vec![0; words_for(n)],
        }
    }

    pub fn full(n: usize) -> Self {
        let mut s = Self::empty(n);
        for v in 0..n {
            s.insert(v);
        }
        s
    }

    pub fn from_vertices(
        n: usize,
        vertices: impl IntoIterator<Item = usize>,
    ) -> Result<Self, GraphError> {
        let mut s = Self::empty(n);
        for v in vertices {
            if v >= n {
                return Err(GraphError::VertexOutOfRange { vertex: v, n });
            }
            s.insert(v);
        }
        Ok(s)
    }

    pub(crate) fn from_words(n: usize, words: Vec<u64>) -> Self {
        debug_assert_eq!(words.len(), words_for(n));
        Self { n, words }
    }

    pub fn universe(&self) -> usize {
        self.n
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    #[inline]
    pub fn insert(&mut self, v: usize) {
        assert!(v < self.n, "vertex {v} out of range 0..{}", self.n);
        self.words[v / 64] |= 1 << (v % 64);
    }

    #[inline]
    pub fn remove(&mut self, v: usize) {
        if v < self.n {
            self.words[v / 64] &= !(1 << (v % 64));
        }
    }

    #[inline]
    pub fn contains(&self, v: usize) -> bool {
        v < self.n && self.words[v / 64] >> (v % 64) & 1 == 1
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn intersect_with(&mut self, other: &VertexSet) {
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a &= *b;
        }
    }

    pub fn intersection(&self, other: &VertexSet) -> VertexSet {
        let mut s = self.clone();
        s.intersect_with(other);
        s
    }

    pub fn union(&self, other: &VertexSet) -> VertexSet {
        let words = self
            .words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| a | b)
            .collect();
        Self::from_words(self.n, words)
    }

    pub fn is_subset(&self, other: &VertexSet) -> bool {
        self.words
            .iter()
            .zip(&other.words)
            .all(|(a, b)| a & !b == 0)
    }

    /// Smallest member `>= from`.
    pub fn next_member(&self, from: usize) -> Option<usize> {
        if from >= self.n {
            return None;
        }
        let mut wi = from / 64;
        let mut word = self.words[wi] & (u64::MAX << (from % 64));
        loop {
            if word != 0 {
                return Some(wi * 64 + word.trailing_zeros() as usize);
            }
            wi += 1;
            if wi == self.words.len() {
                return None;
            }
            word = self.words[wi];
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    None
                } else {
                    let b = w.trailing_zeros() as usize;
                    w &= w - 1;
                    Some(wi * 64 + b)
                }
            })
        })
    }
}

impl fmt::Debug for VertexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

/// A tuple of 2 to 6 distinct, mutually adjacent vertices.
///
/// Order matters for the weight products; [`OrderedClique::canonical`] gives
/// the sorted (unordered) representative.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OrderedClique(Vec<usize>);

impl OrderedClique {
    pub fn new(g: &Graph, vertices: Vec<usize>) -> Result<Self, GraphError> {
        if !(2..=6).contains(&vertices.len()) {
            return Err(GraphError::InvalidCliqueSize(vertices.len()));
        }
        for &v in &vertices {
            if v >= g.n() {
                return Err(GraphError::VertexOutOfRange { vertex: v, n: g.n() });
            }
        }
        for (i, &u) in vertices.iter().enumerate() {
            if vertices[..i].contains(&u) {
                return Err(GraphError::RepeatedVertex(vertices));
            }
        }
        if !g.is_clique(&vertices) {
            return Err(GraphError::NotAClique(vertices));
        }
        Ok(Self(vertices))
    }

    pub(crate) fn new_unchecked(vertices: Vec<usize>) -> Self {
        Self(vertices)
    }

    pub fn vertices(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, v: usize) -> bool {
        self.0.contains(&v)
    }

    pub fn canonical(&self) -> OrderedClique {
        let mut v = self.0.clone();
        v.sort_unstable();
        OrderedClique(v)
    }

    pub fn into_vec(self) -> Vec<usize> {
        self.0
    }
}

/// Simple undirected graph on `0..n`.
#[derive(Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    stride: usize,
    rows: Vec<u64>,
    edges: usize,
}

impl Graph {
    pub fn new(n: usize) -> Result<Self, GraphError> {
        Self::with_limit(n, DEFAULT_MAX_VERTICES)
    }

    pub fn with_limit(n: usize, max: usize) -> Result<Self, GraphError> {
        if n == 0 {
            return Err(GraphError::Empty);
        }
        if n > max {
            return Err(GraphError::TooManyVertices { n, max });
        }
        let stride = words_for(n);
        Ok(Self {
            n,
            stride,
            rows: vec![0; n * stride],
            edges: 0,
        })
    }

    pub fn from_edges(
        n: usize,
        edges: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self, GraphError> {
        let mut g = Self::new(n)?;
        for (u, v) in edges {
            g.add_edge(u, v)?;
        }
        Ok(g)
    }

    /// Adds `{u, v}`; adding an existing edge is a no-op.
    pub fn add_edge(&mut self, u: usize, v: usize) -> Result<(), GraphError> {
        for w in [u, v] {
            if w >= self.n {
                return Err(GraphError::VertexOutOfRange { vertex: w, n: self.n });
            }
        }
        if u == v {
            return Err(GraphError::SelfLoop(u));
        }
        if !self.has_edge(u, v) {
            self.rows[u * self.stride + v / 64] |= 1 << (v % 64);
            self.rows[v * self.stride + u / 64] |= 1 << (u % 64);
            self.edges += 1;
        }
        Ok(())
    }

    pub fn remove_edge(&mut self, u: usize, v: usize) {
        if u < self.n && v < self.n && self.has_edge(u, v) {
            self.rows[u * self.stride + v / 64] &= !(1 << (v % 64));
            self.rows[v * self.stride + u / 64] &= !(1 << (u % 64));
            self.edges -= 1;
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges
    }

    /// Number of `u64` words per adjacency row.
    pub fn stride(&self) -> usize {
        self.stride
    }

    #[inline]
    pub fn row(&self, v: usize) -> &[u64] {
        &self.rows[v * self.stride..(v + 1) * self.stride]
    }

    #[inline]
    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u < self.n && v < self.n && self.rows[u * self.stride + v / 64] >> (v % 64) & 1 == 1
    }

    pub fn neighbors(&self, v: usize) -> VertexSet {
        VertexSet::from_words(self.n, self.row(v).to_vec())
    }

    pub fn degree(&self, v: usize) -> usize {
        self.row(v).iter().map(|w| w.count_ones() as usize).sum()
    }

    /// `δ(G)`.
    pub fn min_degree(&self) -> usize {
        (0..self.n).map(|v| self.degree(v)).min().unwrap_or(0)
    }

    /// Edges as `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n).flat_map(move |u| {
            self.neighbors(u)
                .iter()
                .filter(move |&v| v > u)
                .map(move |v| (u, v))
                .collect::<Vec<_>>()
        })
    }

    pub fn is_clique(&self, vertices: &[usize]) -> bool {
        vertices.iter().enumerate().all(|(i, &u)| {
            vertices[i + 1..]
                .iter()
                .all(|&v| u != v && self.has_edge(u, v))
        })
    }

    /// `N(S)`, the common neighbourhood; `V(G)` for the empty set.
    pub fn common_neighbors(&self, s: &VertexSet) -> VertexSet {
        let mut out = VertexSet::full(self.n);
        for v in s.iter() {
            for (o, r) in out.words.iter_mut().zip(self.row(v)) {
                *o &= *r;
            }
        }
        out
    }

    pub fn common_neighbors_of(&self, vertices: &[usize]) -> VertexSet {
        let mut out = VertexSet::full(self.n);
        for &v in vertices {
            for (o, r) in out.words.iter_mut().zip(self.row(v)) {
                *o &= *r;
            }
        }
        out
    }

    /// `|N(v_1, …, v_k)|` without allocating for graphs up to 1024 vertices.
    pub fn common_neighbor_count(&self, vertices: &[usize]) -> usize {
        if vertices.is_empty() {
            return self.n;
        }
        if self.stride <= 16 {
            let mut acc = [0u64; 16];
            acc[..self.stride].copy_from_slice(self.row(vertices[0]));
            for &v in &vertices[1..] {
                for (a, r) in acc.iter_mut().zip(self.row(v)) {
                    *a &= *r;
                }
            }
            acc[..self.stride]
                .iter()
                .map(|w| w.count_ones() as usize)
                .sum()
        } else {
            self.common_neighbors_of(vertices).len()
        }
    }

    /// Common-neighbour density `|N(S)| / n`, equal to 1 for `S = ∅`.
    pub fn density_hat(&self, s: &VertexSet) -> Rational {
        let count = self.common_neighbors(s).len();
        Rational::new(BigInt::from(count), BigInt::from(self.n))
    }

    pub fn density_hat_of(&self, vertices: &[usize]) -> Rational {
        let count = self.common_neighbor_count(vertices);
        Rational::new(BigInt::from(count), BigInt::from(self.n))
    }

    /// All `r`-cliques in sorted form, lexicographically ordered.
    pub fn enumerate_cliques(&self, r: usize) -> Result<Cliques<'_>, GraphError> {
        if !(2..=6).contains(&r) {
            return Err(GraphError::InvalidCliqueSize(r));
        }
        Ok(Cliques::new(self, r, Vec::new(), VertexSet::full(self.n)))
    }

    /// The `r`-cliques whose vertex set contains `s`, lexicographically
    /// ordered by sorted vertex ids.
    pub fn cliques_containing(
        &self,
        r: usize,
        s: &VertexSet,
    ) -> Result<Vec<OrderedClique>, GraphError> {
        if !(2..=6).contains(&r) {
            return Err(GraphError::InvalidCliqueSize(r));
        }
        let seed: Vec<usize> = s.iter().collect();
        if seed.len() > r {
            return Err(GraphError::SeedTooLarge { seed: seed.len(), r });
        }
        if !self.is_clique(&seed) {
            return Err(GraphError::NotAClique(seed));
        }
        let pool = self.common_neighbors(s);
        let mut out: Vec<OrderedClique> = if seed.len() == r {
            vec![OrderedClique(seed)]
        } else {
            Cliques::new(self, r - seed.len(), Vec::new(), pool)
                .map(|c| {
                    let mut v = c.0;
                    v.extend_from_slice(&seed);
                    v.sort_unstable();
                    OrderedClique(v)
                })
                .collect()
        };
        out.sort_unstable();
        Ok(out)
    }

    pub fn complement_degree_excess(&self) -> Vec<usize> {
        (0..self.n).map(|v| self.n - 1 - self.degree(v)).collect()
    }
}

impl fmt::Debug for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Graph")
            .field("n", &self.n)
            .field("edges", &self.edges)
            .finish()
    }
}

/// Depth-first clique enumerator restricted to a candidate pool.
pub struct Cliques<'g> {
    g: &'g Graph,
    r: usize,
    current: Vec<usize>,
    candidates: Vec<VertexSet>,
    cursor: Vec<usize>,
    done: bool,
}

impl<'g> Cliques<'g> {
    fn new(g: &'g Graph, r: usize, current: Vec<usize>, pool: VertexSet) -> Self {
        let mut candidates = vec![VertexSet::empty(g.n); r.max(1)];
        candidates[0] = pool;
        Self {
            g,
            r,
            current,
            candidates,
            cursor: vec![0; r.max(1)],
            done: r == 0,
        }
    }
}

impl Iterator for Cliques<'_> {
    type Item = OrderedClique;

    fn next(&mut self) -> Option<OrderedClique> {
        if self.done {
            return None;
        }
        loop {
            let depth = self.current.len();
            if depth == self.r {
                let out = OrderedClique(self.current.clone());
                self.current.pop();
                return Some(out);
            }
            match self.candidates[depth].next_member(self.cursor[depth]) {
                Some(v) => {
                    self.cursor[depth] = v + 1;
                    self.current.push(v);
                    if depth + 1 < self.r {
                        let next = self.candidates[depth].intersection(&self.g.neighbors(v));
                        self.candidates[depth + 1] = next;
                        self.cursor[depth + 1] = v + 1;
                    }
                }
                None => {
                    if depth == 0 {
                        self.done = true;
                        return None;
                    }
                    self.current.pop();
                }
            }
        }
    }
}

/// Parses the plain-text edge-list format: one `u v` pair per line,
/// `#` comments, and an optional leading `n <count>` line.
pub fn parse_edge_list(text: &str) -> Result<Graph, GraphError> {
    let mut declared: Option<usize> = None;
    let mut edges = Vec::new();
    let mut seen_content = false;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if !seen_content && fields.first() == Some(&"n") {
            if fields.len() != 2 {
                return Err(GraphError::Parse {
                    line: line_no,
                    message: "expected `n <count>`".into(),
                });
            }
            let n = fields[1].parse::<usize>().map_err(|_| GraphError::Parse {
                line: line_no,
                message: format!("bad vertex count `{}`", fields[1]),
            })?;
            declared = Some(n);
            seen_content = true;
            continue;
        }
        seen_content = true;
        if fields.len() != 2 {
            return Err(GraphError::Parse {
                line: line_no,
                message: format!("expected two vertex ids, found `{line}`"),
            });
        }
        let parse = |t: &str| {
            t.parse::<usize>().map_err(|_| GraphError::Parse {
                line: line_no,
                message: format!("bad vertex id `{t}`"),
            })
        };
        let (u, v) = (parse(fields[0])?, parse(fields[1])?);
        if u == v {
            return Err(GraphError::Parse {
                line: line_no,
                message: format!("self-loop at vertex {u}"),
            });
        }
        if let Some(n) = declared {
            if u >= n || v >= n {
                return Err(GraphError::Parse {
                    line: line_no,
                    message: format!("vertex id out of range for n = {n}"),
                });
            }
        }
        edges.push((u, v));
    }
    let n = match declared {
        Some(n) => n,
        None => edges.iter().map(|&(u, v)| u.max(v) + 1).max().unwrap_or(0),
    };
    Graph::from_edges(n, edges)
}

/// Writes the edge-list format with an explicit `n` header.
pub fn write_edge_list(g: &Graph) -> String {
    let mut out = format!("n {}\n", g.n());
    for (u, v) in g.edges() {
        out.push_str(&format!("{u} {v}\n"));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::{complete, complete_minus_matching, cycle};
    use crate::rational::{int, ratio};

    fn set(n: usize, vs: &[usize]) -> VertexSet {
        VertexSet::from_vertices(n, vs.iter().copied()).unwrap()
    }

    #[test]
    fn common_neighbors_examples() {
        let k5 = complete(5);
        assert_eq!(k5.common_neighbors(&set(5, &[0])), set(5, &[1, 2, 3, 4]));
        let c5 = cycle(5);
        assert_eq!(c5.common_neighbors(&set(5, &[])), VertexSet::full(5));
        assert_eq!(c5.common_neighbors(&set(5, &[0, 2])), set(5, &[1]));
    }

    #[test]
    fn density_hat_examples() {
        let c5 = cycle(5);
        assert_eq!(c5.density_hat(&set(5, &[])), int(1));
        let k10 = complete(10);
        assert_eq!(k10.density_hat(&set(10, &[3])), ratio(9, 10));
        let g = complete_minus_matching(12);
        // {0,2} is an edge; 1 and 3 are their matched partners.
        assert!(g.has_edge(0, 2));
        assert_eq!(g.density_hat(&set(12, &[0, 2])), ratio(8, 12));
    }

    #[test]
    fn clique_counts() {
        let k5 = complete(5);
        assert_eq!(k5.enumerate_cliques(4).unwrap().count(), 5);
        let mut k6 = complete(6);
        k6.remove_edge(0, 1);
        assert_eq!(k6.enumerate_cliques(6).unwrap().count(), 0);
        assert!(k5.enumerate_cliques(7).is_err());
        assert!(k5.enumerate_cliques(1).is_err());
    }

    #[test]
    fn cliques_are_lexicographic() {
        let k6 = complete(6);
        let all: Vec<_> = k6.enumerate_cliques(3).unwrap().collect();
        let mut sorted = all.clone();
        sorted.sort();
        assert_eq!(all, sorted);
        assert_eq!(all[0].vertices(), &[0, 1, 2]);
        assert_eq!(all.len(), 20);
    }

    #[test]
    fn cliques_containing_edge() {
        let k6 = complete(6);
        let found = k6.cliques_containing(4, &set(6, &[2, 5])).unwrap();
        assert_eq!(found.len(), 6);
        assert!(found.iter().all(|c| c.contains(2) && c.contains(5)));
        let c5 = cycle(5);
        assert!(matches!(
            c5.cliques_containing(3, &set(5, &[0, 2])),
            Err(GraphError::NotAClique(_))
        ));
    }

    #[test]
    fn min_degree_examples() {
        assert_eq!(complete(10).min_degree(), 9);
        assert_eq!(complete_minus_matching(12).min_degree(), 10);
        let star = Graph::from_edges(6, (1..6).map(|v| (0, v))).unwrap();
        assert_eq!(star.min_degree(), 1);
    }

    #[test]
    fn edge_list_round_trip_and_errors() {
        let text = "# comment\nn 6\n0 1\n1 2\n\n# another\n4 3\n";
        let g = parse_edge_list(text).unwrap();
        assert_eq!(g.n(), 6);
        assert_eq!(g.edge_count(), 3);
        assert_eq!(g.degree(5), 0);
        let back = parse_edge_list(&write_edge_list(&g)).unwrap();
        assert_eq!(back, g);

        let implicit = parse_edge_list("0 1\n1 4\n").unwrap();
        assert_eq!(implicit.n(), 5);

        assert!(matches!(
            parse_edge_list("n 3\n0 3\n"),
            Err(GraphError::Parse { line: 2, .. })
        ));
        assert!(parse_edge_list("0 0\n").is_err());
        assert!(parse_edge_list("0 1 2\n").is_err());
        assert!(parse_edge_list("x 1\n").is_err());
        assert!(matches!(parse_edge_list(""), Err(GraphError::Empty)));
    }

    #[test]
    fn vertex_limit_is_enforced() {
        assert!(matches!(
            Graph::with_limit(10, 8),
            Err(GraphError::TooManyVertices { n: 10, max: 8 })
        ));
        assert!(Graph::new(DEFAULT_MAX_VERTICES + 1).is_err());
    }

    #[test]
    fn ordered_clique_validation() {
        let c5 = cycle(5);
        assert!(OrderedClique::new(&c5, vec![0, 1]).is_ok());
        assert!(OrderedClique::new(&c5, vec![0, 2]).is_err());
        assert!(OrderedClique::new(&c5, vec![0]).is_err());
        assert!(matches!(
            OrderedClique::new(&complete(4), vec![1, 1]),
            Err(GraphError::RepeatedVertex(_))
        ));
    }
}
