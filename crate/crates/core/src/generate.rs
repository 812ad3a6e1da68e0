//! Deterministic test-graph generators.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::graph::{Graph, GraphError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GenerateError {
    #[error("minimum degree {delta} is impossible on {n} vertices")]
    Infeasible { n: usize, delta: usize },
    #[error("edge probability {0} outside [0, 1]")]
    BadProbability(f64),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// `K_n`. Panics for `n = 0` or `n` above the default vertex limit.
pub fn complete(n: usize) -> Graph {
    let mut g = Graph::new(n).expect("vertex count within limits");
    for u in 0..n {
        for v in u + 1..n {
            g.add_edge(u, v).expect("valid edge");
        }
    }
    g
}

/// `K_n` with the edges `{2i, 2i+1}` removed for `i < n/2`. For odd `n` the
/// last vertex keeps full degree.
pub fn complete_minus_matching(n: usize) -> Graph {
    let mut g = complete(n);
    for i in 0..n / 2 {
        g.remove_edge(2 * i, 2 * i + 1);
    }
    g
}

/// The cycle `0-1-…-(n-1)-0`, for `n >= 3`.
pub fn cycle(n: usize) -> Graph {
    assert!(n >= 3, "a cycle needs at least three vertices");
    Graph::from_edges(n, (0..n).map(|v| (v, (v + 1) % n))).expect("valid cycle")
}

/// `G(n, p)` followed by a deterministic repair pass that raises every vertex
/// to degree at least `delta`.
///
/// The repair visits vertices in id order and joins a deficient vertex to its
/// non-neighbours of smallest current degree (ties by id). `p` defaults to
/// `delta / (n - 1)`.
pub fn random_min_degree(
    n: usize,
    delta: usize,
    seed: u64,
    p: Option<f64>,
) -> Result<Graph, GenerateError> {
    if n == 0 || delta >= n {
        return Err(GenerateError::Infeasible { n, delta });
    }
    let p = p.unwrap_or(if n > 1 {
        delta as f64 / (n - 1) as f64
    } else {
        0.0
    });
    if !(0.0..=1.0).contains(&p) {
        return Err(GenerateError::BadProbability(p));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut g = Graph::new(n)?;
    for u in 0..n {
        for v in u + 1..n {
            if rng.gen_bool(p) {
                g.add_edge(u, v)?;
            }
        }
    }
    let mut degree: Vec<usize> = (0..n).map(|v| g.degree(v)).collect();
    for v in 0..n {
        if degree[v] >= delta {
            continue;
        }
        let mut partners: Vec<usize> = (0..n).filter(|&u| u != v && !g.has_edge(u, v)).collect();
        partners.sort_by_key(|&u| (degree[u], u));
        for u in partners {
            if degree[v] >= delta {
                break;
            }
            g.add_edge(u, v)?;
            degree[u] += 1;
            degree[v] += 1;
        }
    }
    Ok(g)
}
