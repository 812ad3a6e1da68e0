//! Shared fixtures for the benchmarks.

use k4frac::generate::{complete, complete_minus_matching, random_min_degree};
use k4frac::nlp::{sample_point, ScalarPoint};
use k4frac::rational::ratio;
use k4frac::{Graph, ProgramId, Rational};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Named graphs above the `4n/5` degree bound, smallest first.
pub fn dense_corpus() -> Vec<(&'static str, Graph)> {
    vec![
        ("K10", complete(10)),
        ("K12-matching", complete_minus_matching(12)),
        ("random-12-10", random_min_degree(12, 10, 1, None).expect("feasible")),
        ("K16-matching", complete_minus_matching(16)),
    ]
}

pub fn threshold_d() -> Rational {
    ratio(2, 33)
}

/// A fixed batch of on-domain points for `p` at `d`.
pub fn sample_batch(p: ProgramId, d: &Rational, count: usize) -> Vec<ScalarPoint> {
    let mut rng = ChaCha8Rng::seed_from_u64(0xbe4c);
    (0..count)
        .map(|_| sample_point(p, d, 4096, &mut rng).expect("sampling succeeds"))
        .collect()
}
