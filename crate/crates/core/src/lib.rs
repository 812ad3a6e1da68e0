//! Exact verification toolkit for fractional `K4`-decompositions of dense
//! graphs.
//!
//! [`gadget`] computes the edge-gadget weighting of a graph. The chain of
//! relaxed programs that bounds it lives in [`nlp`], its final polynomial is
//! certified negative by [`certify`], and [`optimize`] corroborates the last
//! programs numerically.

pub mod certify;
pub mod gadget;
pub mod generate;
pub mod graph;
pub mod nlp;
pub mod optimize;
pub mod rational;
pub mod report;

pub use certify::{
    bisect_threshold, certify_sign_chain, threshold_polynomial, CertifyError, Polynomial,
    SignCertificate,
};
pub use gadget::{
    compute_k4_weights, fractional_k4_decomposition, gadget_edge_sum, w_prime, weight_k4,
    K4WeightMap, SweepOptions, Value, WeightError,
};
pub use graph::{parse_edge_list, write_edge_list, Graph, GraphError, OrderedClique, VertexSet};
pub use nlp::{eval_objective, w13, NlpError, ProgramId, ProgramPoint, ScalarPoint, Var};
pub use optimize::{grid_search, local_refine, search, SearchConfig, SearchResult};
pub use rational::{format_rational, parse_rational, Rational};
