//! Reliability polynomials of networks under coherent damage rules.
//!
//! Every edge of a multigraph operates independently with probability `x`.
//! The reliability polynomial R(x) is the probability that the surviving
//! subgraph is accepted by a rule (two-terminal connectivity, spanning
//! connectivity, component-size criteria). This crate computes R exactly by
//! enumerating the minimal accepted subgraphs ("motifs") and running
//! inclusion-exclusion over their unions, converts between the three standard
//! coefficient bases, estimates R by stratified Monte Carlo when exact
//! enumeration is out of reach, and ranks edges by their importance to R.

pub mod error;
pub mod estimate;
pub mod graph;
pub mod importance;
pub mod incexc;
pub mod motifs;
pub mod poly;
pub mod rules;

pub use error::{Error, Result};
pub use estimate::{
    brute_force_rk, monte_carlo_pk, reliability_curve, CurveSource, McEstimate,
    BRUTE_FORCE_EDGE_CAP,
};
pub use graph::{components, grid_graph, parse_edge_list, spanning_tree_count, star_of_chains_graph, EdgeSet, Graph};
pub use importance::{
    edge_importance, edge_removal_experiment, find_crossings, importance_report, rank_edges,
    Crossing, ImportanceReport, RemovalExperiment, DEFAULT_CROSSING_TOL,
};
pub use incexc::{
    nk_exact, nk_from_table, nkl_full, nkl_truncated, tradeoff_compare, TradeoffComparison,
    UnionEnumerationPlan, DENSE_DP_MAX_E, NKL_FULL_MAX_F,
};
pub use motifs::{
    enumerate_minimal_generic, enumerate_motifs, enumerate_paths, enumerate_spanning_trees,
    minimal_size_and_count, MotifFamily, GENERIC_ENUM_MAX_E,
};
pub use poly::{
    binomial, check_constraints, closed_form_chain_overlap, closed_form_disjoint, evaluate,
    evaluate_exact, leading_term, nk_to_rk, rk_to_nk, rk_to_pk, sparse_nk_solutions, Basis,
    CoefficientVector, ConstraintReport, NklTable,
};
pub use rules::{parse_alpha, Alpha, RuleJson, RuleSpec};
