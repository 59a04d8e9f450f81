//! Rate and power allocation for sensor networks whose sink decodes
//! sources alone or in pairs.
//!
//! The crate models correlated Gaussian sources, builds the mixed test and
//! cost graphs that encode pairwise decodability, and solves the induced
//! combinatorial programs: minimum-weight arborescences for sum-rate,
//! minimum-weight strict matching forests for sum-power, plus matching and
//! per-node baselines and a full joint-decoding oracle for small networks.

pub mod allocation;
pub mod error;
pub mod graphs;
pub mod harness;
pub mod model;
pub mod solvers;
pub mod validity;

pub use allocation::{
    individual_powers, individual_rates, matching_allocation_noisy, matching_rates_noiseless,
    optimal_noiseless_rates, optimal_noisy_allocation, per_pair_power_optimum, sw_n_power_oracle,
    Method, PairOptimum, PowerAssignment, RateAssignment, Witness, SW_ORACLE_NODE_CAP,
};
pub use error::{Error, Result};
pub use harness::{
    fmt_sig, run_sweep, run_table, solve_instance, ExperimentConfig, MethodOutcome, MethodReport,
    Mode, SolveReport,
};
pub use graphs::{
    build_mixed_test_graph, build_mixed_total_graph, build_test_graph, build_total_digraph,
    weight_transform, DirectedEdge, MixedGraph, NodeRef, SubgraphSelection, UndirectedEdge,
};
pub use model::{
    ChannelModel, EntropyOracle, NetworkInstance, PairwiseEntropies, RateClamp, RATE_TOL,
};
pub use solvers::{
    brute_force_enumerate, for_each_matching_forest, min_weight_arborescence, min_weight_matching,
    min_weight_smf, Arborescence, Enumerated, EnumerationKind, Matching, MatchingForest,
    SmfSolution, MATCHING_NODE_CAP,
};
pub use validity::{
    check_generalized_valid, check_pairwise_valid, simulate_decode, DecodeSchedule, DecodeStep,
    Verdict,
};
