//! Exact combinatorial solvers and their enumeration oracles.

pub mod arborescence;
pub mod enumerate;
pub mod matching;
pub mod smf;

pub use arborescence::{min_weight_arborescence, Arborescence};
pub use enumerate::{
    brute_force_enumerate, for_each_matching_forest, Enumerated, EnumerationKind,
};
pub use matching::{min_weight_matching, Matching, MATCHING_NODE_CAP};
pub use smf::{min_weight_smf, MatchingForest, SmfSolution};
