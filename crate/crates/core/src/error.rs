use crate::graphs::NodeRef;
use std::fmt;

/// Error type shared across the crate.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A caller violated a precondition (bad index, negative rate, malformed input).
    InvalidArgument(String),
    /// The covariance matrix is singular or a correlation coefficient hit |rho| >= 1.
    DegenerateCorrelation(String),
    /// No arborescence exists; `unreachable` is a node the root cannot reach.
    NoArborescence { unreachable: NodeRef },
    /// No matching covers the requested nodes with the available edges.
    InfeasibleMatching,
    /// The mixed graph admits no strict matching forest.
    NoStrictMatchingForest,
    /// The noisy allocation problem has no valid solution under the peak power cap.
    InfeasibleUnderPeakPower,
    /// The pairing baseline cannot cover every node under the peak power cap.
    BaselineInfeasible,
    /// The convex rate-region program is infeasible under the peak power caps.
    InfeasibleOracle,
    /// An exact oracle was asked to run above its size cap.
    OracleRefused(String),
    /// A solver ran out of its time budget before finding any candidate.
    BudgetExceeded,
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidArgument(msg) => write!(f, "invalid argument: {msg}"),
            Error::DegenerateCorrelation(msg) => write!(f, "degenerate correlation: {msg}"),
            Error::NoArborescence { unreachable } => {
                write!(f, "no arborescence: node {unreachable} unreachable from root")
            }
            Error::InfeasibleMatching => write!(f, "no feasible matching"),
            Error::NoStrictMatchingForest => write!(f, "no strict matching forest exists"),
            Error::InfeasibleUnderPeakPower => {
                write!(f, "no valid allocation under the peak power constraint")
            }
            Error::BaselineInfeasible => {
                write!(f, "pairing baseline infeasible under the peak power constraint")
            }
            Error::InfeasibleOracle => write!(f, "rate-region program infeasible under power caps"),
            Error::OracleRefused(msg) => write!(f, "oracle refused: {msg}"),
            Error::BudgetExceeded => write!(f, "solver time budget exceeded"),
        }
    }
}

impl std::error::Error for Error {}

pub type Result<T> = std::result::Result<T, Error>;
