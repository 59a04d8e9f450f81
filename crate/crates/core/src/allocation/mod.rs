//! Turns solver structures into concrete rate and power assignments: the
//! arborescence optimum and matching baseline for noiseless links, the
//! strict-matching-forest optimum and matching baseline under peak-power
//! caps, per-node individual transmission, and the joint-decoding convex
//! oracle.

pub mod pair;
mod sw_oracle;

pub use pair::{per_pair_power_optimum, PairOptimum};
pub use sw_oracle::SW_ORACLE_NODE_CAP;

use crate::error::{Error, Result};
use crate::graphs::{
    build_mixed_total_graph, build_total_digraph, MixedGraph, NodeRef, SubgraphSelection,
};
use crate::model::{ChannelModel, EntropyOracle, RateClamp};
use crate::solvers::{min_weight_arborescence, min_weight_matching, min_weight_smf};
use serde_json::json;
use std::time::Duration;

/// How an assignment was produced; doubles as its report label.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    /// Minimum-weight arborescence over the rooted total digraphs.
    Ma,
    /// Minimum-weight matching baseline (rates or powers by context).
    Matching,
    /// Minimum-weight strict matching forest on the mixed total graph.
    Smf,
    /// Convex joint-decoding oracle.
    SwOracle,
    /// Every node transmits at its marginal entropy.
    Individual,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Ma => "ma",
            Method::Matching => "matching",
            Method::Smf => "smf",
            Method::SwOracle => "oracle",
            Method::Individual => "individual",
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// The graph structure certifying an assignment, kept with its parent
/// graph so edges can be labelled and drawn.
#[derive(Debug, Clone)]
pub struct Witness {
    pub graph: MixedGraph,
    pub selection: SubgraphSelection,
}

impl Witness {
    pub fn edge_labels(&self) -> Vec<String> {
        self.selection.edge_labels(&self.graph)
    }
}

/// Rates in bits per sample for every node, with the structure that
/// justified them when one exists.
#[derive(Debug, Clone)]
pub struct RateAssignment {
    pub method: Method,
    pub rates: Vec<f64>,
    pub witness: Option<Witness>,
}

impl RateAssignment {
    pub fn sum_rate(&self) -> f64 {
        self.rates.iter().sum()
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "method": self.method.as_str(),
            "rates": self.rates,
            "witness_edges": self.witness.as_ref().map(Witness::edge_labels).unwrap_or_default(),
            "sum": self.sum_rate(),
        })
    }
}

/// Transmit powers alongside the rates they carry. `exact` is false only
/// when a budgeted solver returned its best incumbent instead of a proven
/// optimum.
#[derive(Debug, Clone)]
pub struct PowerAssignment {
    pub rates: RateAssignment,
    pub powers: Vec<f64>,
    pub exact: bool,
}

impl PowerAssignment {
    pub fn method(&self) -> Method {
        self.rates.method
    }

    pub fn sum_power(&self) -> f64 {
        self.powers.iter().sum()
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "method": self.rates.method.as_str(),
            "rates": self.rates.rates,
            "powers": self.powers,
            "witness_edges": self.rates.witness.as_ref().map(Witness::edge_labels).unwrap_or_default(),
            "sum": self.sum_power(),
            "exact": self.exact,
        })
    }
}

/// Minimum-sum-rate assignment: solve one rooted arborescence per choice
/// of the node transmitting its full marginal, keep the cheapest. The
/// selected in-edge weights are exactly the rates.
pub fn optimal_noiseless_rates(oracle: &EntropyOracle) -> Result<RateAssignment> {
    let n = oracle.n();
    let total = build_total_digraph(oracle)?;
    let mut best: Option<(MixedGraph, crate::solvers::Arborescence)> = None;
    for root in 0..n {
        let rooted = total.rooted_variant(root)?;
        let arb = min_weight_arborescence(&rooted, NodeRef::Starred(root))?;
        let better = match &best {
            None => true,
            Some((_, b)) => arb.weight < b.weight,
        };
        if better {
            best = Some((rooted, arb));
        }
    }
    let (graph, arb) = best.expect("n >= 2 checked by the total digraph");
    let mut rates = vec![0.0; n];
    for &idx in &arb.selection.directed {
        let e = graph.directed_edges()[idx];
        rates[e.head] = e.weight;
    }
    Ok(RateAssignment {
        method: Method::Ma,
        rates,
        witness: Some(Witness {
            graph,
            selection: arb.selection,
        }),
    })
}

/// Matching baseline on rates: pair up nodes by joint entropy, lower
/// index sends its marginal and the partner the conditional; a leftover
/// node sends its marginal.
pub fn matching_rates_noiseless(oracle: &EntropyOracle) -> Result<RateAssignment> {
    let n = oracle.n();
    if n < 2 {
        return Err(Error::InvalidArgument("need at least two nodes".into()));
    }
    let mut g = MixedGraph::new();
    for i in 0..n {
        g.add_regular(i);
    }
    for i in 0..n {
        for j in (i + 1)..n {
            g.add_undirected(i, j, oracle.joint(&[i, j])?)?;
        }
    }
    let single = |i: usize| oracle.marginal(i).expect("index in range");
    let matching = min_weight_matching(&g, Some(&single))?;
    let mut rates = vec![0.0; n];
    for &idx in &matching.selection.undirected {
        let e = g.undirected_edges()[idx];
        rates[e.a] = oracle.marginal(e.a)?;
        rates[e.b] = oracle.conditional(e.b, e.a)?;
    }
    for &i in &matching.singletons {
        rates[i] = oracle.marginal(i)?;
    }
    Ok(RateAssignment {
        method: Method::Matching,
        rates,
        witness: Some(Witness {
            graph: g,
            selection: matching.selection,
        }),
    })
}

/// Every node at its marginal entropy.
pub fn individual_rates(oracle: &EntropyOracle) -> Result<RateAssignment> {
    let rates: Result<Vec<f64>> = (0..oracle.n()).map(|i| oracle.marginal(i)).collect();
    Ok(RateAssignment {
        method: Method::Individual,
        rates: rates?,
        witness: None,
    })
}

/// Individual baseline with powers; powers may exceed the cap, in which
/// case the assignment is a reference value rather than a feasible plan.
pub fn individual_powers(
    oracle: &EntropyOracle,
    channel: &ChannelModel,
    clamp: RateClamp,
) -> Result<PowerAssignment> {
    let mut rates = individual_rates(oracle)?;
    rates.method = Method::Individual;
    let powers = convert_powers(&rates.rates, channel, clamp)?;
    Ok(PowerAssignment {
        rates,
        powers,
        exact: true,
    })
}

fn convert_powers(rates: &[f64], channel: &ChannelModel, clamp: RateClamp) -> Result<Vec<f64>> {
    if channel.n() != rates.len() {
        return Err(Error::InvalidArgument(
            "channel and rates disagree on node count".into(),
        ));
    }
    Ok(rates
        .iter()
        .enumerate()
        .map(|(i, &r)| channel.power(i, r, clamp))
        .collect())
}

/// Per-pair optima for all unordered pairs, indexed by (low, high).
fn pair_table(
    oracle: &EntropyOracle,
    channel: &ChannelModel,
    clamp: RateClamp,
) -> Result<Vec<Vec<Option<PairOptimum>>>> {
    let n = oracle.n();
    let mut table = vec![vec![None; n]; n];
    for i in 0..n {
        for j in (i + 1)..n {
            table[i][j] = Some(per_pair_power_optimum(oracle, channel, i, j, clamp)?);
        }
    }
    Ok(table)
}

/// Minimum-sum-power assignment via the strict matching forest of the
/// mixed total graph. Extraction follows the edge kinds: a starred edge
/// sends the marginal, a directed edge the conditional given its tail,
/// an undirected edge the pair's optimal split.
pub fn optimal_noisy_allocation(
    oracle: &EntropyOracle,
    channel: &ChannelModel,
    clamp: RateClamp,
    budget: Option<Duration>,
) -> Result<PowerAssignment> {
    let n = oracle.n();
    let pairs = pair_table(oracle, channel, clamp)?;
    let g = build_mixed_total_graph(oracle, channel, clamp, |i, j| {
        pairs[i][j]
            .as_ref()
            .filter(|p| p.feasible)
            .map(PairOptimum::sum_power)
    })?;
    let sol = match min_weight_smf(&g, budget) {
        Ok(s) => s,
        Err(Error::NoStrictMatchingForest) => return Err(Error::InfeasibleUnderPeakPower),
        Err(e) => return Err(e),
    };
    let mut rates = vec![0.0; n];
    for &idx in &sol.forest.selection.directed {
        let e = g.directed_edges()[idx];
        rates[e.head] = match e.tail {
            NodeRef::Starred(_) => oracle.marginal(e.head)?,
            NodeRef::Regular(j) => oracle.conditional(e.head, j)?,
        };
    }
    for &idx in &sol.forest.selection.undirected {
        let e = g.undirected_edges()[idx];
        let p = pairs[e.a][e.b].as_ref().expect("selected pair was built");
        rates[e.a] = p.rate_i;
        rates[e.b] = p.rate_j;
    }
    let powers = convert_powers(&rates, channel, clamp)?;
    Ok(PowerAssignment {
        rates: RateAssignment {
            method: Method::Smf,
            rates,
            witness: Some(Witness {
                graph: g,
                selection: sol.forest.selection,
            }),
        },
        powers,
        exact: sol.exact,
    })
}

/// Matching baseline on powers: pair nodes by their joint optimal sum
/// power, skipping pairs the cap rules out; a leftover node transmits its
/// marginal if that fits under the cap, otherwise the baseline has no
/// answer for this instance.
pub fn matching_allocation_noisy(
    oracle: &EntropyOracle,
    channel: &ChannelModel,
    clamp: RateClamp,
) -> Result<PowerAssignment> {
    let n = oracle.n();
    if n < 2 {
        return Err(Error::InvalidArgument("need at least two nodes".into()));
    }
    let pairs = pair_table(oracle, channel, clamp)?;
    let mut g = MixedGraph::new();
    for i in 0..n {
        g.add_regular(i);
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if let Some(p) = pairs[i][j].as_ref().filter(|p| p.feasible) {
                g.add_undirected(i, j, p.sum_power())?;
            }
        }
    }
    let single = |i: usize| {
        let h = oracle.marginal(i).expect("index in range");
        if channel.rate_fits(i, h) {
            channel.power(i, h, clamp)
        } else {
            f64::INFINITY
        }
    };
    let matching = match min_weight_matching(&g, Some(&single)) {
        Ok(m) => m,
        Err(Error::InfeasibleMatching) => return Err(Error::BaselineInfeasible),
        Err(e) => return Err(e),
    };
    let mut rates = vec![0.0; n];
    for &idx in &matching.selection.undirected {
        let e = g.undirected_edges()[idx];
        let p = pairs[e.a][e.b].as_ref().expect("selected pair was built");
        rates[e.a] = p.rate_i;
        rates[e.b] = p.rate_j;
    }
    for &i in &matching.singletons {
        rates[i] = oracle.marginal(i)?;
    }
    let powers = convert_powers(&rates, channel, clamp)?;
    Ok(PowerAssignment {
        rates: RateAssignment {
            method: Method::Matching,
            rates,
            witness: Some(Witness {
                graph: g,
                selection: matching.selection,
            }),
        },
        powers,
        exact: true,
    })
}

/// Joint-decoding optimum over the full admissible region; the floor of
/// what any pairwise scheme can reach. Refuses networks past
/// [`SW_ORACLE_NODE_CAP`].
pub fn sw_n_power_oracle(
    oracle: &EntropyOracle,
    channel: &ChannelModel,
    clamp: RateClamp,
) -> Result<PowerAssignment> {
    let rates = sw_oracle::solve_sw_program(oracle, channel, clamp)?;
    let powers = convert_powers(&rates, channel, clamp)?;
    Ok(PowerAssignment {
        rates: RateAssignment {
            method: Method::SwOracle,
            rates,
            witness: None,
        },
        powers,
        exact: true,
    })
}
