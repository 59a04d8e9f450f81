//! Decides whether a rate assignment lets the sink recover every source
//! through at-most-pairwise decoding steps, and extracts an executable
//! decode schedule witnessing the decision.
//!
//! The rate-only check asks for a chain to each node from some node coded
//! at its full marginal entropy. The power-aware check additionally allows
//! chains to start from a jointly decodable pair and requires every rate
//! to fit under the peak power cap.

use crate::error::{Error, Result};
use crate::graphs::{build_mixed_test_graph, build_test_graph, NodeRef};
use crate::model::{ChannelModel, EntropyOracle, RateClamp, RATE_TOL};
use serde::{Deserialize, Serialize};
use std::collections::VecDeque;

/// One decoding action at the sink.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum DecodeStep {
    /// Decode `node` alone; needs its rate to cover the marginal entropy.
    Solo { node: usize },
    /// Decode `a` and `b` together; needs the rate pair inside their
    /// two-node admissible region.
    Joint { a: usize, b: usize },
    /// Decode `node` using already-recovered `given`; needs the rate to
    /// cover the conditional entropy.
    Conditional { node: usize, given: usize },
}

/// Ordered decode steps; every node is decoded exactly once, and a joint
/// step decodes two nodes at a time.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecodeSchedule {
    pub steps: Vec<DecodeStep>,
}

impl DecodeSchedule {
    /// Number of nodes the schedule decodes (joint counts two).
    pub fn decoded_count(&self) -> usize {
        self.steps
            .iter()
            .map(|s| match s {
                DecodeStep::Joint { .. } => 2,
                _ => 1,
            })
            .sum()
    }
}

/// Checker verdict: a witnessing schedule, or the smallest failing node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Valid(DecodeSchedule),
    Invalid { node: usize },
}

impl Verdict {
    pub fn is_valid(&self) -> bool {
        matches!(self, Verdict::Valid(_))
    }

    pub fn schedule(&self) -> Option<&DecodeSchedule> {
        match self {
            Verdict::Valid(s) => Some(s),
            Verdict::Invalid { .. } => None,
        }
    }
}

/// Rate-only validity: every node must be reachable, in the assignment's
/// test graph, from a node coded at full marginal rate. The schedule is a
/// breadth-first forest grown from all such roots at once.
pub fn check_pairwise_valid(rates: &[f64], oracle: &EntropyOracle) -> Result<Verdict> {
    let n = oracle.n();
    if rates.len() != n {
        return Err(Error::InvalidArgument(format!(
            "rate vector has {} entries, expected {n}",
            rates.len()
        )));
    }
    let (g, parents) = build_test_graph(rates, oracle)?;
    let mut decoded = vec![false; n];
    let mut steps = Vec::new();
    let mut queue: VecDeque<usize> = VecDeque::new();
    for &p in &parents {
        decoded[p] = true;
        steps.push(DecodeStep::Solo { node: p });
        queue.push_back(p);
    }
    while let Some(j) = queue.pop_front() {
        for e in g.directed_edges() {
            if e.tail == NodeRef::Regular(j) && !decoded[e.head] {
                decoded[e.head] = true;
                steps.push(DecodeStep::Conditional {
                    node: e.head,
                    given: j,
                });
                queue.push_back(e.head);
            }
        }
    }
    match decoded.iter().position(|&d| !d) {
        None => Ok(Verdict::Valid(DecodeSchedule { steps })),
        Some(node) => Ok(Verdict::Invalid { node }),
    }
}

/// Power-aware validity: every rate must fit under the peak power cap, and
/// every node must be decodable starting from a solo- or jointly-decodable
/// seed, expanding along conditional-rate edges. The schedule interleaves
/// solo, joint, and conditional steps in a deterministic fixpoint order.
pub fn check_generalized_valid(
    rates: &[f64],
    oracle: &EntropyOracle,
    channel: &ChannelModel,
    clamp: RateClamp,
) -> Result<Verdict> {
    let n = oracle.n();
    if rates.len() != n {
        return Err(Error::InvalidArgument(format!(
            "rate vector has {} entries, expected {n}",
            rates.len()
        )));
    }
    if channel.n() != n {
        return Err(Error::InvalidArgument(
            "channel and oracle disagree on node count".into(),
        ));
    }
    for (i, &r) in rates.iter().enumerate() {
        if channel.power(i, r, clamp) > channel.peak_power() + RATE_TOL {
            return Ok(Verdict::Invalid { node: i });
        }
    }
    let g = build_mixed_test_graph(rates, oracle, channel, clamp, |_, _| None)?;
    let mut decoded = vec![false; n];
    let mut steps = Vec::new();
    loop {
        // Solo seeds first, then conditional expansion, then joint seeds,
        // each in canonical order; restart after every step so the
        // schedule is deterministic.
        let solo = g
            .starred_nodes()
            .find(|&i| g.contains(NodeRef::Regular(i)) && !decoded[i]);
        if let Some(i) = solo {
            decoded[i] = true;
            steps.push(DecodeStep::Solo { node: i });
            continue;
        }
        let cond = g
            .directed_edges()
            .iter()
            .find(|e| match e.tail {
                NodeRef::Regular(j) => decoded[j] && !decoded[e.head],
                NodeRef::Starred(_) => false,
            })
            .copied();
        if let Some(e) = cond {
            decoded[e.head] = true;
            steps.push(DecodeStep::Conditional {
                node: e.head,
                given: e.tail.index(),
            });
            continue;
        }
        let joint = g
            .undirected_edges()
            .iter()
            .find(|e| !decoded[e.a] && !decoded[e.b])
            .copied();
        if let Some(e) = joint {
            decoded[e.a] = true;
            decoded[e.b] = true;
            steps.push(DecodeStep::Joint { a: e.a, b: e.b });
            continue;
        }
        break;
    }
    match decoded.iter().position(|&d| !d) {
        None => Ok(Verdict::Valid(DecodeSchedule { steps })),
        Some(node) => Ok(Verdict::Invalid { node }),
    }
}

/// Replays a schedule, tracking which sources are recovered. Structural
/// defects (unknown nodes, double decodes, side information used before it
/// is decoded) are errors; a step whose information condition fails makes
/// the whole replay return false.
pub fn simulate_decode(
    schedule: &DecodeSchedule,
    rates: &[f64],
    oracle: &EntropyOracle,
) -> Result<bool> {
    let n = oracle.n();
    if rates.len() != n {
        return Err(Error::InvalidArgument(format!(
            "rate vector has {} entries, expected {n}",
            rates.len()
        )));
    }
    let mut decoded = vec![false; n];
    fn check_fresh(decoded: &mut [bool], i: usize) -> Result<()> {
        if i >= decoded.len() {
            return Err(Error::InvalidArgument(format!("unknown node {i}")));
        }
        if decoded[i] {
            return Err(Error::InvalidArgument(format!("node {i} decoded twice")));
        }
        decoded[i] = true;
        Ok(())
    }
    let mut ok = true;
    for step in &schedule.steps {
        match *step {
            DecodeStep::Solo { node } => {
                check_fresh(&mut decoded, node)?;
                ok &= rates[node] >= oracle.marginal(node)? - RATE_TOL;
            }
            DecodeStep::Joint { a, b } => {
                if a == b {
                    return Err(Error::InvalidArgument(format!(
                        "joint step needs two distinct nodes, got {a}"
                    )));
                }
                check_fresh(&mut decoded, a)?;
                check_fresh(&mut decoded, b)?;
                ok &= oracle.pairwise(a, b)?.contains(rates[a], rates[b]);
            }
            DecodeStep::Conditional { node, given } => {
                if given >= n {
                    return Err(Error::InvalidArgument(format!("unknown node {given}")));
                }
                if !decoded[given] {
                    return Err(Error::InvalidArgument(format!(
                        "node {node} conditioned on {given} before it is decoded"
                    )));
                }
                check_fresh(&mut decoded, node)?;
                ok &= rates[node] >= oracle.conditional(node, given)? - RATE_TOL;
            }
        }
    }
    Ok(ok && decoded.iter().all(|&d| d))
}
