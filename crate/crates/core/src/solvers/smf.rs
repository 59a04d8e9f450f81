//! Minimum-weight strict matching forest via a rooted-arborescence
//! relaxation with best-first branch and bound on pair seeds.
//!
//! Counting heads against tree edges pins the shape of every strict
//! matching forest: a component with q regular nodes, s starred nodes, d
//! directed and u undirected edges satisfies d + 2u = q (each regular
//! node is head exactly once) and d + u = q + s - 1 (spanning tree), so
//! s + u = 1. Every component therefore contains exactly one seed, a
//! starred node or a single undirected edge, with everything else
//! directed away from it. That makes a strict forest an arborescence in
//! a super-rooted digraph: the root offers every starred edge, and each
//! undirected edge {a, b} becomes two "refund" edges, a => b priced
//! w{a,b} minus a's designated (cheapest) star, so that the designated
//! star plus the refund together cost exactly w{a,b}. Nodes with no
//! starred edge get a bookkeeping star priced at their cheapest
//! undirected weight so the encoding stays available.
//!
//! The arborescence minimum is a lower bound on every strict forest and
//! is realized exactly when each chosen refund sits on its tail's star,
//! no two refunds share a node, and no bookkeeping star is left without
//! its refund. Violations are resolved by branching on the undirected
//! edge involved: one child bans it, the other commits it and pins both
//! endpoint covers. Regions are explored best-first by bound, so the
//! first consistent region popped is optimal: its bound equals the
//! weight of the forest it decodes to, and every open region bounds
//! below by at least as much.

use crate::error::{Error, Result};
use crate::graphs::{MixedGraph, NodeRef, SubgraphSelection};
use crate::solvers::arborescence::{contract_solve, WorkEdge};
use std::collections::{BinaryHeap, HashMap};
use std::time::{Duration, Instant};

/// A matching forest: head count at most one everywhere, acyclic after
/// erasing orientations; `strict` when every regular node is covered.
#[derive(Debug, Clone)]
pub struct MatchingForest {
    pub selection: SubgraphSelection,
    /// Canonical weight: edge weights summed in parent-graph index order.
    pub weight: f64,
    pub strict: bool,
}

/// Solver outcome. The best-first search only completes at an optimum,
/// so a returned forest is always exact; the flag is kept for callers
/// that record it.
#[derive(Debug, Clone)]
pub struct SmfSolution {
    pub forest: MatchingForest,
    pub exact: bool,
}

/// Where a relaxation edge comes from.
#[derive(Debug, Clone, Copy)]
enum Origin {
    /// Directed edge with a starred tail, by parent edge id. `None` is
    /// the bookkeeping stand-in for nodes without one.
    Star(Option<usize>),
    /// Directed edge with a regular tail, by parent edge id.
    Cross(usize),
    /// Undirected edge encoded with `tail` paying its designated star.
    Refund { und: usize, tail: usize },
}

/// Relaxation edge over dense node ids; the super root is id `r`.
#[derive(Debug, Clone, Copy)]
struct RelaxEdge {
    tail: usize,
    head: usize,
    weight: f64,
    origin: Origin,
}

/// One open search region: the undirected edges decided so far and the
/// relaxation optimum under those decisions. Orders as a min-heap entry
/// by (bound, insertion order).
struct Region {
    bound: f64,
    seq: u64,
    decided: Vec<(usize, bool)>,
    chosen: Vec<usize>,
}

impl PartialEq for Region {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == std::cmp::Ordering::Equal
    }
}

impl Eq for Region {}

impl PartialOrd for Region {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Region {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        other
            .bound
            .total_cmp(&self.bound)
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

struct Reducer {
    r: usize,
    edges: Vec<RelaxEdge>,
    /// Dense endpoints of each undirected edge, lower id first.
    und_ends: Vec<(usize, usize)>,
}

impl Reducer {
    fn new(g: &MixedGraph, regular: &[usize]) -> Self {
        let r = regular.len();
        let dense: HashMap<usize, usize> =
            regular.iter().enumerate().map(|(k, &v)| (v, k)).collect();

        let mut edges: Vec<RelaxEdge> = Vec::new();
        let mut designated = vec![usize::MAX; r];
        for (idx, e) in g.directed_edges().iter().enumerate() {
            if let NodeRef::Starred(_) = e.tail {
                let h = dense[&e.head];
                let id = edges.len();
                edges.push(RelaxEdge {
                    tail: r,
                    head: h,
                    weight: e.weight,
                    origin: Origin::Star(Some(idx)),
                });
                if designated[h] == usize::MAX || e.weight < edges[designated[h]].weight {
                    designated[h] = id;
                }
            }
        }
        let mut cheapest_und = vec![f64::INFINITY; r];
        for e in g.undirected_edges() {
            let (a, b) = (dense[&e.a], dense[&e.b]);
            cheapest_und[a] = cheapest_und[a].min(e.weight);
            cheapest_und[b] = cheapest_und[b].min(e.weight);
        }
        for v in 0..r {
            if designated[v] == usize::MAX && cheapest_und[v].is_finite() {
                designated[v] = edges.len();
                edges.push(RelaxEdge {
                    tail: r,
                    head: v,
                    weight: cheapest_und[v],
                    origin: Origin::Star(None),
                });
            }
        }
        for (idx, e) in g.directed_edges().iter().enumerate() {
            if let NodeRef::Regular(t) = e.tail {
                edges.push(RelaxEdge {
                    tail: dense[&t],
                    head: dense[&e.head],
                    weight: e.weight,
                    origin: Origin::Cross(idx),
                });
            }
        }
        let mut und_ends = Vec::with_capacity(g.undirected_edges().len());
        for (idx, e) in g.undirected_edges().iter().enumerate() {
            let (a, b) = (dense[&e.a], dense[&e.b]);
            let (lo, hi) = (a.min(b), a.max(b));
            und_ends.push((lo, hi));
            for (t, h) in [(lo, hi), (hi, lo)] {
                edges.push(RelaxEdge {
                    tail: t,
                    head: h,
                    weight: e.weight - edges[designated[t]].weight,
                    origin: Origin::Refund { und: idx, tail: t },
                });
            }
        }
        Reducer { r, edges, und_ends }
    }

    /// Which relaxation edges survive the region's decisions: banned
    /// edges lose their refunds; a committed edge pins its lower
    /// endpoint to stars and its upper endpoint to the one canonical
    /// refund, and cuts both endpoints' other covers. Bookkeeping stars
    /// only stay while some refund out of their node survives.
    fn enabled_set(&self, decided: &[(usize, bool)]) -> Vec<bool> {
        let mut banned = vec![false; self.und_ends.len()];
        // Committed undirected edge at each endpoint, refund-head flag.
        let mut pin: Vec<Option<(usize, bool)>> = vec![None; self.r];
        for &(e, keep) in decided {
            if !keep {
                banned[e] = true;
                continue;
            }
            let (lo, hi) = self.und_ends[e];
            pin[lo] = Some((e, false));
            pin[hi] = Some((e, true));
        }
        let mut enabled = vec![false; self.edges.len()];
        for (i, re) in self.edges.iter().enumerate() {
            enabled[i] = match re.origin {
                Origin::Star(_) => !matches!(pin[re.head], Some((_, true))),
                Origin::Cross(_) => pin[re.head].is_none(),
                Origin::Refund { und, tail } => {
                    !banned[und]
                        && match (pin[tail], pin[re.head]) {
                            (None, None) => true,
                            (Some((e1, false)), Some((e2, true))) => e1 == und && e2 == und,
                            _ => false,
                        }
                }
            };
        }
        let mut has_refund = vec![false; self.r];
        for (i, re) in self.edges.iter().enumerate() {
            if enabled[i] {
                if let Origin::Refund { tail, .. } = re.origin {
                    has_refund[tail] = true;
                }
            }
        }
        for (i, re) in self.edges.iter().enumerate() {
            if let Origin::Star(None) = re.origin {
                enabled[i] = enabled[i] && has_refund[re.head];
            }
        }
        enabled
    }

    /// Relaxation optimum under the region's decisions, or None when no
    /// arborescence (hence no strict forest) remains.
    fn eval(&self, decided: &[(usize, bool)]) -> Option<(f64, Vec<usize>)> {
        let enabled = self.enabled_set(decided);
        let mut adj: Vec<Vec<usize>> = vec![Vec::new(); self.r + 1];
        for (i, re) in self.edges.iter().enumerate() {
            if enabled[i] {
                adj[re.tail].push(re.head);
            }
        }
        let mut seen = vec![false; self.r + 1];
        seen[self.r] = true;
        let mut queue = vec![self.r];
        while let Some(u) = queue.pop() {
            for &v in &adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    queue.push(v);
                }
            }
        }
        if seen.iter().any(|s| !s) {
            return None;
        }

        let work: Vec<WorkEdge> = self
            .edges
            .iter()
            .enumerate()
            .filter(|(i, _)| enabled[*i])
            .map(|(i, re)| WorkEdge {
                tail: re.tail,
                head: re.head,
                weight: re.weight,
                orig: i,
            })
            .collect();
        let mut chosen = contract_solve(self.r + 1, self.r, work);
        chosen.sort_unstable();
        let bound = chosen.iter().map(|&i| self.edges[i].weight).sum();
        Some((bound, chosen))
    }

    /// First inconsistency of a relaxed solution, as the undirected edge
    /// to branch on; None means the solution decodes to a strict forest
    /// of the same weight.
    fn violation(&self, enabled: &[bool], chosen: &[usize]) -> Option<usize> {
        let mut star_covered = vec![false; self.r];
        for &i in chosen {
            if let Origin::Star(_) = self.edges[i].origin {
                star_covered[self.edges[i].head] = true;
            }
        }
        let mut tail_used = vec![false; self.r];
        for &i in chosen {
            if let Origin::Refund { und, tail } = self.edges[i].origin {
                if !star_covered[tail] || tail_used[tail] {
                    return Some(und);
                }
                tail_used[tail] = true;
            }
        }
        for &i in chosen {
            if let Origin::Star(None) = self.edges[i].origin {
                let v = self.edges[i].head;
                if !tail_used[v] {
                    // A bookkeeping star is not a real cover; force the
                    // node's first surviving pair option to a decision.
                    return self.edges.iter().enumerate().find_map(|(j, re)| {
                        match re.origin {
                            Origin::Refund { und, tail } if tail == v && enabled[j] => Some(und),
                            _ => None,
                        }
                    });
                }
            }
        }
        None
    }

    /// Consistent relaxed solution to forest edges: refunds become their
    /// undirected edge and absorb their tail's star, everything else
    /// maps straight through.
    fn decode(&self, chosen: &[usize]) -> SubgraphSelection {
        let mut tail_used = vec![false; self.r];
        let mut und = Vec::new();
        for &i in chosen {
            if let Origin::Refund { und: e, tail } = self.edges[i].origin {
                tail_used[tail] = true;
                und.push(e);
            }
        }
        let mut dir = Vec::new();
        for &i in chosen {
            match self.edges[i].origin {
                Origin::Star(Some(orig)) if !tail_used[self.edges[i].head] => dir.push(orig),
                Origin::Cross(orig) => dir.push(orig),
                _ => {}
            }
        }
        SubgraphSelection::new(dir, und)
    }
}

/// Exact minimum-weight strict matching forest of `g`, with an optional
/// wall-clock budget. The search is best-first, so any completed run is
/// exact; expiring before completion is a budget error.
pub fn min_weight_smf(g: &MixedGraph, budget: Option<Duration>) -> Result<SmfSolution> {
    let deadline = budget.map(|b| Instant::now() + b);
    let regular: Vec<usize> = g.regular_nodes().collect();
    if regular.is_empty() {
        return Ok(SmfSolution {
            forest: MatchingForest {
                selection: SubgraphSelection::default(),
                weight: 0.0,
                strict: true,
            },
            exact: true,
        });
    }

    let red = Reducer::new(g, &regular);
    let mut heap: BinaryHeap<Region> = BinaryHeap::new();
    let mut seq = 0u64;
    if let Some((bound, chosen)) = red.eval(&[]) {
        heap.push(Region {
            bound,
            seq,
            decided: Vec::new(),
            chosen,
        });
    }
    while let Some(region) = heap.pop() {
        if let Some(d) = deadline {
            if Instant::now() >= d {
                return Err(Error::BudgetExceeded);
            }
        }
        let enabled = red.enabled_set(&region.decided);
        match red.violation(&enabled, &region.chosen) {
            None => {
                let selection = red.decode(&region.chosen);
                let weight = selection.weight(g);
                for i in g.regular_nodes() {
                    assert_eq!(
                        selection.head_count(g, NodeRef::Regular(i)),
                        1,
                        "solver produced a non-strict cover"
                    );
                }
                assert!(
                    selection.uug_is_acyclic(g),
                    "solver produced a cyclic selection"
                );
                return Ok(SmfSolution {
                    forest: MatchingForest {
                        selection,
                        weight,
                        strict: true,
                    },
                    exact: true,
                });
            }
            Some(e) => {
                debug_assert!(region.decided.iter().all(|&(d, _)| d != e));
                for keep in [false, true] {
                    let mut decided = region.decided.clone();
                    decided.push((e, keep));
                    if let Some((bound, chosen)) = red.eval(&decided) {
                        seq += 1;
                        heap.push(Region {
                            bound,
                            seq,
                            decided,
                            chosen,
                        });
                    }
                }
            }
        }
    }
    Err(Error::NoStrictMatchingForest)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solvers::enumerate::{brute_force_enumerate, EnumerationKind};
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn starred_only_cover() {
        let mut g = MixedGraph::new();
        for i in 0..4 {
            g.add_directed(NodeRef::Starred(i), i, 1.0 + i as f64).unwrap();
        }
        let s = min_weight_smf(&g, None).unwrap();
        assert!(s.exact);
        assert_eq!(s.forest.selection.directed.len(), 4);
        assert!((s.forest.weight - 10.0).abs() < 1e-12);
    }

    #[test]
    fn undirected_pair_beats_two_stars() {
        let mut g = MixedGraph::new();
        g.add_directed(NodeRef::Starred(0), 0, 3.0).unwrap();
        g.add_directed(NodeRef::Starred(1), 1, 3.0).unwrap();
        g.add_undirected(0, 1, 5.0).unwrap();
        let s = min_weight_smf(&g, None).unwrap();
        assert_eq!(s.forest.selection.undirected, vec![0]);
        assert!(s.forest.selection.directed.is_empty());
        assert!((s.forest.weight - 5.0).abs() < 1e-12);
    }

    #[test]
    fn chain_cover_with_one_root() {
        // Only node 0 has a starred edge; others must chain behind it.
        let mut g = MixedGraph::new();
        g.add_directed(NodeRef::Starred(0), 0, 2.0).unwrap();
        g.add_directed(NodeRef::Regular(0), 1, 0.5).unwrap();
        g.add_directed(NodeRef::Regular(1), 2, 0.25).unwrap();
        let s = min_weight_smf(&g, None).unwrap();
        assert!((s.forest.weight - 2.75).abs() < 1e-12);
    }

    #[test]
    fn no_cover_reported() {
        let mut g = MixedGraph::new();
        g.add_directed(NodeRef::Starred(0), 0, 1.0).unwrap();
        g.add_regular(5);
        assert!(matches!(
            min_weight_smf(&g, None),
            Err(Error::NoStrictMatchingForest)
        ));
    }

    #[test]
    fn directed_two_cycle_is_rejected_by_acyclicity() {
        // 0 -> 1 and 1 -> 0 would cover both nodes but close a UUG cycle;
        // the stars must win despite being dearer.
        let mut g = MixedGraph::new();
        g.add_directed(NodeRef::Regular(0), 1, 0.1).unwrap();
        g.add_directed(NodeRef::Regular(1), 0, 0.1).unwrap();
        g.add_directed(NodeRef::Starred(0), 0, 1.0).unwrap();
        g.add_directed(NodeRef::Starred(1), 1, 1.0).unwrap();
        let s = min_weight_smf(&g, None).unwrap();
        // Either one star plus one cross edge (1.1), never 0.2.
        assert!((s.forest.weight - 1.1).abs() < 1e-12);
    }

    #[test]
    fn matches_enumeration_on_random_mixed_graphs() {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5F3E);
        for trial in 0..200 {
            let n = rng.gen_range(2..=6);
            let mut g = MixedGraph::new();
            for i in 0..n {
                g.add_regular(i);
                if rng.gen::<f64>() < 0.7 {
                    g.add_directed(NodeRef::Starred(i), i, rng.gen::<f64>() * 10.0)
                        .unwrap();
                }
            }
            for a in 0..n {
                for b in 0..n {
                    if a != b && rng.gen::<f64>() < 0.4 {
                        g.add_directed(NodeRef::Regular(a), b, rng.gen::<f64>() * 10.0)
                            .unwrap();
                    }
                }
            }
            for a in 0..n {
                for b in (a + 1)..n {
                    if rng.gen::<f64>() < 0.4 {
                        g.add_undirected(a, b, rng.gen::<f64>() * 10.0).unwrap();
                    }
                }
            }
            let oracle =
                brute_force_enumerate(&g, EnumerationKind::StrictMatchingForest).unwrap();
            match min_weight_smf(&g, None) {
                Ok(s) => {
                    assert!(s.exact);
                    assert!(!oracle.is_empty(), "trial {trial}: oracle found nothing");
                    assert_eq!(
                        s.forest.weight.to_bits(),
                        oracle[0].weight.to_bits(),
                        "trial {trial}: weight mismatch"
                    );
                }
                Err(Error::NoStrictMatchingForest) => {
                    assert!(oracle.is_empty(), "trial {trial}: oracle disagrees");
                }
                Err(e) => panic!("trial {trial}: unexpected error {e}"),
            }
        }
    }

    #[test]
    fn zero_budget_times_out_or_errors() {
        let mut g = MixedGraph::new();
        for i in 0..8 {
            g.add_directed(NodeRef::Starred(i), i, 1.0).unwrap();
            for j in 0..8 {
                if i != j {
                    g.add_directed(NodeRef::Regular(i), j, 0.9).unwrap();
                }
            }
        }
        match min_weight_smf(&g, Some(Duration::from_secs(0))) {
            Ok(s) => assert!(!s.exact),
            Err(Error::BudgetExceeded) => {}
            Err(e) => panic!("unexpected error {e}"),
        }
    }
}
