//! Mixed graphs (directed plus undirected edges) and the graph
//! constructions the allocation pipeline runs on: total graphs over all
//! node pairs, per-assignment test graphs, rooted variants, and the weight
//! transformation that turns strict-cover minimization into matching-forest
//! maximization.
//!
//! Every graph has `n` regular nodes (sensor indices) and up to `n` starred
//! companions. The starred node `i*` carries the single edge `(i* -> i)`
//! whose weight is the cost of node `i` transmitting at full marginal rate.
//! Starred nodes are never heads of any edge and never touch undirected
//! edges; both facts are enforced by construction here.

use crate::error::{Error, Result};
use crate::model::{ChannelModel, EntropyOracle, RateClamp, RATE_TOL};
use std::collections::BTreeSet;
use std::fmt;

/// A node handle: either a regular sensor node or its starred companion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum NodeRef {
    Regular(usize),
    Starred(usize),
}

impl NodeRef {
    pub fn index(self) -> usize {
        match self {
            NodeRef::Regular(i) | NodeRef::Starred(i) => i,
        }
    }

    pub fn is_starred(self) -> bool {
        matches!(self, NodeRef::Starred(_))
    }
}

impl fmt::Display for NodeRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NodeRef::Regular(i) => write!(f, "{i}"),
            NodeRef::Starred(i) => write!(f, "{i}*"),
        }
    }
}

/// Directed edge; heads are always regular nodes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DirectedEdge {
    pub tail: NodeRef,
    pub head: usize,
    pub weight: f64,
}

/// Undirected edge between two regular nodes, stored with `a < b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UndirectedEdge {
    pub a: usize,
    pub b: usize,
    pub weight: f64,
}

/// A graph with both directed and undirected weighted edges.
///
/// Edge vectors stay sorted by endpoints (directed by `(tail, head)`,
/// undirected by `(a, b)`), so edge indices are canonical: two graphs built
/// from the same edges in any insertion order are identical, and weight
/// sums taken in index order are reproducible bit for bit.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct MixedGraph {
    regular: BTreeSet<usize>,
    starred: BTreeSet<usize>,
    directed: Vec<DirectedEdge>,
    undirected: Vec<UndirectedEdge>,
}

impl MixedGraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_regular(&mut self, i: usize) {
        self.regular.insert(i);
    }

    pub fn add_starred(&mut self, i: usize) {
        self.starred.insert(i);
    }

    pub fn contains(&self, node: NodeRef) -> bool {
        match node {
            NodeRef::Regular(i) => self.regular.contains(&i),
            NodeRef::Starred(i) => self.starred.contains(&i),
        }
    }

    /// Inserts a directed edge; endpoints are added to the node set. At
    /// most one directed edge may exist per ordered pair.
    pub fn add_directed(&mut self, tail: NodeRef, head: usize, weight: f64) -> Result<()> {
        if !weight.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "edge weight must be finite, got {weight}"
            )));
        }
        if tail == NodeRef::Regular(head) {
            return Err(Error::InvalidArgument(format!("self-loop at node {head}")));
        }
        let pos = self
            .directed
            .binary_search_by(|e| (e.tail, e.head).cmp(&(tail, head)));
        match pos {
            Ok(_) => Err(Error::InvalidArgument(format!(
                "duplicate directed edge ({tail} -> {head})"
            ))),
            Err(idx) => {
                match tail {
                    NodeRef::Regular(i) => self.add_regular(i),
                    NodeRef::Starred(i) => self.add_starred(i),
                }
                self.add_regular(head);
                self.directed.insert(idx, DirectedEdge { tail, head, weight });
                Ok(())
            }
        }
    }

    /// Inserts an undirected edge between two regular nodes.
    pub fn add_undirected(&mut self, a: usize, b: usize, weight: f64) -> Result<()> {
        if !weight.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "edge weight must be finite, got {weight}"
            )));
        }
        if a == b {
            return Err(Error::InvalidArgument(format!("self-loop at node {a}")));
        }
        let (a, b) = if a < b { (a, b) } else { (b, a) };
        let pos = self
            .undirected
            .binary_search_by(|e| (e.a, e.b).cmp(&(a, b)));
        match pos {
            Ok(_) => Err(Error::InvalidArgument(format!(
                "duplicate undirected edge ({a}, {b})"
            ))),
            Err(idx) => {
                self.add_regular(a);
                self.add_regular(b);
                self.undirected.insert(idx, UndirectedEdge { a, b, weight });
                Ok(())
            }
        }
    }

    pub fn regular_nodes(&self) -> impl Iterator<Item = usize> + '_ {
        self.regular.iter().copied()
    }

    pub fn starred_nodes(&self) -> impl Iterator<Item = usize> + '_ {
        self.starred.iter().copied()
    }

    pub fn regular_count(&self) -> usize {
        self.regular.len()
    }

    pub fn node_count(&self) -> usize {
        self.regular.len() + self.starred.len()
    }

    pub fn directed_edges(&self) -> &[DirectedEdge] {
        &self.directed
    }

    pub fn undirected_edges(&self) -> &[UndirectedEdge] {
        &self.undirected
    }

    pub fn is_pure_digraph(&self) -> bool {
        self.undirected.is_empty()
    }

    /// Number of edges of which `node` is a head: incoming directed edges,
    /// plus incident undirected edges for regular nodes.
    pub fn head_count(&self, node: NodeRef) -> Result<usize> {
        if !self.contains(node) {
            return Err(Error::InvalidArgument(format!("unknown node {node}")));
        }
        match node {
            NodeRef::Starred(_) => Ok(0),
            NodeRef::Regular(i) => {
                let directed = self.directed.iter().filter(|e| e.head == i).count();
                let undirected = self
                    .undirected
                    .iter()
                    .filter(|e| e.a == i || e.b == i)
                    .count();
                Ok(directed + undirected)
            }
        }
    }

    /// The orientation-erased multigraph: every edge becomes an undirected
    /// endpoint pair, and a directed edge parallel to an undirected one
    /// yields two parallel edges (hence a cycle).
    pub fn underlying_undirected(&self) -> Vec<(NodeRef, NodeRef)> {
        let mut edges: Vec<(NodeRef, NodeRef)> = Vec::new();
        for e in &self.directed {
            let u = e.tail.min(NodeRef::Regular(e.head));
            let v = e.tail.max(NodeRef::Regular(e.head));
            edges.push((u, v));
        }
        for e in &self.undirected {
            edges.push((NodeRef::Regular(e.a), NodeRef::Regular(e.b)));
        }
        edges
    }

    /// Drops every node that participates in no edge.
    pub fn remove_isolated(&mut self) {
        let mut used: BTreeSet<NodeRef> = BTreeSet::new();
        for e in &self.directed {
            used.insert(e.tail);
            used.insert(NodeRef::Regular(e.head));
        }
        for e in &self.undirected {
            used.insert(NodeRef::Regular(e.a));
            used.insert(NodeRef::Regular(e.b));
        }
        self.regular.retain(|&i| used.contains(&NodeRef::Regular(i)));
        self.starred.retain(|&i| used.contains(&NodeRef::Starred(i)));
    }

    /// Keeps only the starred node `root*` (dropping the other starred
    /// nodes and their edges), yielding the graph whose covers are rooted
    /// at `root*`.
    pub fn rooted_variant(&self, root: usize) -> Result<MixedGraph> {
        if !self.starred.contains(&root) {
            return Err(Error::InvalidArgument(format!(
                "no starred node {root}* in graph"
            )));
        }
        let mut g = self.clone();
        g.starred.retain(|&i| i == root);
        g.directed
            .retain(|e| !e.tail.is_starred() || e.tail.index() == root);
        Ok(g)
    }

    /// Columnar JSON edge list; tails and heads are node labels (`"3"` for
    /// regular, `"3*"` for starred), kinds are `"directed"`/`"undirected"`.
    pub fn to_json(&self) -> serde_json::Value {
        let mut tails = Vec::new();
        let mut heads = Vec::new();
        let mut weights = Vec::new();
        let mut kinds = Vec::new();
        for e in &self.directed {
            tails.push(e.tail.to_string());
            heads.push(NodeRef::Regular(e.head).to_string());
            weights.push(e.weight);
            kinds.push("directed");
        }
        for e in &self.undirected {
            tails.push(NodeRef::Regular(e.a).to_string());
            heads.push(NodeRef::Regular(e.b).to_string());
            weights.push(e.weight);
            kinds.push("undirected");
        }
        serde_json::json!({
            "regular": self.regular.iter().collect::<Vec<_>>(),
            "starred": self.starred.iter().collect::<Vec<_>>(),
            "tails": tails,
            "heads": heads,
            "weights": weights,
            "kinds": kinds,
        })
    }

    /// Graphviz rendering. If `selection` is given its edges are drawn
    /// solid and the rest dotted; `coords` pins regular nodes to plane
    /// positions.
    pub fn to_dot(
        &self,
        name: &str,
        selection: Option<&SubgraphSelection>,
        coords: Option<&[[f64; 2]]>,
    ) -> String {
        use std::fmt::Write as _;
        let mut out = String::new();
        let _ = writeln!(out, "digraph \"{name}\" {{");
        let _ = writeln!(out, "  node [shape=circle];");
        for &i in &self.regular {
            let pos = coords
                .and_then(|c| c.get(i))
                .map(|p| format!(", pos=\"{:.4},{:.4}!\"", p[0], p[1]))
                .unwrap_or_default();
            let _ = writeln!(out, "  \"{i}\" [label=\"{i}\"{pos}];");
        }
        for &i in &self.starred {
            let _ = writeln!(out, "  \"{i}*\" [label=\"{i}*\", shape=doublecircle];");
        }
        let in_sel = |kind: usize, idx: usize| -> bool {
            selection.map_or(true, |s| match kind {
                0 => s.directed.contains(&idx),
                _ => s.undirected.contains(&idx),
            })
        };
        for (idx, e) in self.directed.iter().enumerate() {
            let style = if in_sel(0, idx) { "solid" } else { "dotted" };
            let _ = writeln!(
                out,
                "  \"{}\" -> \"{}\" [label=\"{:.4}\", style={style}];",
                e.tail, e.head, e.weight
            );
        }
        for (idx, e) in self.undirected.iter().enumerate() {
            let style = if in_sel(1, idx) { "solid" } else { "dotted" };
            let _ = writeln!(
                out,
                "  \"{}\" -> \"{}\" [label=\"{:.4}\", dir=none, style={style}];",
                e.a, e.b, e.weight
            );
        }
        out.push_str("}\n");
        out
    }
}

/// A chosen edge subset of a parent graph, stored as indices into the
/// parent's canonical edge vectors. The derived ordering (directed list,
/// then undirected list, lexicographic) is the tie-break order solvers use
/// between equal-weight subgraphs.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Default)]
pub struct SubgraphSelection {
    pub directed: Vec<usize>,
    pub undirected: Vec<usize>,
}

impl SubgraphSelection {
    pub fn new(mut directed: Vec<usize>, mut undirected: Vec<usize>) -> Self {
        directed.sort_unstable();
        undirected.sort_unstable();
        SubgraphSelection {
            directed,
            undirected,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.directed.is_empty() && self.undirected.is_empty()
    }

    pub fn edge_count(&self) -> usize {
        self.directed.len() + self.undirected.len()
    }

    pub fn validate(&self, parent: &MixedGraph) -> Result<()> {
        if self.directed.windows(2).any(|w| w[0] >= w[1])
            || self.undirected.windows(2).any(|w| w[0] >= w[1])
        {
            return Err(Error::InvalidArgument(
                "selection indices must be strictly increasing".into(),
            ));
        }
        if self.directed.iter().any(|&i| i >= parent.directed.len())
            || self.undirected.iter().any(|&i| i >= parent.undirected.len())
        {
            return Err(Error::InvalidArgument(
                "selection index out of range for parent graph".into(),
            ));
        }
        Ok(())
    }

    /// Total weight, summed in canonical index order (directed first).
    /// Every solver and enumerator reports weights through this sum, so
    /// equal edge sets give bitwise-equal totals.
    pub fn weight(&self, parent: &MixedGraph) -> f64 {
        let mut acc = 0.0;
        for &i in &self.directed {
            acc += parent.directed[i].weight;
        }
        for &i in &self.undirected {
            acc += parent.undirected[i].weight;
        }
        acc
    }

    /// Head count of `node` within the selected subgraph.
    pub fn head_count(&self, parent: &MixedGraph, node: NodeRef) -> usize {
        match node {
            NodeRef::Starred(_) => 0,
            NodeRef::Regular(i) => {
                let d = self
                    .directed
                    .iter()
                    .filter(|&&e| parent.directed[e].head == i)
                    .count();
                let u = self
                    .undirected
                    .iter()
                    .filter(|&&e| {
                        let ed = parent.undirected[e];
                        ed.a == i || ed.b == i
                    })
                    .count();
                d + u
            }
        }
    }

    /// Whether the orientation-erased selected subgraph is acyclic.
    /// Parallel selected edges over the same endpoints count as a cycle.
    pub fn uug_is_acyclic(&self, parent: &MixedGraph) -> bool {
        let mut dsu = DisjointSet::new();
        for &i in &self.directed {
            let e = parent.directed[i];
            if !dsu.union(e.tail, NodeRef::Regular(e.head)) {
                return false;
            }
        }
        for &i in &self.undirected {
            let e = parent.undirected[i];
            if !dsu.union(NodeRef::Regular(e.a), NodeRef::Regular(e.b)) {
                return false;
            }
        }
        true
    }

    /// Human-oriented edge labels, canonical order.
    pub fn edge_labels(&self, parent: &MixedGraph) -> Vec<String> {
        let mut out = Vec::with_capacity(self.edge_count());
        for &i in &self.directed {
            let e = parent.directed[i];
            out.push(format!("{} -> {}", e.tail, e.head));
        }
        for &i in &self.undirected {
            let e = parent.undirected[i];
            out.push(format!("{} -- {}", e.a, e.b));
        }
        out
    }
}

/// Union-find keyed by node handles; `union` returns false when both ends
/// already share a component (i.e. adding the edge closes a cycle).
struct DisjointSet {
    ids: Vec<NodeRef>,
    parent: Vec<usize>,
}

impl DisjointSet {
    fn new() -> Self {
        DisjointSet {
            ids: Vec::new(),
            parent: Vec::new(),
        }
    }

    fn intern(&mut self, node: NodeRef) -> usize {
        match self.ids.iter().position(|&x| x == node) {
            Some(i) => i,
            None => {
                self.ids.push(node);
                self.parent.push(self.parent.len());
                self.parent.len() - 1
            }
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: NodeRef, b: NodeRef) -> bool {
        let (a, b) = (self.intern(a), self.intern(b));
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.parent[ra] = rb;
        true
    }
}

/// Total digraph for the rate-only setting: starred edges `(i* -> i)` at
/// the marginal entropy, cross edges `(i -> j)` at the conditional entropy
/// of the head given the tail, over all ordered pairs.
pub fn build_total_digraph(oracle: &EntropyOracle) -> Result<MixedGraph> {
    let n = oracle.n();
    if n < 2 {
        return Err(Error::InvalidArgument("need at least two nodes".into()));
    }
    let mut g = MixedGraph::new();
    for i in 0..n {
        g.add_directed(NodeRef::Starred(i), i, oracle.marginal(i)?)?;
        for j in 0..n {
            if i != j {
                g.add_directed(NodeRef::Regular(i), j, oracle.conditional(j, i)?)?;
            }
        }
    }
    Ok(g)
}

/// Test graph for a rate vector: starred edge iff the node's rate covers
/// its marginal entropy, cross edge `(j -> i)` iff it covers the
/// conditional entropy given the tail; isolated nodes dropped. Also
/// returns the parent set: regular indices whose starred edge is present.
pub fn build_test_graph(
    rates: &[f64],
    oracle: &EntropyOracle,
) -> Result<(MixedGraph, Vec<usize>)> {
    let n = oracle.n();
    if rates.len() != n {
        return Err(Error::InvalidArgument(format!(
            "rate vector has {} entries, expected {n}",
            rates.len()
        )));
    }
    let mut g = MixedGraph::new();
    for i in 0..n {
        g.add_regular(i);
        let h_i = oracle.marginal(i)?;
        if rates[i] >= h_i - RATE_TOL {
            g.add_directed(NodeRef::Starred(i), i, h_i)?;
        }
        for j in 0..n {
            if j == i {
                continue;
            }
            let h_cond = oracle.conditional(i, j)?;
            if rates[i] >= h_cond - RATE_TOL {
                g.add_directed(NodeRef::Regular(j), i, h_cond)?;
            }
        }
    }
    g.remove_isolated();
    let parents = g
        .starred_nodes()
        .filter(|&i| g.contains(NodeRef::Regular(i)))
        .collect();
    Ok((g, parents))
}

/// Total mixed graph for the power setting. Starred and cross edges charge
/// the power for the corresponding entropy rate and are pruned when that
/// power exceeds the peak cap; undirected edges carry the two-node optimal
/// sum power reported by `pair_cost` (`None` marks an infeasible pair).
pub fn build_mixed_total_graph<F>(
    oracle: &EntropyOracle,
    channel: &ChannelModel,
    clamp: RateClamp,
    pair_cost: F,
) -> Result<MixedGraph>
where
    F: Fn(usize, usize) -> Option<f64>,
{
    let n = oracle.n();
    if n < 2 {
        return Err(Error::InvalidArgument("need at least two nodes".into()));
    }
    if channel.n() != n {
        return Err(Error::InvalidArgument(
            "channel and oracle disagree on node count".into(),
        ));
    }
    let p_max = channel.peak_power();
    let mut g = MixedGraph::new();
    for i in 0..n {
        g.add_regular(i);
        let w = channel.power(i, oracle.marginal(i)?, clamp);
        if w <= p_max + RATE_TOL {
            g.add_directed(NodeRef::Starred(i), i, w)?;
        }
        for j in 0..n {
            if j == i {
                continue;
            }
            let w = channel.power(i, oracle.conditional(i, j)?, clamp);
            if w <= p_max + RATE_TOL {
                g.add_directed(NodeRef::Regular(j), i, w)?;
            }
        }
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if let Some(sum_power) = pair_cost(i, j) {
                g.add_undirected(i, j, sum_power)?;
            }
        }
    }
    Ok(g)
}

/// Test graph for a rate vector in the power setting: directed edges under
/// the same rate thresholds as the noiseless test graph but weighted in
/// power, undirected edge iff the pair of rates is jointly decodable.
/// Undirected weights come from `pair_cost` when the two-node program is
/// feasible; otherwise the pair is charged at its own rates (the weight is
/// only used by weight-transform arguments, never by validity).
pub fn build_mixed_test_graph<F>(
    rates: &[f64],
    oracle: &EntropyOracle,
    channel: &ChannelModel,
    clamp: RateClamp,
    pair_cost: F,
) -> Result<MixedGraph>
where
    F: Fn(usize, usize) -> Option<f64>,
{
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
    let mut g = MixedGraph::new();
    for i in 0..n {
        g.add_regular(i);
        let h_i = oracle.marginal(i)?;
        if rates[i] >= h_i - RATE_TOL {
            g.add_directed(NodeRef::Starred(i), i, channel.power(i, h_i, clamp))?;
        }
        for j in 0..n {
            if j == i {
                continue;
            }
            let h_cond = oracle.conditional(i, j)?;
            if rates[i] >= h_cond - RATE_TOL {
                g.add_directed(NodeRef::Regular(j), i, channel.power(i, h_cond, clamp))?;
            }
        }
    }
    for i in 0..n {
        for j in (i + 1)..n {
            let pe = oracle.pairwise(i, j)?;
            if pe.contains(rates[i], rates[j]) {
                let w = pair_cost(i, j).unwrap_or_else(|| {
                    channel.power(i, rates[i], clamp) + channel.power(j, rates[j], clamp)
                });
                g.add_undirected(i, j, w)?;
            }
        }
    }
    g.remove_isolated();
    Ok(g)
}

/// Flips minimization into maximization: undirected weights become
/// `2L - w`, directed weights `L - w`, with `L = 1 + sum of |w|`. Every
/// strict cover of `n` regular nodes then weighs `n*L` minus its original
/// weight, so strict covers dominate non-strict ones in the transformed
/// graph. Returns the transformed graph and `L`.
pub fn weight_transform(g: &MixedGraph) -> (MixedGraph, f64) {
    let mut lambda = 1.0;
    for e in &g.directed {
        lambda += e.weight.abs();
    }
    for e in &g.undirected {
        lambda += e.weight.abs();
    }
    let mut t = g.clone();
    for e in &mut t.directed {
        e.weight = lambda - e.weight;
    }
    for e in &mut t.undirected {
        e.weight = 2.0 * lambda - e.weight;
    }
    (t, lambda)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::NetworkInstance;

    fn two_node_oracle() -> EntropyOracle {
        let inst =
            NetworkInstance::from_positions(vec![[0.0, 0.0], [0.5, 0.0]], [5.0, 5.0], 1.0, 1.0)
                .unwrap();
        EntropyOracle::from_instance(&inst).unwrap()
    }

    #[test]
    fn head_counts() {
        let mut g = MixedGraph::new();
        g.add_regular(0);
        g.add_directed(NodeRef::Regular(1), 0, 1.0).unwrap();
        g.add_directed(NodeRef::Starred(2), 2, 1.0).unwrap();
        g.add_undirected(0, 2, 1.0).unwrap();
        // node 1: tail only; node 0: one directed in-edge plus one
        // undirected; node 2: one of each; starred nodes: always 0.
        assert_eq!(g.head_count(NodeRef::Regular(1)).unwrap(), 0);
        assert_eq!(g.head_count(NodeRef::Regular(0)).unwrap(), 2);
        assert_eq!(g.head_count(NodeRef::Regular(2)).unwrap(), 2);
        assert_eq!(g.head_count(NodeRef::Starred(2)).unwrap(), 0);
        assert!(g.head_count(NodeRef::Regular(9)).is_err());
    }

    #[test]
    fn duplicate_edges_rejected() {
        let mut g = MixedGraph::new();
        g.add_directed(NodeRef::Regular(0), 1, 1.0).unwrap();
        assert!(g.add_directed(NodeRef::Regular(0), 1, 2.0).is_err());
        // Opposite direction is a different edge.
        g.add_directed(NodeRef::Regular(1), 0, 1.0).unwrap();
        g.add_undirected(0, 1, 1.0).unwrap();
        assert!(g.add_undirected(1, 0, 2.0).is_err());
    }

    #[test]
    fn parallel_directed_and_undirected_form_uug_cycle() {
        let mut g = MixedGraph::new();
        g.add_directed(NodeRef::Regular(0), 1, 1.0).unwrap();
        g.add_undirected(0, 1, 1.0).unwrap();
        assert_eq!(g.underlying_undirected().len(), 2);
        let sel = SubgraphSelection::new(vec![0], vec![0]);
        assert!(!sel.uug_is_acyclic(&g));
        let only_directed = SubgraphSelection::new(vec![0], vec![]);
        assert!(only_directed.uug_is_acyclic(&g));
    }

    #[test]
    fn canonical_edge_order_is_insertion_independent() {
        let mut a = MixedGraph::new();
        a.add_directed(NodeRef::Regular(2), 0, 3.0).unwrap();
        a.add_directed(NodeRef::Regular(0), 1, 1.0).unwrap();
        a.add_undirected(2, 1, 5.0).unwrap();
        let mut b = MixedGraph::new();
        b.add_undirected(1, 2, 5.0).unwrap();
        b.add_directed(NodeRef::Regular(0), 1, 1.0).unwrap();
        b.add_directed(NodeRef::Regular(2), 0, 3.0).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn total_digraph_shape() {
        let oracle = two_node_oracle();
        let g = build_total_digraph(&oracle).unwrap();
        assert_eq!(g.node_count(), 4);
        assert_eq!(g.directed_edges().len(), 4);
        assert!(g.is_pure_digraph());
        let h1 = oracle.marginal(0).unwrap();
        let hc = oracle.conditional(0, 1).unwrap();
        let mut weights: Vec<f64> = g.directed_edges().iter().map(|e| e.weight).collect();
        weights.sort_by(f64::total_cmp);
        assert!((weights[0] - hc).abs() < 1e-12 && (weights[1] - hc).abs() < 1e-12);
        assert!((weights[2] - h1).abs() < 1e-12 && (weights[3] - h1).abs() < 1e-12);
    }

    #[test]
    fn rooted_variant_drops_other_starred_nodes() {
        let oracle = two_node_oracle();
        let g = build_total_digraph(&oracle).unwrap();
        let r = g.rooted_variant(1).unwrap();
        assert_eq!(r.node_count(), 3);
        assert_eq!(r.directed_edges().len(), 3);
        assert!(r.contains(NodeRef::Starred(1)));
        assert!(!r.contains(NodeRef::Starred(0)));
        assert!(g.rooted_variant(7).is_err());
    }

    #[test]
    fn total_digraph_weights_match_oracle() {
        let inst = NetworkInstance::generate(3, 1.0, 11, [0.0, 0.0]).unwrap();
        let oracle = EntropyOracle::from_instance(&inst).unwrap();
        let g = build_total_digraph(&oracle).unwrap();
        for e in g.directed_edges() {
            let expect = match e.tail {
                NodeRef::Starred(i) => {
                    assert_eq!(i, e.head);
                    oracle.marginal(i).unwrap()
                }
                NodeRef::Regular(i) => oracle.conditional(e.head, i).unwrap(),
            };
            assert!((e.weight - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn test_graph_at_full_rates_and_zero_rates() {
        let oracle = two_node_oracle();
        let h = [oracle.marginal(0).unwrap(), oracle.marginal(1).unwrap()];
        let (g, parents) = build_test_graph(&h, &oracle).unwrap();
        assert_eq!(g.directed_edges().len(), 4);
        assert_eq!(parents, vec![0, 1]);
        let (empty, parents) = build_test_graph(&[0.0, 0.0], &oracle).unwrap();
        assert_eq!(empty.node_count(), 0);
        assert!(parents.is_empty());
    }

    #[test]
    fn test_graph_boundary_is_inclusive() {
        let oracle = two_node_oracle();
        let hc = oracle.conditional(0, 1).unwrap();
        let (g, parents) = build_test_graph(&[hc, oracle.marginal(1).unwrap()], &oracle).unwrap();
        // Node 0 sits exactly on the conditional threshold: edge (1 -> 0)
        // present, starred edge for 0 absent.
        assert!(g
            .directed_edges()
            .iter()
            .any(|e| e.tail == NodeRef::Regular(1) && e.head == 0));
        assert!(!g.contains(NodeRef::Starred(0)));
        assert_eq!(parents, vec![1]);
    }

    #[test]
    fn mixed_total_graph_pruning() {
        let inst = NetworkInstance::generate(3, 1.0, 5, [0.0, 0.0]).unwrap();
        let oracle = EntropyOracle::from_instance(&inst).unwrap();
        let loose = ChannelModel::from_instance(&inst, f64::INFINITY).unwrap();
        let g = build_mixed_total_graph(&oracle, &loose, RateClamp::ZeroFloor, |_, _| Some(1.0))
            .unwrap();
        assert_eq!(g.directed_edges().len(), 3 + 6);
        assert_eq!(g.undirected_edges().len(), 3);
        // A cap below every cross-edge power leaves only starred edges
        // cheap enough (or nothing).
        let mut min_cross = f64::INFINITY;
        for i in 0..3 {
            for j in 0..3 {
                if i != j {
                    let w = loose.power(i, oracle.conditional(i, j).unwrap(), RateClamp::ZeroFloor);
                    min_cross = min_cross.min(w);
                }
            }
        }
        let tight = ChannelModel::from_instance(&inst, min_cross * 0.5).unwrap();
        let g2 = build_mixed_total_graph(&oracle, &tight, RateClamp::ZeroFloor, |_, _| None)
            .unwrap();
        assert!(g2
            .directed_edges()
            .iter()
            .all(|e| e.tail.is_starred() || e.weight <= min_cross * 0.5 + RATE_TOL));
        assert!(g2.undirected_edges().is_empty());
    }

    #[test]
    fn mixed_test_graph_membership() {
        let oracle = two_node_oracle();
        let inst =
            NetworkInstance::from_positions(vec![[0.0, 0.0], [0.5, 0.0]], [5.0, 5.0], 1.0, 1.0)
                .unwrap();
        let channel = ChannelModel::from_instance(&inst, f64::INFINITY).unwrap();
        let pe = oracle.pairwise(0, 1).unwrap();
        // Rates at a corner of the pair region: jointly decodable, so the
        // undirected edge appears; node 0 also covers its marginal.
        let rates = [pe.h_i, pe.h_j_given_i];
        let g = build_mixed_test_graph(&rates, &oracle, &channel, RateClamp::ZeroFloor, |_, _| {
            Some(2.5)
        })
        .unwrap();
        assert_eq!(g.undirected_edges().len(), 1);
        assert!((g.undirected_edges()[0].weight - 2.5).abs() < 1e-12);
        assert!(g.contains(NodeRef::Starred(0)));
        assert!(!g.contains(NodeRef::Starred(1)));
        // Rates below every threshold: empty graph.
        let g2 = build_mixed_test_graph(
            &[0.0, 0.0],
            &oracle,
            &channel,
            RateClamp::ZeroFloor,
            |_, _| Some(2.5),
        )
        .unwrap();
        assert_eq!(g2.node_count(), 0);
    }

    #[test]
    fn weight_transform_formulas() {
        let (t, lambda) = weight_transform(&MixedGraph::new());
        assert_eq!(lambda, 1.0);
        assert_eq!(t.directed_edges().len(), 0);

        let mut g = MixedGraph::new();
        g.add_directed(NodeRef::Regular(0), 1, 3.5).unwrap();
        let (t, lambda) = weight_transform(&g);
        assert_eq!(lambda, 4.5);
        assert!((t.directed_edges()[0].weight - 1.0).abs() < 1e-12);

        let mut g = MixedGraph::new();
        g.add_directed(NodeRef::Starred(0), 0, 2.0).unwrap();
        g.add_undirected(1, 2, 3.0).unwrap();
        g.add_directed(NodeRef::Regular(1), 2, -1.0).unwrap();
        let (t, lambda) = weight_transform(&g);
        assert_eq!(lambda, 7.0);
        // A cover where every regular node heads exactly one edge weighs
        // n*lambda minus the original weight: here nodes {0,1,2} via the
        // starred edge and the undirected pair.
        let sel = SubgraphSelection::new(vec![0], vec![0]);
        let orig = sel.weight(&g);
        let transformed = sel.weight(&t);
        assert!((transformed - (3.0 * lambda - orig)).abs() < 1e-12);
    }

    #[test]
    fn selection_weight_is_canonical_order() {
        let mut g = MixedGraph::new();
        g.add_directed(NodeRef::Regular(0), 1, 0.1).unwrap();
        g.add_directed(NodeRef::Regular(1), 2, 0.2).unwrap();
        g.add_undirected(0, 2, 0.3).unwrap();
        let a = SubgraphSelection::new(vec![1, 0], vec![0]);
        let b = SubgraphSelection::new(vec![0, 1], vec![0]);
        assert_eq!(a, b);
        assert_eq!(a.weight(&g).to_bits(), b.weight(&g).to_bits());
        a.validate(&g).unwrap();
        let bad = SubgraphSelection::new(vec![5], vec![]);
        assert!(bad.validate(&g).is_err());
    }
}
