//! Minimum-weight arborescence on a pure digraph via the contraction
//! method: repeatedly select each node's cheapest in-edge, contract any
//! cycle those selections form, and expand contractions in reverse.

use crate::error::{Error, Result};
use crate::graphs::{MixedGraph, NodeRef, SubgraphSelection};
use std::collections::HashMap;

/// A spanning out-tree: every non-root node has exactly one in-edge and is
/// reachable from the root.
#[derive(Debug, Clone)]
pub struct Arborescence {
    pub root: NodeRef,
    pub selection: SubgraphSelection,
    /// Canonical weight: edge weights summed in parent-graph index order.
    pub weight: f64,
}

/// Edge in a (possibly contracted) working graph. `orig` is an opaque id
/// that survives contraction; this module points it into the parent
/// graph's directed edge list.
#[derive(Debug, Clone, Copy)]
pub(crate) struct WorkEdge {
    pub(crate) tail: usize,
    pub(crate) head: usize,
    pub(crate) weight: f64,
    pub(crate) orig: usize,
}

/// Exact minimum-weight arborescence rooted at `root`, spanning every node
/// of `g`. Ties break on (weight, tail, head), tails ordered with regular
/// nodes before starred ones.
pub fn min_weight_arborescence(g: &MixedGraph, root: NodeRef) -> Result<Arborescence> {
    if !g.is_pure_digraph() {
        return Err(Error::InvalidArgument(
            "arborescence solver needs a pure digraph".into(),
        ));
    }
    if !g.contains(root) {
        return Err(Error::InvalidArgument(format!("unknown root {root}")));
    }

    // Dense node numbering in NodeRef order (regular ascending, then
    // starred ascending), which also fixes the tie-break order.
    let mut nodes: Vec<NodeRef> = g
        .regular_nodes()
        .map(NodeRef::Regular)
        .chain(g.starred_nodes().map(NodeRef::Starred))
        .collect();
    nodes.sort();
    let index: HashMap<NodeRef, usize> = nodes.iter().enumerate().map(|(k, &v)| (v, k)).collect();
    let m = nodes.len();
    let r = index[&root];

    // Reachability pre-check; report the smallest unreachable node.
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); m];
    for e in g.directed_edges() {
        adj[index[&e.tail]].push(index[&NodeRef::Regular(e.head)]);
    }
    let mut seen = vec![false; m];
    let mut queue = vec![r];
    seen[r] = true;
    while let Some(u) = queue.pop() {
        for &v in &adj[u] {
            if !seen[v] {
                seen[v] = true;
                queue.push(v);
            }
        }
    }
    if let Some(k) = (0..m).find(|&k| !seen[k]) {
        return Err(Error::NoArborescence {
            unreachable: nodes[k],
        });
    }

    let edges: Vec<WorkEdge> = g
        .directed_edges()
        .iter()
        .enumerate()
        .map(|(orig, e)| WorkEdge {
            tail: index[&e.tail],
            head: index[&NodeRef::Regular(e.head)],
            weight: e.weight,
            orig,
        })
        .collect();

    let chosen = contract_solve(m, r, edges);
    let selection = SubgraphSelection::new(chosen, Vec::new());
    let weight = selection.weight(g);
    Ok(Arborescence {
        root,
        selection,
        weight,
    })
}

/// Core recursion, also used by the matching forest solver's relaxation.
/// Every node except `root` must be reachable from it, so each has at
/// least one in-edge and an arborescence exists; weights may be negative.
/// Returns the `orig` ids of the optimum.
pub(crate) fn contract_solve(m: usize, root: usize, edges: Vec<WorkEdge>) -> Vec<usize> {
    // Cheapest in-edge per non-root node, deterministic under ties.
    let mut best: Vec<Option<WorkEdge>> = vec![None; m];
    for e in &edges {
        if e.head == root || e.tail == e.head {
            continue;
        }
        let better = match best[e.head] {
            None => true,
            Some(b) => (e.weight, e.tail, e.head) < (b.weight, b.tail, b.head),
        };
        if better {
            best[e.head] = Some(*e);
        }
    }

    // Look for a cycle among the selected edges.
    // state: 0 unvisited, 1 on current walk, 2 done.
    let mut state = vec![0u8; m];
    state[root] = 2;
    let mut cycle: Vec<usize> = Vec::new();
    for start in 0..m {
        if state[start] != 0 {
            continue;
        }
        let mut path = Vec::new();
        let mut v = start;
        while state[v] == 0 {
            state[v] = 1;
            path.push(v);
            v = best[v].expect("non-root node has an in-edge").tail;
        }
        if state[v] == 1 && cycle.is_empty() {
            // Nodes from v to the end of the walk form the cycle.
            let pos = path.iter().position(|&x| x == v).expect("v is on walk");
            cycle = path[pos..].to_vec();
        }
        for &x in &path {
            state[x] = 2;
        }
        if !cycle.is_empty() {
            break;
        }
    }

    if cycle.is_empty() {
        return (0..m)
            .filter(|&v| v != root)
            .map(|v| best[v].expect("selected").orig)
            .collect();
    }

    // Contract the cycle into a fresh node and recurse on reduced weights.
    let in_cycle: Vec<bool> = {
        let mut f = vec![false; m];
        for &v in &cycle {
            f[v] = true;
        }
        f
    };
    let mut remap = vec![usize::MAX; m];
    let mut next = 0;
    for v in 0..m {
        if !in_cycle[v] {
            remap[v] = next;
            next += 1;
        }
    }
    let super_node = next;
    for &v in &cycle {
        remap[v] = super_node;
    }

    let mut contracted: Vec<WorkEdge> = Vec::new();
    // The cycle node each entering edge points at, keyed by parent edge id,
    // so the winning entry can be unrolled after the recursive solve.
    let mut enters_at: HashMap<usize, usize> = HashMap::new();
    for e in &edges {
        let (ct, ch) = (remap[e.tail], remap[e.head]);
        if ct == ch {
            continue;
        }
        let mut w = e.weight;
        if in_cycle[e.head] {
            w -= best[e.head].expect("cycle node has an in-edge").weight;
            enters_at.insert(e.orig, e.head);
        }
        contracted.push(WorkEdge {
            tail: ct,
            head: ch,
            weight: w,
            orig: e.orig,
        });
    }

    let sub = contract_solve(super_node + 1, remap[root], contracted);

    // Exactly one chosen edge enters the supernode; it displaces the cycle
    // edge into the node it targets, the rest of the cycle stays.
    let entry = sub
        .iter()
        .find_map(|orig| enters_at.get(orig).copied())
        .expect("supernode has one in-edge");
    let mut out = sub;
    for &v in &cycle {
        if v != entry {
            out.push(best[v].expect("selected").orig);
        }
    }
    out
}
