//! Exhaustive enumeration oracles for small graphs. These deliberately
//! avoid the production solvers' shortcuts: feasibility comes straight
//! from the defining conditions (head counts, acyclicity after erasing
//! orientations, root reachability), and every optimal witness is
//! collected, so the fast solvers can be checked for exact agreement.

use crate::error::{Error, Result};
use crate::graphs::{MixedGraph, NodeRef, SubgraphSelection};

/// Node-count ceilings; beyond them enumeration is oracle misuse.
pub const ENUM_ARBORESCENCE_CAP: usize = 7;
pub const ENUM_SMF_CAP: usize = 7;
pub const ENUM_MATCHING_CAP: usize = 10;

/// What to enumerate. Matching takes the same singleton cost model as the
/// matching solver (`None` = perfect matchings only).
pub enum EnumerationKind<'a> {
    Arborescence { root: NodeRef },
    Matching {
        singleton_cost: Option<&'a dyn Fn(usize) -> f64>,
    },
    StrictMatchingForest,
}

/// One optimal witness: chosen edges, singleton nodes (matching only), and
/// the canonical weight.
#[derive(Debug, Clone)]
pub struct Enumerated {
    pub selection: SubgraphSelection,
    pub singletons: Vec<usize>,
    pub weight: f64,
}

/// Enumerates every feasible subgraph of the requested kind and returns
/// all minimum-weight witnesses, ordered by their edge selections. An
/// empty result means no feasible subgraph exists.
pub fn brute_force_enumerate(g: &MixedGraph, kind: EnumerationKind) -> Result<Vec<Enumerated>> {
    let mut best: Vec<Enumerated> = Vec::new();
    let mut offer = |sel: SubgraphSelection, singles: Vec<usize>, weight: f64| {
        match best.first() {
            Some(b) if weight > b.weight => {}
            Some(b) if weight == b.weight => best.push(Enumerated {
                selection: sel,
                singletons: singles,
                weight,
            }),
            _ => {
                best.clear();
                best.push(Enumerated {
                    selection: sel,
                    singletons: singles,
                    weight,
                });
            }
        }
    };
    match kind {
        EnumerationKind::Arborescence { root } => {
            enumerate_arborescences(g, root, &mut offer)?;
        }
        EnumerationKind::Matching { singleton_cost } => {
            enumerate_matchings(g, singleton_cost, &mut offer)?;
        }
        EnumerationKind::StrictMatchingForest => {
            for_each_matching_forest_impl(g, true, &mut |sel, w| {
                offer(sel.clone(), Vec::new(), w)
            })?;
        }
    }
    best.sort_by(|a, b| a.selection.cmp(&b.selection).then(a.singletons.cmp(&b.singletons)));
    Ok(best)
}

/// Streams every matching forest of `g` (including the empty one and
/// non-strict ones) exactly once, with its canonical weight.
pub fn for_each_matching_forest<F>(g: &MixedGraph, mut visit: F) -> Result<()>
where
    F: FnMut(&SubgraphSelection, f64),
{
    for_each_matching_forest_impl(g, false, &mut visit)
}

fn enumerate_arborescences<F>(g: &MixedGraph, root: NodeRef, offer: &mut F) -> Result<()>
where
    F: FnMut(SubgraphSelection, Vec<usize>, f64),
{
    if !g.is_pure_digraph() {
        return Err(Error::InvalidArgument(
            "arborescence enumeration needs a pure digraph".into(),
        ));
    }
    if !g.contains(root) {
        return Err(Error::InvalidArgument(format!("unknown root {root}")));
    }
    if g.node_count() > ENUM_ARBORESCENCE_CAP {
        return Err(Error::OracleRefused(format!(
            "arborescence enumeration capped at {ENUM_ARBORESCENCE_CAP} nodes, got {}",
            g.node_count()
        )));
    }
    let mut nodes: Vec<NodeRef> = g
        .regular_nodes()
        .map(NodeRef::Regular)
        .chain(g.starred_nodes().map(NodeRef::Starred))
        .collect();
    nodes.sort();
    let non_root: Vec<NodeRef> = nodes.iter().copied().filter(|&v| v != root).collect();
    // In-edge index lists per non-root node.
    let in_edges: Vec<Vec<usize>> = non_root
        .iter()
        .map(|&v| {
            g.directed_edges()
                .iter()
                .enumerate()
                .filter(|(_, e)| NodeRef::Regular(e.head) == v)
                .map(|(i, _)| i)
                .collect()
        })
        .collect();
    let mut chosen: Vec<usize> = Vec::with_capacity(non_root.len());
    fn rec<F>(
        g: &MixedGraph,
        root: NodeRef,
        nodes: &[NodeRef],
        in_edges: &[Vec<usize>],
        k: usize,
        chosen: &mut Vec<usize>,
        offer: &mut F,
    ) where
        F: FnMut(SubgraphSelection, Vec<usize>, f64),
    {
        if k == in_edges.len() {
            // Definition check: the chosen edges must let the root reach
            // every node.
            let mut reached: Vec<NodeRef> = vec![root];
            let mut frontier = vec![root];
            while let Some(u) = frontier.pop() {
                for &ei in chosen.iter() {
                    let e = g.directed_edges()[ei];
                    if e.tail == u && !reached.contains(&NodeRef::Regular(e.head)) {
                        reached.push(NodeRef::Regular(e.head));
                        frontier.push(NodeRef::Regular(e.head));
                    }
                }
            }
            if reached.len() == nodes.len() {
                let sel = SubgraphSelection::new(chosen.clone(), Vec::new());
                let w = sel.weight(g);
                offer(sel, Vec::new(), w);
            }
            return;
        }
        for &ei in &in_edges[k] {
            chosen.push(ei);
            rec(g, root, nodes, in_edges, k + 1, chosen, offer);
            chosen.pop();
        }
    }
    rec(g, root, &nodes, &in_edges, 0, &mut chosen, offer);
    Ok(())
}

fn enumerate_matchings<F>(
    g: &MixedGraph,
    singleton_cost: Option<&dyn Fn(usize) -> f64>,
    offer: &mut F,
) -> Result<()>
where
    F: FnMut(SubgraphSelection, Vec<usize>, f64),
{
    if !g.directed_edges().is_empty() {
        return Err(Error::InvalidArgument(
            "matching enumeration needs an undirected graph".into(),
        ));
    }
    let nodes: Vec<usize> = g.regular_nodes().collect();
    if nodes.len() > ENUM_MATCHING_CAP {
        return Err(Error::OracleRefused(format!(
            "matching enumeration capped at {ENUM_MATCHING_CAP} nodes, got {}",
            nodes.len()
        )));
    }
    struct Ctx<'a, F> {
        g: &'a MixedGraph,
        nodes: &'a [usize],
        singleton_cost: Option<&'a dyn Fn(usize) -> f64>,
        covered: Vec<bool>,
        edges: Vec<usize>,
        singles: Vec<usize>,
        offer: &'a mut F,
    }
    fn rec<F>(ctx: &mut Ctx<'_, F>, from: usize)
    where
        F: FnMut(SubgraphSelection, Vec<usize>, f64),
    {
        let mut k = from;
        while k < ctx.nodes.len() && ctx.covered[k] {
            k += 1;
        }
        if k == ctx.nodes.len() {
            let sel = SubgraphSelection::new(Vec::new(), ctx.edges.clone());
            let mut w = sel.weight(ctx.g);
            if let Some(f) = ctx.singleton_cost {
                for &s in &ctx.singles {
                    w += f(s);
                }
            }
            let mut singles = ctx.singles.clone();
            singles.sort_unstable();
            (ctx.offer)(sel, singles, w);
            return;
        }
        let label = ctx.nodes[k];
        for (idx, e) in ctx.g.undirected_edges().iter().enumerate() {
            let partner = if e.a == label {
                Some(e.b)
            } else if e.b == label {
                Some(e.a)
            } else {
                None
            };
            if let Some(p) = partner {
                let pk = ctx.nodes.binary_search(&p).expect("regular node");
                if !ctx.covered[pk] {
                    ctx.covered[k] = true;
                    ctx.covered[pk] = true;
                    ctx.edges.push(idx);
                    rec(ctx, k + 1);
                    ctx.edges.pop();
                    ctx.covered[pk] = false;
                    ctx.covered[k] = false;
                }
            }
        }
        if let Some(f) = ctx.singleton_cost {
            if f(label).is_finite() {
                ctx.covered[k] = true;
                ctx.singles.push(label);
                rec(ctx, k + 1);
                ctx.singles.pop();
                ctx.covered[k] = false;
            }
        }
    }
    let n = nodes.len();
    let mut ctx = Ctx {
        g,
        nodes: &nodes,
        singleton_cost,
        covered: vec![false; n],
        edges: Vec::new(),
        singles: Vec::new(),
        offer,
    };
    rec(&mut ctx, 0);
    Ok(())
}

/// Shared walker over per-node head assignments. With `strict_only` every
/// regular node must be covered; otherwise "left uncovered" is a choice
/// and every matching forest is visited.
fn for_each_matching_forest_impl<F>(g: &MixedGraph, strict_only: bool, visit: &mut F) -> Result<()>
where
    F: FnMut(&SubgraphSelection, f64),
{
    let regular: Vec<usize> = g.regular_nodes().collect();
    if regular.len() > ENUM_SMF_CAP {
        return Err(Error::OracleRefused(format!(
            "matching-forest enumeration capped at {ENUM_SMF_CAP} regular nodes, got {}",
            regular.len()
        )));
    }
    let starred: Vec<usize> = g.starred_nodes().collect();
    let dense = |label: usize| regular.binary_search(&label).expect("regular node");
    let node_id = |n: NodeRef| -> usize {
        match n {
            NodeRef::Regular(i) => dense(i),
            NodeRef::Starred(i) => {
                regular.len() + starred.binary_search(&i).expect("starred node")
            }
        }
    };

    // (kind, edge index, other search node) per regular node; kind 0 is a
    // directed in-edge, kind 1 an undirected edge.
    let mut cands: Vec<Vec<(u8, usize, usize)>> = vec![Vec::new(); regular.len()];
    for (idx, e) in g.directed_edges().iter().enumerate() {
        cands[dense(e.head)].push((0, idx, node_id(e.tail)));
    }
    for (idx, e) in g.undirected_edges().iter().enumerate() {
        cands[dense(e.a)].push((1, idx, dense(e.b)));
        cands[dense(e.b)].push((1, idx, dense(e.a)));
    }

    struct Ctx<'a, F> {
        g: &'a MixedGraph,
        cands: &'a [Vec<(u8, usize, usize)>],
        strict_only: bool,
        covered: Vec<bool>,
        dir: Vec<usize>,
        und: Vec<usize>,
        parent: Vec<usize>,
        visit: &'a mut F,
    }
    // Plain union-find rebuilt by rollback of parent writes.
    fn find(parent: &[usize], mut x: usize) -> usize {
        while parent[x] != x {
            x = parent[x];
        }
        x
    }
    fn rec<F>(ctx: &mut Ctx<'_, F>, v: usize)
    where
        F: FnMut(&SubgraphSelection, f64),
    {
        let mut v = v;
        while v < ctx.cands.len() && ctx.covered[v] {
            v += 1;
        }
        if v == ctx.cands.len() {
            let sel = SubgraphSelection::new(ctx.dir.clone(), ctx.und.clone());
            let w = sel.weight(ctx.g);
            (ctx.visit)(&sel, w);
            return;
        }
        if !ctx.strict_only {
            // Leave v uncovered.
            ctx.covered[v] = true;
            rec(ctx, v + 1);
            ctx.covered[v] = false;
        }
        for ci in 0..ctx.cands[v].len() {
            let (kind, edge, other) = ctx.cands[v][ci];
            if kind == 1 && ctx.covered[other] {
                continue;
            }
            let (ra, rb) = (find(&ctx.parent, v), find(&ctx.parent, other));
            if ra == rb {
                continue;
            }
            ctx.parent[ra] = rb;
            ctx.covered[v] = true;
            if kind == 0 {
                ctx.dir.push(edge);
            } else {
                ctx.covered[other] = true;
                ctx.und.push(edge);
            }
            rec(ctx, v + 1);
            if kind == 0 {
                ctx.dir.pop();
            } else {
                ctx.und.pop();
                ctx.covered[other] = false;
            }
            ctx.covered[v] = false;
            ctx.parent[ra] = ra;
        }
    }
    let total = regular.len() + starred.len();
    let mut ctx = Ctx {
        g,
        cands: &cands,
        strict_only,
        covered: vec![false; regular.len()],
        dir: Vec::new(),
        und: Vec::new(),
        parent: (0..total).collect(),
        visit,
    };
    rec(&mut ctx, 0);
    Ok(())
}
