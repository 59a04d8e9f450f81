//! Helpers shared by the integration suites: seeded instance setup, random
//! graph generators, and brute-force grid searches used as reference
//! answers for the closed-form and convex solvers.
//!
//! Each suite compiles its own copy, so not every helper is live in every
//! target.
#![allow(dead_code)]

use pairalloc_core::{
    per_pair_power_optimum, ChannelModel, EntropyOracle, MixedGraph, NetworkInstance, NodeRef,
    PairOptimum, RateClamp, RATE_TOL,
};
use rand::Rng;

pub const SINK: [f64; 2] = [0.0, 0.0];

pub fn noisy_setup(n: usize, c: f64, seed: u64, p_max: f64) -> (EntropyOracle, ChannelModel) {
    let inst = NetworkInstance::generate(n, c, seed, SINK).expect("instance");
    let oracle = EntropyOracle::from_instance(&inst).expect("oracle");
    let channel = ChannelModel::from_instance(&inst, p_max).expect("channel");
    (oracle, channel)
}

/// Mixed total graph with the production pair costs: two-node optimal sum
/// power where that program is feasible, no undirected edge otherwise.
pub fn mixed_total(oracle: &EntropyOracle, channel: &ChannelModel) -> MixedGraph {
    pairalloc_core::build_mixed_total_graph(oracle, channel, RateClamp::ZeroFloor, |i, j| {
        let p = per_pair_power_optimum(oracle, channel, i, j, RateClamp::ZeroFloor).ok()?;
        p.feasible.then(|| PairOptimum::sum_power(&p))
    })
    .expect("mixed total graph")
}

/// Random pure digraph over `n` regular nodes plus one starred root `0*`
/// wired to node 0, mirroring the rooted shape the allocator solves.
pub fn random_digraph<R: Rng>(rng: &mut R, n: usize) -> MixedGraph {
    let mut g = MixedGraph::new();
    for i in 0..n {
        g.add_regular(i);
    }
    g.add_directed(NodeRef::Starred(0), 0, rng.gen_range(-1.0..3.0))
        .expect("root edge");
    for i in 0..n {
        for j in 0..n {
            if i != j && rng.gen_bool(0.55) {
                g.add_directed(NodeRef::Regular(i), j, rng.gen_range(-1.0..3.0))
                    .expect("cross edge");
            }
        }
    }
    g
}

/// Random mixed graph in the total-graph shape: optional starred edge per
/// node, sparse directed cross edges, sparse undirected pair edges.
pub fn random_mixed_graph<R: Rng>(rng: &mut R, n: usize) -> MixedGraph {
    let mut g = MixedGraph::new();
    for i in 0..n {
        g.add_regular(i);
    }
    for i in 0..n {
        if rng.gen_bool(0.8) {
            g.add_directed(NodeRef::Starred(i), i, rng.gen_range(0.0..5.0))
                .expect("starred edge");
        }
    }
    for i in 0..n {
        for j in 0..n {
            if i != j && rng.gen_bool(0.4) {
                g.add_directed(NodeRef::Regular(i), j, rng.gen_range(0.0..5.0))
                    .expect("cross edge");
            }
        }
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if rng.gen_bool(0.4) {
                g.add_undirected(i, j, rng.gen_range(0.0..8.0))
                    .expect("pair edge");
            }
        }
    }
    g
}

/// Transmit power for one node at `rate` under the clamp, mirroring the
/// channel model's formula for a bare gain value.
pub fn power_for(gain: f64, rate: f64, clamp: RateClamp) -> f64 {
    let r = match clamp {
        RateClamp::ZeroFloor => rate.max(0.0),
        RateClamp::Raw => rate,
    };
    (r.exp2() - 1.0) / gain
}

/// Grid reference for the two-node optimizer: walk the joint-sum face of
/// the pair region in `step`-sized rate moves (plus the cap-induced corner
/// candidates) and return the best capped sum power, `None` if no point
/// fits under the cap.
pub fn pair_grid_min(
    h_i_given_j: f64,
    h_j_given_i: f64,
    h_joint: f64,
    gain_i: f64,
    gain_j: f64,
    p_max: f64,
    step: f64,
) -> Option<f64> {
    let low = h_i_given_j;
    let high = h_joint - h_j_given_i;
    let mut candidates: Vec<f64> = Vec::new();
    let points = ((high - low) / step).ceil() as usize;
    for k in 0..=points {
        candidates.push((low + k as f64 * step).min(high));
    }
    // Cap boundaries as explicit candidates so a cap-clamped optimum is
    // not missed between grid points.
    if p_max.is_finite() {
        let cap_i = (1.0 + gain_i * p_max).log2();
        let cap_j = h_joint - (1.0 + gain_j * p_max).log2();
        for r in [cap_i, cap_j] {
            if (low..=high).contains(&r) {
                candidates.push(r);
            }
        }
    }
    let mut best: Option<f64> = None;
    for r_i in candidates {
        let r_j = h_joint - r_i;
        let p_i = power_for(gain_i, r_i, RateClamp::ZeroFloor);
        let p_j = power_for(gain_j, r_j, RateClamp::ZeroFloor);
        if p_i <= p_max + RATE_TOL && p_j <= p_max + RATE_TOL {
            let s = p_i + p_j;
            if best.map_or(true, |b| s < b) {
                best = Some(s);
            }
        }
    }
    best
}

/// Grid reference for the three-node joint region: scan (R_0, R_1) and
/// give node 2 the cheapest rate its constraints allow, minimizing total
/// power under the caps. `None` when no grid point is feasible.
pub fn sw3_grid_min(
    oracle: &EntropyOracle,
    channel: &ChannelModel,
    step: f64,
) -> Option<f64> {
    assert_eq!(oracle.n(), 3, "grid reference is specific to n = 3");
    let h = |s: &[usize]| oracle.subset_conditional(s).expect("entropy");
    let floor0 = h(&[0]).max(0.0);
    let floor1 = h(&[1]).max(0.0);
    let floor2 = h(&[2]).max(0.0);
    let h01 = h(&[0, 1]);
    let h02 = h(&[0, 2]);
    let h12 = h(&[1, 2]);
    let hall = h(&[0, 1, 2]);
    let cap = |i: usize| channel.max_rate(i);
    if floor0 > cap(0) + RATE_TOL || floor1 > cap(1) + RATE_TOL || floor2 > cap(2) + RATE_TOL {
        return None;
    }

    // With r0 and r1 fixed, the cheapest legal r2 is the max of its floor and
    // the three remaining subset demands, so the row objective in r0 is a
    // convex piecewise curve. Its minimum sits on a branch switch, a segment
    // end, or a closed-form stationary point of one of the two branches that
    // still trade r0 against r2; probing those few candidates is exact.
    let gains = [channel.gain(0), channel.gain(1), channel.gain(2)];
    let row_min = |r1: f64| -> Option<f64> {
        let lo0 = floor0
            .max(h01 - r1)
            .max(h02 - cap(2))
            .max(hall - cap(2) - r1);
        let hi0 = cap(0).min(
            floor0
                .max(h01 - r1)
                .max(h02 - floor2)
                .max(hall - r1 - floor2),
        );
        if lo0 > hi0 + RATE_TOL {
            return None;
        }
        let hi0 = hi0.max(lo0);
        let eval = |r0: f64| -> f64 {
            let r2 = floor2.max(h02 - r0).max(h12 - r1).max(hall - r0 - r1);
            power_for(gains[0], r0, RateClamp::ZeroFloor)
                + power_for(gains[1], r1, RateClamp::ZeroFloor)
                + power_for(gains[2], r2, RateClamp::ZeroFloor)
        };
        let ratio = 0.5 * (gains[0] / gains[2]).log2();
        let candidates = [
            lo0,
            hi0,
            h02 - floor2,
            h02 - h12 + r1,
            hall - h12,
            hall - r1 - floor2,
            0.5 * h02 + ratio,
            0.5 * (hall - r1) + ratio,
        ];
        let mut best = f64::INFINITY;
        for &c in &candidates {
            if c.is_finite() {
                let v = eval(c.clamp(lo0, hi0));
                if v < best {
                    best = v;
                }
            }
        }
        Some(best)
    };

    // Past this rate every constraint r1 participates in is already slack,
    // so the row value can only grow with r1.
    let lo1 = floor1.max(h12 - cap(2));
    let hi1 = cap(1).min(
        floor1
            .max(h01 - floor0)
            .max(h12 - floor2)
            .max(hall - floor0 - floor2),
    );
    if lo1 > hi1 + RATE_TOL {
        return None;
    }
    let hi1 = hi1.max(lo1);

    let steps1 = ((hi1 - lo1) / step).ceil().max(0.0) as usize;
    let mut best: Option<f64> = None;
    let mut best_r1 = lo1;
    for b in 0..=steps1 {
        let r1 = (lo1 + b as f64 * step).min(hi1);
        if let Some(total) = row_min(r1) {
            if best.map_or(true, |t| total < t) {
                best = Some(total);
                best_r1 = r1;
            }
        }
    }
    best?;

    // The row values form a convex profile in r1, so the scan minimum
    // brackets the true one within one step; trisection closes the gap.
    let phi = |r1: f64| row_min(r1).unwrap_or(f64::INFINITY);
    let mut lo = (best_r1 - step).max(lo1);
    let mut hi = (best_r1 + step).min(hi1);
    let mut witness = best_r1;
    for _ in 0..120 {
        let m1 = lo + (hi - lo) / 3.0;
        let m2 = hi - (hi - lo) / 3.0;
        let f1 = phi(m1);
        let f2 = phi(m2);
        if !f1.is_finite() && !f2.is_finite() {
            // Feasible r1 values form an interval, so a doubly infeasible
            // probe pair means it sits entirely on the witness side.
            if witness <= m1 {
                hi = m1;
            } else {
                lo = m2;
            }
            continue;
        }
        if f1 < f2 {
            hi = m2;
            witness = m1;
        } else if f2 < f1 {
            lo = m1;
            witness = m2;
        } else {
            lo = m1;
            hi = m2;
            witness = m1;
        }
        let refined = f1.min(f2);
        if refined.is_finite() && best.map_or(true, |t| refined < t) {
            best = Some(refined);
        }
    }
    best
}
