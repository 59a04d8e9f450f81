//! Convex oracle for the full joint-decoding program: minimum sum power
//! over all rate vectors whose every subset sum clears the matching
//! conditional entropy, with per-node peak caps.
//!
//! Interior-point solve: log-barrier over the 2^n - 1 subset constraints
//! plus the n cap constraints, Newton inner iterations, geometric barrier
//! schedule. Exact enough for comparisons at 1e-6 relative.

use crate::error::{Error, Result};
use crate::model::{ChannelModel, EntropyOracle, RateClamp, RATE_TOL};
use nalgebra::{Cholesky, DMatrix, DVector};

/// Largest network the oracle accepts; the constraint set doubles per
/// node.
pub const SW_ORACLE_NODE_CAP: usize = 12;

const LN2: f64 = std::f64::consts::LN_2;

struct Program {
    n: usize,
    gains: Vec<f64>,
    /// Required subset sums, indexed by node bitmask (entry 0 unused).
    floors: Vec<f64>,
    caps: Vec<f64>,
}

impl Program {
    fn objective(&self, r: &DVector<f64>) -> f64 {
        (0..self.n)
            .map(|i| (2f64.powf(r[i]) - 1.0) / self.gains[i])
            .sum()
    }

    /// Worst slack over the subset floors at `r`; negative means violated.
    fn floor_slack(&self, r: &DVector<f64>) -> f64 {
        let mut worst = f64::INFINITY;
        for mask in 1..self.floors.len() {
            let mut sum = 0.0;
            for i in 0..self.n {
                if mask & (1 << i) != 0 {
                    sum += r[i];
                }
            }
            worst = worst.min(sum - self.floors[mask]);
        }
        worst
    }

    /// Worst slack over all constraints, caps included.
    fn min_slack(&self, r: &DVector<f64>) -> f64 {
        let caps = (0..self.n)
            .map(|i| self.caps[i] - r[i])
            .fold(f64::INFINITY, f64::min);
        self.floor_slack(r).min(caps)
    }

    /// Barrier value at `r`, infinite outside the strict interior.
    fn barrier(&self, t: f64, r: &DVector<f64>) -> f64 {
        let mut v = t * self.objective(r);
        for mask in 1..self.floors.len() {
            let mut sum = 0.0;
            for i in 0..self.n {
                if mask & (1 << i) != 0 {
                    sum += r[i];
                }
            }
            let slack = sum - self.floors[mask];
            if slack <= 0.0 {
                return f64::INFINITY;
            }
            v -= slack.ln();
        }
        for i in 0..self.n {
            let slack = self.caps[i] - r[i];
            if slack <= 0.0 {
                return f64::INFINITY;
            }
            v -= slack.ln();
        }
        v
    }

    fn gradient_hessian(&self, t: f64, r: &DVector<f64>) -> (DVector<f64>, DMatrix<f64>) {
        let n = self.n;
        let mut g = DVector::zeros(n);
        let mut h = DMatrix::zeros(n, n);
        for i in 0..n {
            let p2 = 2f64.powf(r[i]);
            g[i] += t * LN2 * p2 / self.gains[i];
            h[(i, i)] += t * LN2 * LN2 * p2 / self.gains[i];
            let cap_slack = self.caps[i] - r[i];
            g[i] += 1.0 / cap_slack;
            h[(i, i)] += 1.0 / (cap_slack * cap_slack);
        }
        let mut members = Vec::with_capacity(n);
        for mask in 1..self.floors.len() {
            let mut sum = 0.0;
            members.clear();
            for i in 0..n {
                if mask & (1 << i) != 0 {
                    sum += r[i];
                    members.push(i);
                }
            }
            let slack = sum - self.floors[mask];
            let ginc = -1.0 / slack;
            let hinc = 1.0 / (slack * slack);
            for &i in &members {
                g[i] += ginc;
                for &j in &members {
                    h[(i, j)] += hinc;
                }
            }
        }
        (g, h)
    }
}

/// Minimum-sum-power rate vector for joint decoding of all n sources, or
/// the reason there is none. Floor mode adds nonnegativity floors so the
/// optimum is comparable against floored assignments.
pub(super) fn solve_sw_program(
    oracle: &EntropyOracle,
    channel: &ChannelModel,
    clamp: RateClamp,
) -> Result<Vec<f64>> {
    let n = oracle.n();
    if n == 0 {
        return Err(Error::InvalidArgument("empty network".into()));
    }
    if n > SW_ORACLE_NODE_CAP {
        return Err(Error::OracleRefused(format!(
            "joint oracle handles at most {SW_ORACLE_NODE_CAP} nodes, got {n}"
        )));
    }
    if channel.n() != n {
        return Err(Error::InvalidArgument(
            "channel and oracle disagree on node count".into(),
        ));
    }
    let gains: Vec<f64> = (0..n).map(|i| channel.gain(i)).collect();
    let mut floors = vec![f64::NEG_INFINITY; 1 << n];
    let mut subset = Vec::with_capacity(n);
    for (mask, floor) in floors.iter_mut().enumerate().skip(1) {
        subset.clear();
        for i in 0..n {
            if mask & (1 << i) != 0 {
                subset.push(i);
            }
        }
        let mut b = oracle.subset_conditional(&subset)?;
        if clamp == RateClamp::ZeroFloor && subset.len() == 1 {
            b = b.max(0.0);
        }
        *floor = b;
    }
    let caps: Vec<f64> = if channel.peak_power().is_finite() {
        (0..n).map(|i| channel.max_rate(i)).collect()
    } else {
        // Synthetic caps that provably cannot bind: any rate vector
        // beating the all-marginals point stays at least one bit below
        // them, and they satisfy every floor with a bit to spare.
        let budget: f64 = (0..n)
            .map(|i| (2f64.powf(oracle.marginal(i).unwrap_or(0.0).max(0.0)) - 1.0) / gains[i])
            .sum::<f64>()
            + gains.iter().map(|g| 1.0 / g).sum::<f64>();
        (0..n)
            .map(|i| (1.0 + gains[i] * budget).log2() + 1.0)
            .collect()
    };
    let prog = Program {
        n,
        gains,
        floors,
        caps,
    };
    // Feasibility: the cap corner dominates every other candidate, so the
    // program is feasible iff the corner satisfies all floors, and the
    // barrier needs a strictly interior start, hence the margin.
    let corner = DVector::from_iterator(n, prog.caps.iter().copied());
    let room = prog.floor_slack(&corner);
    if room <= RATE_TOL {
        return Err(Error::InfeasibleOracle);
    }
    let mut r = &corner - DVector::from_element(n, (room / (2 * n) as f64).min(1e-3));
    debug_assert!(prog.min_slack(&r) > 0.0);

    let m = (prog.floors.len() - 1 + n) as f64;
    let mut t = 1.0;
    loop {
        // Newton with backtracking until the decrement stalls.
        for _ in 0..200 {
            let (g, h) = prog.gradient_hessian(t, &r);
            let chol = match Cholesky::new(h) {
                Some(c) => c,
                None => break,
            };
            let step = chol.solve(&-&g);
            let lambda2 = -g.dot(&step);
            if lambda2 / 2.0 <= 1e-11 {
                break;
            }
            let base = prog.barrier(t, &r);
            let slope = g.dot(&step);
            let mut alpha = 1.0;
            for _ in 0..60 {
                let trial = &r + alpha * &step;
                if prog.barrier(t, &trial) <= base + 0.25 * alpha * slope {
                    r = trial;
                    break;
                }
                alpha *= 0.5;
            }
        }
        let gap = m / t;
        if gap <= 1e-9 * (1.0 + prog.objective(&r).abs()) {
            break;
        }
        t *= 20.0;
    }
    debug_assert!(prog.min_slack(&r) > -RATE_TOL);
    Ok(r.iter().copied().collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::allocation::pair::per_pair_power_optimum;
    use crate::model::NetworkInstance;
    use nalgebra::DMatrix;

    fn pair_oracle(rho: f64) -> EntropyOracle {
        let cov = DMatrix::from_row_slice(2, 2, &[1.0, rho, rho, 1.0]);
        EntropyOracle::from_covariance(cov).unwrap()
    }

    #[test]
    fn single_node_hits_its_marginal() {
        let cov = DMatrix::from_row_slice(1, 1, &[1.0]);
        let oracle = EntropyOracle::from_covariance(cov).unwrap();
        let channel = ChannelModel::new(vec![0.5], f64::INFINITY).unwrap();
        let r = solve_sw_program(&oracle, &channel, RateClamp::Raw).unwrap();
        assert!((r[0] - oracle.marginal(0).unwrap()).abs() < 1e-6);
    }

    #[test]
    fn two_nodes_match_the_closed_form() {
        let oracle = pair_oracle((-0.5f64).exp());
        for gains in [vec![1.0, 1.0], vec![3.0, 0.7]] {
            let channel = ChannelModel::new(gains, f64::INFINITY).unwrap();
            let opt =
                per_pair_power_optimum(&oracle, &channel, 0, 1, RateClamp::Raw).unwrap();
            let r = solve_sw_program(&oracle, &channel, RateClamp::Raw).unwrap();
            let sum: f64 = (0..2).map(|i| channel.power(i, r[i], RateClamp::Raw)).sum();
            let want = opt.sum_power();
            assert!(
                (sum - want).abs() <= 1e-6 * (1.0 + want.abs()),
                "oracle {sum} vs closed form {want}"
            );
        }
    }

    #[test]
    fn caps_bind_consistently_with_the_pair_solver() {
        let oracle = pair_oracle(0.95);
        let channel = ChannelModel::new(vec![10.0, 1.0], 0.31).unwrap();
        let opt = per_pair_power_optimum(&oracle, &channel, 0, 1, RateClamp::Raw).unwrap();
        assert!(opt.feasible);
        let r = solve_sw_program(&oracle, &channel, RateClamp::Raw).unwrap();
        let sum: f64 = (0..2).map(|i| channel.power(i, r[i], RateClamp::Raw)).sum();
        assert!((sum - opt.sum_power()).abs() <= 1e-6 * (1.0 + sum.abs()));
    }

    #[test]
    fn starved_caps_are_infeasible() {
        let oracle = pair_oracle((-0.5f64).exp());
        let channel = ChannelModel::new(vec![1.0, 1.0], 0.5).unwrap();
        assert!(matches!(
            solve_sw_program(&oracle, &channel, RateClamp::Raw),
            Err(Error::InfeasibleOracle)
        ));
    }

    #[test]
    fn refuses_oversized_networks() {
        let inst = NetworkInstance::generate(13, 1.0, 7, [0.0, 0.0]).unwrap();
        let oracle = EntropyOracle::from_instance(&inst).unwrap();
        let channel = ChannelModel::from_instance(&inst, f64::INFINITY).unwrap();
        assert!(matches!(
            solve_sw_program(&oracle, &channel, RateClamp::Raw),
            Err(Error::OracleRefused(_))
        ));
    }

    #[test]
    fn seeded_instance_satisfies_every_floor() {
        let inst = NetworkInstance::generate(6, 3.0, 11, [0.0, 0.0]).unwrap();
        let oracle = EntropyOracle::from_instance(&inst).unwrap();
        let channel = ChannelModel::from_instance(&inst, 10.0).unwrap();
        let r = solve_sw_program(&oracle, &channel, RateClamp::ZeroFloor).unwrap();
        assert!(r.iter().all(|&x| x >= -RATE_TOL), "floored mode stays nonnegative");
        for mask in 1u32..(1 << 6) {
            let subset: Vec<usize> = (0..6).filter(|i| mask & (1 << i) != 0).collect();
            let sum: f64 = subset.iter().map(|&i| r[i]).sum();
            let floor = oracle.subset_conditional(&subset).unwrap();
            assert!(
                sum >= floor - 1e-7,
                "mask {mask:#b}: {sum} < {floor}"
            );
        }
        for (i, &x) in r.iter().enumerate() {
            assert!(channel.power(i, x, RateClamp::ZeroFloor) <= 10.0 + 1e-7);
        }
        // Tight overall: total rate cannot beat the joint entropy, and
        // the optimizer should not leave more than numerical slack above
        // the cheapest subset structure; sanity check against the
        // all-marginals upper bound.
        let total: f64 = r.iter().sum();
        let joint = oracle.joint(&(0..6).collect::<Vec<_>>()).unwrap();
        assert!(total >= joint - 1e-7);
        let obj: f64 = (0..6)
            .map(|i| channel.power(i, r[i], RateClamp::Raw))
            .sum();
        let marginals: f64 = (0..6)
            .map(|i| channel.power(i, oracle.marginal(i).unwrap(), RateClamp::Raw))
            .sum();
        assert!(obj <= marginals + 1e-7);
    }
}
