//! Experiment runner: single-instance solve reports, normalized-sum-rate
//! sweeps over network size and correlation, and the noisy comparison
//! table. Everything is seeded, parallel-safe, and byte-deterministic.

use crate::allocation::{
    individual_powers, individual_rates, matching_allocation_noisy, matching_rates_noiseless,
    optimal_noiseless_rates, optimal_noisy_allocation, sw_n_power_oracle, Method, PowerAssignment,
    RateAssignment, Witness, SW_ORACLE_NODE_CAP,
};
use crate::error::{Error, Result};
use crate::model::{ChannelModel, EntropyOracle, NetworkInstance, RateClamp, RATE_TOL};
use crate::validity::{check_generalized_valid, check_pairwise_valid, simulate_decode};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;
use std::time::{Duration, Instant};

/// Which pipeline an experiment exercises.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Noiseless,
    Noisy,
}

/// Experiment shape: instance grid, channel setup, solver knobs, output
/// behaviour. Loads from JSON with every field optional.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub mode: Mode,
    pub n_list: Vec<usize>,
    pub c_list: Vec<f64>,
    /// Peak transmit power per node; absent means unbounded.
    pub p_max: Option<f64>,
    /// Base seed; replication r uses seed + r.
    pub seed: u64,
    pub replications: usize,
    /// Floor negative rates at zero before power conversion.
    pub clamp: bool,
    /// Wall-clock budget for the strict-matching-forest search, seconds.
    pub budget_secs: Option<f64>,
    pub sink: [f64; 2],
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        // The sweep grid stops at 20 nodes: the matching baseline is an
        // exact subset-sum program whose state space doubles per node.
        ExperimentConfig {
            mode: Mode::Noiseless,
            n_list: vec![4, 8, 12, 16, 20],
            c_list: vec![1.0, 5.0],
            p_max: None,
            seed: 1,
            replications: 1,
            clamp: true,
            budget_secs: None,
            sink: [0.0, 0.0],
        }
    }
}

impl ExperimentConfig {
    /// Defaults for the noisy comparison table.
    pub fn table_defaults() -> Self {
        ExperimentConfig {
            mode: Mode::Noisy,
            n_list: vec![4, 8, 12],
            c_list: vec![1.0, 3.0, 5.0],
            p_max: Some(10.0),
            ..ExperimentConfig::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_list.is_empty() || self.c_list.is_empty() {
            return Err(Error::InvalidArgument(
                "n and c lists must be nonempty".into(),
            ));
        }
        if self.n_list.iter().any(|&n| n < 2) {
            return Err(Error::InvalidArgument("need at least two nodes".into()));
        }
        if self.c_list.iter().any(|&c| !(c > 0.0)) {
            return Err(Error::InvalidArgument(
                "correlation parameter must be positive".into(),
            ));
        }
        if self.replications == 0 {
            return Err(Error::InvalidArgument(
                "need at least one replication".into(),
            ));
        }
        if let Some(p) = self.p_max {
            if !(p > 0.0) {
                return Err(Error::InvalidArgument("peak power must be positive".into()));
            }
        }
        if let Some(b) = self.budget_secs {
            if !(b > 0.0) {
                return Err(Error::InvalidArgument("budget must be positive".into()));
            }
        }
        Ok(())
    }

    pub fn clamp_mode(&self) -> RateClamp {
        if self.clamp {
            RateClamp::ZeroFloor
        } else {
            RateClamp::Raw
        }
    }

    pub fn peak_power(&self) -> f64 {
        self.p_max.unwrap_or(f64::INFINITY)
    }

    pub fn budget(&self) -> Option<Duration> {
        self.budget_secs.map(Duration::from_secs_f64)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(text)
            .map_err(|e| Error::InvalidArgument(format!("bad config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }
}

/// What happened when one method ran on one instance.
#[derive(Debug, Clone)]
pub enum MethodOutcome {
    Solved {
        sum: f64,
        /// Sum rate normalized by the common marginal entropy; noiseless
        /// methods only.
        r_s0: Option<f64>,
        exact: bool,
        witness: Option<Witness>,
    },
    /// No assignment exists for this method under the peak power cap.
    Infeasible,
    /// The budget expired before any assignment was proven.
    BudgetExceeded,
    /// The method does not apply at this size (joint oracle past its cap).
    Refused,
}

impl MethodOutcome {
    pub fn sum(&self) -> Option<f64> {
        match self {
            MethodOutcome::Solved { sum, .. } => Some(*sum),
            _ => None,
        }
    }

    pub fn witness(&self) -> Option<&Witness> {
        match self {
            MethodOutcome::Solved { witness, .. } => witness.as_ref(),
            _ => None,
        }
    }

    fn status(&self) -> &'static str {
        match self {
            MethodOutcome::Solved { .. } => "solved",
            MethodOutcome::Infeasible => "infeasible",
            MethodOutcome::BudgetExceeded => "budget_exceeded",
            MethodOutcome::Refused => "refused",
        }
    }
}

#[derive(Debug, Clone)]
pub struct MethodReport {
    pub method: Method,
    pub outcome: MethodOutcome,
    pub wall_ms: f64,
}

/// Everything one instance produced, ready for JSON emission.
#[derive(Debug, Clone)]
pub struct SolveReport {
    pub mode: Mode,
    pub n: usize,
    pub c: f64,
    pub seed: u64,
    pub p_max: f64,
    pub clamp: bool,
    pub h1: f64,
    pub joint_entropy: f64,
    pub positions: Vec<[f64; 2]>,
    pub sink: [f64; 2],
    pub methods: Vec<MethodReport>,
}

impl SolveReport {
    /// Normalized joint-entropy lower bound on any sum rate.
    pub fn joint_r_s0(&self) -> f64 {
        self.joint_entropy / self.h1
    }

    pub fn any_infeasible(&self) -> bool {
        self.methods
            .iter()
            .any(|m| matches!(m.outcome, MethodOutcome::Infeasible))
    }

    pub fn any_budget_exceeded(&self) -> bool {
        self.methods
            .iter()
            .any(|m| matches!(m.outcome, MethodOutcome::BudgetExceeded))
    }

    pub fn to_json(&self) -> serde_json::Value {
        let methods: Vec<serde_json::Value> = self
            .methods
            .iter()
            .map(|m| {
                let mut v = json!({
                    "method": m.method.as_str(),
                    "status": m.outcome.status(),
                    "wall_ms": m.wall_ms,
                });
                if let MethodOutcome::Solved {
                    sum,
                    r_s0,
                    exact,
                    witness,
                } = &m.outcome
                {
                    v["sum"] = json!(sum);
                    v["exact"] = json!(exact);
                    v["witness_edges"] =
                        json!(witness.as_ref().map(Witness::edge_labels).unwrap_or_default());
                    if let Some(r) = r_s0 {
                        v["r_s0"] = json!(r);
                    }
                }
                v
            })
            .collect();
        json!({
            "mode": match self.mode { Mode::Noiseless => "noiseless", Mode::Noisy => "noisy" },
            "n": self.n,
            "c": self.c,
            "seed": self.seed,
            "p_max": if self.p_max.is_finite() { json!(self.p_max) } else { json!(null) },
            "clamp": self.clamp,
            "h1": self.h1,
            "joint_entropy": self.joint_entropy,
            "joint_r_s0": self.joint_r_s0(),
            "positions": self.positions,
            "sink": self.sink,
            "methods": methods,
        })
    }
}

/// Re-checks an emitted rate assignment; a failure here is a solver bug,
/// not an input problem, so it is a hard error.
fn ensure_rate_valid(a: &RateAssignment, oracle: &EntropyOracle) -> Result<()> {
    let verdict = check_pairwise_valid(&a.rates, oracle)?;
    match verdict.schedule() {
        Some(s) if simulate_decode(s, &a.rates, oracle)? => Ok(()),
        _ => Err(Error::InvalidArgument(format!(
            "internal: {} assignment failed its validity round trip",
            a.method
        ))),
    }
}

fn ensure_power_valid(
    a: &PowerAssignment,
    oracle: &EntropyOracle,
    channel: &ChannelModel,
    clamp: RateClamp,
) -> Result<()> {
    let verdict = check_generalized_valid(&a.rates.rates, oracle, channel, clamp)?;
    match verdict.schedule() {
        Some(s) if simulate_decode(s, &a.rates.rates, oracle)? => Ok(()),
        _ => Err(Error::InvalidArgument(format!(
            "internal: {} assignment failed its validity round trip",
            a.rates.method
        ))),
    }
}

/// Runs every method applicable under the config mode on one instance,
/// validity-checking each produced assignment.
pub fn solve_instance(config: &ExperimentConfig, inst: &NetworkInstance) -> Result<SolveReport> {
    config.validate()?;
    let oracle = EntropyOracle::from_instance(inst)?;
    let n = oracle.n();
    let clamp = config.clamp_mode();
    let h1 = oracle.marginal(0)?;
    let joint_entropy = oracle.joint(&(0..n).collect::<Vec<_>>())?;
    let mut methods = Vec::new();

    match config.mode {
        Mode::Noiseless => {
            for method in [Method::Ma, Method::Matching, Method::Individual] {
                let started = Instant::now();
                let a = match method {
                    Method::Ma => optimal_noiseless_rates(&oracle)?,
                    Method::Matching => matching_rates_noiseless(&oracle)?,
                    _ => individual_rates(&oracle)?,
                };
                ensure_rate_valid(&a, &oracle)?;
                methods.push(MethodReport {
                    method,
                    outcome: MethodOutcome::Solved {
                        sum: a.sum_rate(),
                        r_s0: Some(a.sum_rate() / h1),
                        exact: true,
                        witness: a.witness,
                    },
                    wall_ms: started.elapsed().as_secs_f64() * 1e3,
                });
            }
        }
        Mode::Noisy => {
            let channel = ChannelModel::from_instance(inst, config.peak_power())?;
            let push_power = |methods: &mut Vec<MethodReport>,
                              method: Method,
                              started: Instant,
                              result: Result<PowerAssignment>|
             -> Result<()> {
                let outcome = match result {
                    Ok(a) => MethodOutcome::Solved {
                        sum: a.sum_power(),
                        r_s0: None,
                        exact: a.exact,
                        witness: a.rates.witness,
                    },
                    Err(Error::InfeasibleUnderPeakPower)
                    | Err(Error::BaselineInfeasible)
                    | Err(Error::InfeasibleOracle) => MethodOutcome::Infeasible,
                    Err(Error::BudgetExceeded) => MethodOutcome::BudgetExceeded,
                    Err(Error::OracleRefused(_)) => MethodOutcome::Refused,
                    Err(e) => return Err(e),
                };
                methods.push(MethodReport {
                    method,
                    outcome,
                    wall_ms: started.elapsed().as_secs_f64() * 1e3,
                });
                Ok(())
            };

            let started = Instant::now();
            let smf = optimal_noisy_allocation(&oracle, &channel, clamp, config.budget());
            if let Ok(a) = &smf {
                ensure_power_valid(a, &oracle, &channel, clamp)?;
            }
            push_power(&mut methods, Method::Smf, started, smf)?;

            let started = Instant::now();
            let matching = matching_allocation_noisy(&oracle, &channel, clamp);
            if let Ok(a) = &matching {
                ensure_power_valid(a, &oracle, &channel, clamp)?;
            }
            push_power(&mut methods, Method::Matching, started, matching)?;

            let started = Instant::now();
            let oracle_run = sw_n_power_oracle(&oracle, &channel, clamp);
            push_power(&mut methods, Method::SwOracle, started, oracle_run)?;

            let started = Instant::now();
            let individual = individual_powers(&oracle, &channel, clamp)?;
            let fits = individual
                .powers
                .iter()
                .all(|&p| p <= channel.peak_power() + RATE_TOL);
            if fits {
                ensure_power_valid(&individual, &oracle, &channel, clamp)?;
                push_power(&mut methods, Method::Individual, started, Ok(individual))?;
            } else {
                push_power(
                    &mut methods,
                    Method::Individual,
                    started,
                    Err(Error::InfeasibleUnderPeakPower),
                )?;
            }
        }
    }

    Ok(SolveReport {
        mode: config.mode,
        n,
        c: inst.c,
        seed: inst.seed,
        p_max: config.peak_power(),
        clamp: config.clamp,
        h1,
        joint_entropy,
        positions: inst.positions.clone(),
        sink: inst.sink,
        methods,
    })
}

/// Decimal rendering with nine significant digits; non-finite values
/// become "na". Shared by every CSV writer so reruns are byte-identical.
pub fn fmt_sig(x: f64) -> String {
    if !x.is_finite() {
        return "na".into();
    }
    if x == 0.0 {
        return "0.00000000".into();
    }
    let mag = x.abs().log10().floor() as i32;
    let decimals = (8 - mag).max(0) as usize;
    format!("{x:.decimals$}")
}

/// Normalized-sum-rate sweep over the (n, c) grid; one CSV row per
/// instance and method, methods in a fixed order, plus the joint-entropy
/// bound as its own method row.
pub fn run_sweep(config: &ExperimentConfig) -> Result<String> {
    config.validate()?;
    if config.mode != Mode::Noiseless {
        return Err(Error::InvalidArgument("sweep runs in noiseless mode".into()));
    }
    let mut cells = Vec::new();
    for &n in &config.n_list {
        for &c in &config.c_list {
            for rep in 0..config.replications {
                cells.push((n, c, config.seed.wrapping_add(rep as u64)));
            }
        }
    }
    let chunks: Result<Vec<String>> = cells
        .par_iter()
        .map(|&(n, c, seed)| -> Result<String> {
            let inst = NetworkInstance::generate(n, c, seed, config.sink)?;
            let report = solve_instance(config, &inst)?;
            let mut out = String::new();
            for m in &report.methods {
                if let MethodOutcome::Solved { r_s0: Some(r), .. } = m.outcome {
                    out.push_str(&format!(
                        "{n},{c},{seed},{method},{val}\n",
                        method = m.method.as_str(),
                        val = fmt_sig(r)
                    ));
                }
            }
            out.push_str(&format!(
                "{n},{c},{seed},joint_bound,{val}\n",
                val = fmt_sig(report.joint_r_s0())
            ));
            Ok(out)
        })
        .collect();
    let mut csv = String::from("n,c,seed,method,r_s0\n");
    for chunk in chunks? {
        csv.push_str(&chunk);
    }
    Ok(csv)
}

struct RepOutcome {
    smf: Option<f64>,
    matching: Option<f64>,
    oracle: Option<f64>,
    excluded: bool,
}

/// Noisy comparison table: one row per (c, n) cell with sums averaged
/// over replications. Replications where any applicable method has no
/// answer are flagged in the `infeasible` column and excluded from every
/// average; the joint-oracle column is "na" past its size cap.
pub fn run_table(config: &ExperimentConfig) -> Result<String> {
    config.validate()?;
    if config.mode != Mode::Noisy {
        return Err(Error::InvalidArgument("table runs in noisy mode".into()));
    }
    let mut jobs = Vec::new();
    for &c in &config.c_list {
        for &n in &config.n_list {
            for rep in 0..config.replications {
                jobs.push((c, n, config.seed.wrapping_add(rep as u64)));
            }
        }
    }
    let outcomes: Result<Vec<RepOutcome>> = jobs
        .par_iter()
        .map(|&(c, n, seed)| -> Result<RepOutcome> {
            let inst = NetworkInstance::generate(n, c, seed, config.sink)?;
            let report = solve_instance(config, &inst)?;
            let sum_of = |method: Method| -> Option<f64> {
                report
                    .methods
                    .iter()
                    .find(|m| m.method == method)
                    .and_then(|m| m.outcome.sum())
            };
            let smf = sum_of(Method::Smf);
            let matching = sum_of(Method::Matching);
            let oracle = sum_of(Method::SwOracle);
            let oracle_applies = n <= SW_ORACLE_NODE_CAP;
            let excluded =
                smf.is_none() || matching.is_none() || (oracle_applies && oracle.is_none());
            Ok(RepOutcome {
                smf,
                matching,
                oracle,
                excluded,
            })
        })
        .collect();
    let outcomes = outcomes?;

    let mut csv = String::from("c,n,seed,replications,infeasible,smf,matching,oracle\n");
    let reps = config.replications;
    for (cell, chunk) in outcomes.chunks(reps).enumerate() {
        let (c, n, _) = jobs[cell * reps];
        let included: Vec<&RepOutcome> = chunk.iter().filter(|o| !o.excluded).collect();
        let excluded = chunk.len() - included.len();
        let mean = |pick: fn(&RepOutcome) -> Option<f64>| -> f64 {
            let vals: Vec<f64> = included.iter().filter_map(|o| pick(o)).collect();
            if vals.is_empty() || vals.len() < included.len() {
                f64::NAN
            } else {
                vals.iter().sum::<f64>() / vals.len() as f64
            }
        };
        csv.push_str(&format!(
            "{c},{n},{seed},{reps},{excluded},{smf},{matching},{oracle}\n",
            seed = config.seed,
            smf = fmt_sig(mean(|o| o.smf)),
            matching = fmt_sig(mean(|o| o.matching)),
            oracle = fmt_sig(mean(|o| o.oracle)),
        ));
    }
    Ok(csv)
}
