//! Network instances, Gaussian entropy computations, and the orthogonal
//! channel model.
//!
//! A network is a set of sensor nodes scattered in the plane together with a
//! sink. Sensor readings are jointly Gaussian with a covariance that decays
//! exponentially in the pairwise distance, and each node talks to the sink
//! over an independent AWGN channel whose gain follows an inverse-square
//! path loss.

use crate::error::{Error, Result};
use nalgebra::DMatrix;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Absolute slack used for every inclusive threshold comparison on rates.
///
/// Rates that sit exactly on a boundary (for example a conditional entropy)
/// are produced by the same floating-point formulas that define the
/// boundary, so a small symmetric slack keeps membership tests stable.
pub const RATE_TOL: f64 = 1e-9;

fn log2(x: f64) -> f64 {
    x.ln() / std::f64::consts::LN_2
}

/// 0.5 * log2(2 * pi * e), the additive constant of a unit-variance
/// Gaussian differential entropy in bits.
fn half_log2_2pie() -> f64 {
    0.5 * log2(2.0 * std::f64::consts::PI * std::f64::consts::E)
}

/// A sensor network layout: node positions, a sink, the correlation decay
/// parameter and the common source variance, plus the derived channel gains.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NetworkInstance {
    /// Number of sensor nodes.
    pub n: usize,
    /// Correlation decay parameter; covariance is sigma2 * exp(-c * d_ij).
    pub c: f64,
    /// Common source variance.
    pub sigma2: f64,
    /// Seed the layout was drawn from (0 when constructed by hand).
    pub seed: u64,
    /// Node positions in the plane.
    pub positions: Vec<[f64; 2]>,
    /// Sink position.
    pub sink: [f64; 2],
    /// Channel gains, gamma_i = 1 / d(i, sink)^2.
    pub gains: Vec<f64>,
    /// How many candidate positions were rejected for coinciding with the
    /// sink while drawing this layout.
    #[serde(default)]
    pub resamples: u32,
}

fn dist2(a: [f64; 2], b: [f64; 2]) -> f64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    dx * dx + dy * dy
}

/// Draws `n` positions uniformly from the unit square, resampling any draw
/// that lands exactly on the sink. Returns the positions and the number of
/// rejected draws.
fn draw_positions<R: Rng>(rng: &mut R, n: usize, sink: [f64; 2]) -> (Vec<[f64; 2]>, u32) {
    let mut positions = Vec::with_capacity(n);
    let mut resamples = 0u32;
    for _ in 0..n {
        loop {
            let p = [rng.gen::<f64>(), rng.gen::<f64>()];
            if dist2(p, sink) == 0.0 {
                resamples += 1;
                continue;
            }
            positions.push(p);
            break;
        }
    }
    (positions, resamples)
}

impl NetworkInstance {
    /// Draws a random layout: `n` nodes uniform in the unit square, sink at
    /// the given position, gains from inverse-square path loss. The stream
    /// is ChaCha8 seeded with `seed`, so layouts are reproducible across
    /// platforms.
    pub fn generate(n: usize, c: f64, seed: u64, sink: [f64; 2]) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("need at least one node".into()));
        }
        if !(c > 0.0) || !c.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "correlation parameter must be positive and finite, got {c}"
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (positions, resamples) = draw_positions(&mut rng, n, sink);
        let gains = positions.iter().map(|&p| 1.0 / dist2(p, sink)).collect();
        Ok(NetworkInstance {
            n,
            c,
            sigma2: 1.0,
            seed,
            positions,
            sink,
            gains,
            resamples,
        })
    }

    /// Builds an instance from explicit positions. Gains are derived from
    /// the sink distances; any node sitting on the sink is rejected.
    pub fn from_positions(
        positions: Vec<[f64; 2]>,
        sink: [f64; 2],
        c: f64,
        sigma2: f64,
    ) -> Result<Self> {
        if positions.is_empty() {
            return Err(Error::InvalidArgument("need at least one node".into()));
        }
        if !(c > 0.0) || !c.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "correlation parameter must be positive and finite, got {c}"
            )));
        }
        if !(sigma2 > 0.0) || !sigma2.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "variance must be positive and finite, got {sigma2}"
            )));
        }
        for (i, &p) in positions.iter().enumerate() {
            if dist2(p, sink) == 0.0 {
                return Err(Error::InvalidArgument(format!(
                    "node {i} coincides with the sink"
                )));
            }
        }
        let gains = positions.iter().map(|&p| 1.0 / dist2(p, sink)).collect();
        Ok(NetworkInstance {
            n: positions.len(),
            c,
            sigma2,
            seed: 0,
            positions,
            sink,
            gains,
            resamples: 0,
        })
    }

    /// Euclidean distance between nodes `i` and `j`.
    pub fn node_distance(&self, i: usize, j: usize) -> f64 {
        dist2(self.positions[i], self.positions[j]).sqrt()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("instance serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let inst: NetworkInstance = serde_json::from_str(text)
            .map_err(|e| Error::InvalidArgument(format!("bad instance JSON: {e}")))?;
        if inst.positions.len() != inst.n || inst.gains.len() != inst.n {
            return Err(Error::InvalidArgument(
                "instance JSON has inconsistent lengths".into(),
            ));
        }
        Ok(inst)
    }
}

/// The five entropies attached to a node pair, in bits.
#[derive(Debug, Clone, Copy)]
pub struct PairwiseEntropies {
    pub h_i: f64,
    pub h_j: f64,
    pub h_i_given_j: f64,
    pub h_j_given_i: f64,
    pub h_joint: f64,
}

impl PairwiseEntropies {
    /// Inclusive membership test for the two-node admissible rate region:
    /// both conditional-entropy lower bounds plus the joint sum bound.
    pub fn contains(&self, r_i: f64, r_j: f64) -> bool {
        r_i >= self.h_i_given_j - RATE_TOL
            && r_j >= self.h_j_given_i - RATE_TOL
            && r_i + r_j >= self.h_joint - RATE_TOL
    }
}

/// Entropy computations over a jointly Gaussian source vector.
///
/// All entropies are differential entropies in bits. Determinants are taken
/// through Cholesky factors, so the covariance must be positive definite;
/// duplicate node positions make it singular and are rejected up front.
#[derive(Debug, Clone)]
pub struct EntropyOracle {
    cov: DMatrix<f64>,
}

impl EntropyOracle {
    /// Builds the covariance K_ij = sigma2 * exp(-c * d_ij) from an
    /// instance and checks positive definiteness.
    pub fn from_instance(inst: &NetworkInstance) -> Result<Self> {
        let n = inst.n;
        let mut cov = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                cov[(i, j)] = inst.sigma2 * (-inst.c * inst.node_distance(i, j)).exp();
            }
        }
        Self::from_covariance(cov)
    }

    /// Wraps an explicit covariance matrix.
    pub fn from_covariance(cov: DMatrix<f64>) -> Result<Self> {
        if cov.nrows() != cov.ncols() || cov.nrows() == 0 {
            return Err(Error::InvalidArgument(
                "covariance must be square and nonempty".into(),
            ));
        }
        if cov.clone().cholesky().is_none() {
            return Err(Error::DegenerateCorrelation(
                "covariance is not positive definite".into(),
            ));
        }
        Ok(EntropyOracle { cov })
    }

    pub fn n(&self) -> usize {
        self.cov.nrows()
    }

    pub fn covariance(&self) -> &DMatrix<f64> {
        &self.cov
    }

    fn check_index(&self, i: usize) -> Result<()> {
        if i >= self.n() {
            return Err(Error::InvalidArgument(format!(
                "node index {i} out of range for n = {}",
                self.n()
            )));
        }
        Ok(())
    }

    /// log2 det of the principal submatrix indexed by `subset` (sorted,
    /// deduplicated by the caller).
    fn log2_det(&self, subset: &[usize]) -> Result<f64> {
        let sub = self.cov.select_rows(subset).select_columns(subset);
        let chol = sub
            .cholesky()
            .ok_or_else(|| Error::DegenerateCorrelation("singular submatrix".into()))?;
        let mut acc = 0.0;
        for k in 0..subset.len() {
            acc += chol.l()[(k, k)].ln();
        }
        Ok(2.0 * acc / std::f64::consts::LN_2)
    }

    fn canonical_subset(&self, subset: &[usize]) -> Result<Vec<usize>> {
        let mut s = subset.to_vec();
        s.sort_unstable();
        s.dedup();
        if s.len() != subset.len() {
            return Err(Error::InvalidArgument("subset has repeated indices".into()));
        }
        if let Some(&last) = s.last() {
            self.check_index(last)?;
        }
        Ok(s)
    }

    /// Marginal entropy H(X_i) in bits.
    pub fn marginal(&self, i: usize) -> Result<f64> {
        self.check_index(i)?;
        Ok(half_log2_2pie() + 0.5 * log2(self.cov[(i, i)]))
    }

    /// Joint entropy H(X_S) in bits.
    pub fn joint(&self, subset: &[usize]) -> Result<f64> {
        let s = self.canonical_subset(subset)?;
        if s.is_empty() {
            return Ok(0.0);
        }
        Ok(s.len() as f64 * half_log2_2pie() + 0.5 * self.log2_det(&s)?)
    }

    /// Conditional entropy H(X_i | X_j) in bits.
    pub fn conditional(&self, i: usize, j: usize) -> Result<f64> {
        self.check_index(i)?;
        self.check_index(j)?;
        if i == j {
            return Err(Error::InvalidArgument(
                "conditional entropy needs two distinct nodes".into(),
            ));
        }
        Ok(self.joint(&[i, j])? - self.marginal(j)?)
    }

    /// All five entropies for the pair (i, j).
    pub fn pairwise(&self, i: usize, j: usize) -> Result<PairwiseEntropies> {
        let h_i = self.marginal(i)?;
        let h_j = self.marginal(j)?;
        let h_joint = self.joint(&[i, j])?;
        Ok(PairwiseEntropies {
            h_i,
            h_j,
            h_i_given_j: h_joint - h_j,
            h_j_given_i: h_joint - h_i,
            h_joint,
        })
    }

    /// Conditional entropy H(X_S | X_{S^c}) in bits, where the complement
    /// is taken within the full node set.
    pub fn subset_conditional(&self, subset: &[usize]) -> Result<f64> {
        let s = self.canonical_subset(subset)?;
        if s.is_empty() {
            return Ok(0.0);
        }
        let complement: Vec<usize> = (0..self.n()).filter(|k| !s.contains(k)).collect();
        if complement.is_empty() {
            return self.joint(&s);
        }
        let full = self.log2_det(&(0..self.n()).collect::<Vec<_>>())?;
        let comp = self.log2_det(&complement)?;
        Ok(s.len() as f64 * half_log2_2pie() + 0.5 * (full - comp))
    }
}

/// Whether rate-to-power conversions floor negative rates at zero.
///
/// Rates that come out of the unconstrained closed forms can be negative;
/// the floor interprets a negative target as "send nothing", which charges
/// zero power instead of a negative surrogate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RateClamp {
    /// Evaluate (2^R - 1) / gamma as written, even for negative R.
    Raw,
    /// Floor the rate at zero before converting.
    ZeroFloor,
}

/// Orthogonal AWGN channels from each node to the sink, capacity
/// C_i(P) = log2(1 + gamma_i * P), with a common peak power cap.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChannelModel {
    gains: Vec<f64>,
    peak_power: f64,
}

impl ChannelModel {
    /// `peak_power` may be `f64::INFINITY` for the uncapped model.
    pub fn new(gains: Vec<f64>, peak_power: f64) -> Result<Self> {
        if gains.is_empty() {
            return Err(Error::InvalidArgument("need at least one gain".into()));
        }
        for (i, &g) in gains.iter().enumerate() {
            if !(g > 0.0) || !g.is_finite() {
                return Err(Error::InvalidArgument(format!(
                    "gain {i} must be positive and finite, got {g}"
                )));
            }
        }
        if !(peak_power > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "peak power must be positive, got {peak_power}"
            )));
        }
        Ok(ChannelModel { gains, peak_power })
    }

    pub fn from_instance(inst: &NetworkInstance, peak_power: f64) -> Result<Self> {
        Self::new(inst.gains.clone(), peak_power)
    }

    pub fn n(&self) -> usize {
        self.gains.len()
    }

    pub fn gain(&self, i: usize) -> f64 {
        self.gains[i]
    }

    pub fn peak_power(&self) -> f64 {
        self.peak_power
    }

    /// Channel capacity in bits at transmit power `power`.
    pub fn capacity(&self, i: usize, power: f64) -> f64 {
        log2(1.0 + self.gains[i] * power)
    }

    /// Largest rate node `i` can sustain under the peak power cap.
    pub fn max_rate(&self, i: usize) -> f64 {
        if self.peak_power.is_infinite() {
            f64::INFINITY
        } else {
            self.capacity(i, self.peak_power)
        }
    }

    /// Minimum power that sustains `rate`; errors on negative rates so the
    /// caller has to decide how to treat them (see [`RateClamp`]).
    pub fn power_for_rate(&self, i: usize, rate: f64) -> Result<f64> {
        if rate < 0.0 {
            return Err(Error::InvalidArgument(format!(
                "rate must be nonnegative, got {rate}"
            )));
        }
        Ok((rate.exp2() - 1.0) / self.gains[i])
    }

    /// Rate-to-power conversion with an explicit negative-rate policy.
    pub fn power(&self, i: usize, rate: f64, clamp: RateClamp) -> f64 {
        let r = match clamp {
            RateClamp::Raw => rate,
            RateClamp::ZeroFloor => rate.max(0.0),
        };
        (r.exp2() - 1.0) / self.gains[i]
    }

    /// Whether `rate` fits under the peak power cap, with inclusive slack.
    pub fn rate_fits(&self, i: usize, rate: f64) -> bool {
        rate <= self.max_rate(i) + RATE_TOL
    }
}
