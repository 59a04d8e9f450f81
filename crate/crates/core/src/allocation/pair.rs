//! Closed-form optimal rate and power split for a single pair decoded
//! jointly at the sink.

use crate::error::Result;
use crate::model::{ChannelModel, EntropyOracle, RateClamp, RATE_TOL};

/// Optimal two-node allocation. When `feasible`, the rate point lies in
/// the pair's admissible region and both powers respect the peak cap;
/// otherwise no point on the sum-entropy face fits under the caps and the
/// rate/power fields hold the unconstrained face optimum for diagnostics.
#[derive(Debug, Clone, Copy)]
pub struct PairOptimum {
    pub rate_i: f64,
    pub rate_j: f64,
    pub power_i: f64,
    pub power_j: f64,
    pub feasible: bool,
}

impl PairOptimum {
    pub fn sum_power(&self) -> f64 {
        self.power_i + self.power_j
    }
}

/// Minimizes the pair's sum power over its admissible rate region under
/// the per-node peak cap.
///
/// The optimum lies on the face R_i + R_j = H(X_i, X_j): the objective is
/// separable and strictly convex there, with stationary point
/// R_i = H/2 + log2(g_i/g_j)/2 from equating the two marginal power
/// costs. That point is clamped first into the face segment allowed by
/// the conditional-entropy floors, then into the segment where both
/// powers fit under the cap (lowering one rate raises its partner, so
/// both clamps stay on the face). Infeasible when the two segments do
/// not intersect.
pub fn per_pair_power_optimum(
    oracle: &EntropyOracle,
    channel: &ChannelModel,
    i: usize,
    j: usize,
    clamp: RateClamp,
) -> Result<PairOptimum> {
    let pe = oracle.pairwise(i, j)?;
    let h = pe.h_joint;
    let raw = 0.5 * h + 0.5 * (channel.gain(i) / channel.gain(j)).log2();
    // Under the zero floor the reported power is flat below rate zero, so
    // the floored face objective bottoms out at the stationary point
    // clamped into [0, h]; raw mode keeps the analytic point.
    let stationary = match clamp {
        RateClamp::ZeroFloor if h >= 0.0 => raw.clamp(0.0, h),
        _ => raw,
    };
    // Face segment from the admissible region: R_i between its
    // conditional floor and the point where R_j hits its own floor.
    let low_sw = pe.h_i_given_j;
    let high_sw = h - pe.h_j_given_i;
    // Peak-power caps shrink the segment further: R_i at most the rate the
    // cap supports, and at least the value forcing R_j under its cap.
    let low = low_sw.max(h - channel.max_rate(j));
    let high = high_sw.min(channel.max_rate(i));
    if low > high + RATE_TOL {
        let rate_i = stationary.clamp(low_sw, high_sw);
        let rate_j = h - rate_i;
        return Ok(PairOptimum {
            rate_i,
            rate_j,
            power_i: channel.power(i, rate_i, clamp),
            power_j: channel.power(j, rate_j, clamp),
            feasible: false,
        });
    }
    let rate_i = stationary.clamp(low, high.max(low));
    let rate_j = h - rate_i;
    Ok(PairOptimum {
        rate_i,
        rate_j,
        power_i: channel.power(i, rate_i, clamp),
        power_j: channel.power(j, rate_j, clamp),
        feasible: true,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::EntropyOracle;
    use nalgebra::DMatrix;

    // Unit variances, correlation from unit distance at c = 1: the pair
    // whose joint entropy and corner rates anchor the closed form.
    fn half_distance_pair() -> EntropyOracle {
        let rho = (-0.5f64).exp();
        let cov = DMatrix::from_row_slice(2, 2, &[1.0, rho, rho, 1.0]);
        EntropyOracle::from_covariance(cov).unwrap()
    }

    const H_JOINT: f64 = 3.7633269915467985;
    const H_COND: f64 = 1.7162314063661574;
    const H1: f64 = 2.0470955851806411;

    #[test]
    fn symmetric_gains_split_evenly() {
        let oracle = half_distance_pair();
        let channel = ChannelModel::new(vec![1.0, 1.0], f64::INFINITY).unwrap();
        let opt = per_pair_power_optimum(&oracle, &channel, 0, 1, RateClamp::Raw).unwrap();
        assert!(opt.feasible);
        assert!((opt.rate_i - H_JOINT / 2.0).abs() < 1e-12);
        assert!((opt.rate_j - H_JOINT / 2.0).abs() < 1e-12);
        // Interior optimum beats both corner points of the face.
        let interior = opt.sum_power();
        assert!((interior - 5.3699942603685942).abs() < 1e-9);
        let corner = (2f64.powf(H1) - 1.0) + (2f64.powf(H_COND) - 1.0);
        assert!((corner - 5.4185011479710437).abs() < 1e-9);
        assert!(interior < corner);
    }

    #[test]
    fn skewed_gains_shift_the_split() {
        let oracle = half_distance_pair();
        // A mild gain edge keeps the stationary point inside the narrow
        // admissible segment (half-width about 0.165 bits here).
        let channel = ChannelModel::new(vec![1.2, 1.0], f64::INFINITY).unwrap();
        let opt = per_pair_power_optimum(&oracle, &channel, 0, 1, RateClamp::Raw).unwrap();
        assert!((opt.rate_i - (H_JOINT / 2.0 + 0.5 * 1.2f64.log2())).abs() < 1e-12);
        assert!((opt.rate_i + opt.rate_j - H_JOINT).abs() < 1e-12);
        // Marginal power costs equalize at an interior optimum.
        let slope_i = 2f64.powf(opt.rate_i) / 1.2;
        let slope_j = 2f64.powf(opt.rate_j) / 1.0;
        assert!((slope_i - slope_j).abs() < 1e-9);
    }

    #[test]
    fn corner_clamp_when_stationary_point_escapes() {
        let oracle = half_distance_pair();
        // Gain ratio so extreme the stationary point leaves the face
        // segment; the answer clamps to the corner where i sends its
        // marginal and j its conditional.
        let channel = ChannelModel::new(vec![1e6, 1.0], f64::INFINITY).unwrap();
        let opt = per_pair_power_optimum(&oracle, &channel, 0, 1, RateClamp::Raw).unwrap();
        assert!(opt.feasible);
        assert!((opt.rate_i - H1).abs() < 1e-9);
        assert!((opt.rate_j - H_COND).abs() < 1e-9);
    }

    #[test]
    fn peak_cap_binds_one_side() {
        // Wide admissible region (strong correlation) and a lopsided gain
        // pair: the cap stops the favoured node short of its corner and
        // the partner picks up the slack, staying on the face.
        let rho = 0.95f64;
        let cov = DMatrix::from_row_slice(2, 2, &[1.0, rho, rho, 1.0]);
        let oracle = EntropyOracle::from_covariance(cov).unwrap();
        let p_max = 0.31;
        let channel = ChannelModel::new(vec![10.0, 1.0], p_max).unwrap();
        let opt = per_pair_power_optimum(&oracle, &channel, 0, 1, RateClamp::Raw).unwrap();
        assert!(opt.feasible);
        let h = oracle.pairwise(0, 1).unwrap().h_joint;
        assert!((opt.rate_i + opt.rate_j - h).abs() < 1e-12);
        assert!((opt.rate_i - channel.max_rate(0)).abs() < 1e-12);
        assert!((opt.power_i - p_max).abs() < 1e-9);
        assert!(opt.power_j <= p_max + 1e-9);
    }

    #[test]
    fn symmetric_cap_below_interior_need_is_infeasible() {
        let oracle = half_distance_pair();
        // With equal gains the face fits under a shared cap only if the
        // cap covers the even split; anything less starves one side.
        let need = 2f64.powf(H_JOINT / 2.0) - 1.0;
        let starved = ChannelModel::new(vec![1.0, 1.0], need * 0.99).unwrap();
        let opt = per_pair_power_optimum(&oracle, &starved, 0, 1, RateClamp::Raw).unwrap();
        assert!(!opt.feasible);
        let roomy = ChannelModel::new(vec![1.0, 1.0], need * 1.01).unwrap();
        let opt = per_pair_power_optimum(&oracle, &roomy, 0, 1, RateClamp::Raw).unwrap();
        assert!(opt.feasible);
        assert!((opt.rate_i - H_JOINT / 2.0).abs() < 1e-12);
    }

    #[test]
    fn clamp_mode_floors_reported_powers() {
        // Nearly coincident sources: conditional entropies go negative.
        let rho = 0.999999f64;
        let cov = DMatrix::from_row_slice(2, 2, &[1.0, rho, rho, 1.0]);
        let oracle = EntropyOracle::from_covariance(cov).unwrap();
        let channel = ChannelModel::new(vec![1.0, 1e9], f64::INFINITY).unwrap();
        let raw = per_pair_power_optimum(&oracle, &channel, 0, 1, RateClamp::Raw).unwrap();
        assert!(raw.rate_i < 0.0, "skewed gains park rate_i at a negative floor");
        assert!(raw.power_i < 0.0);
        let floored =
            per_pair_power_optimum(&oracle, &channel, 0, 1, RateClamp::ZeroFloor).unwrap();
        assert_eq!(floored.power_i, 0.0);
        assert!(floored.power_j >= 0.0);
    }
}
