//! Channel-capacity applications of the error-integral machinery: the
//! wiretap secrecy rate, the degraded broadcast region with a full numeric
//! converse chain, and the Gaussian entropy-power inequality check.
//!
//! All rates are in nats and the power constraint is normalized to one;
//! other powers reduce to this case by the affine transformation law.

use crate::distributions::InputDistribution;
use crate::error::{Error, Result};
use crate::infotheory::{differential_entropy, integrate_mmse_over, mutual_information};
use crate::mmse::{conditional_mmse, mmse_at, validate_family};
use crate::quadrature::{adaptive_simpson, lin_grid, log_grid};
use serde::Serialize;

/// Slack granted to the converse inequalities over the pure theory; covers
/// accumulated quadrature error on both sides.
const CONVERSE_SLACK: f64 = 1e-6;
/// Allowed overshoot of the per-ratio band check inside the converse.
const BAND_SLACK: f64 = 1e-8;
/// Power budget slack: second moments up to `1 + POWER_SLACK` count as
/// satisfying the unit constraint.
const POWER_SLACK: f64 = 1e-9;

/// Secrecy capacity of the degraded pair of channels at ratios
/// `snr1 >= snr2`: `0.5 ln((1+snr1)/(1+snr2))`.
pub fn secrecy_capacity(snr1: f64, snr2: f64) -> Result<f64> {
    validate_snr_pair(snr1, snr2)?;
    Ok(0.5 * ((1.0 + snr1) / (1.0 + snr2)).ln())
}

/// Achievable secrecy rate of a unit-power input: half the integral of its
/// error curve between the two ratios. Never exceeds [`secrecy_capacity`],
/// with equality for the standard Gaussian input.
pub fn secrecy_gap(dist: &InputDistribution, snr1: f64, snr2: f64) -> Result<f64> {
    validate_snr_pair(snr1, snr2)?;
    enforce_unit_power(dist.moment(2, false)?)?;
    Ok(0.5 * integrate_mmse_over(dist, snr2, snr1)?)
}

fn validate_snr_pair(snr1: f64, snr2: f64) -> Result<()> {
    if !snr2.is_finite() || snr2 < 0.0 {
        return Err(Error::BadSnr(snr2));
    }
    if !snr1.is_finite() || snr1 < snr2 {
        return Err(Error::SnrOrder { snr1, snr2 });
    }
    Ok(())
}

fn enforce_unit_power(second_moment: f64) -> Result<()> {
    if second_moment > 1.0 + POWER_SLACK {
        return Err(Error::PowerViolation(second_moment));
    }
    Ok(())
}

/// One boundary point of the two-user broadcast region.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CapacityRegionSample {
    pub alpha: f64,
    pub r1: f64,
    pub r2: f64,
}

/// Boundary of the two-user degraded broadcast region at the given power
/// splits: `r1 = 0.5 ln(1 + alpha snr1)`,
/// `r2 = 0.5 ln((1 + snr2)/(1 + alpha snr2))`.
pub fn broadcast_region(
    snr1: f64,
    snr2: f64,
    alphas: &[f64],
) -> Result<Vec<CapacityRegionSample>> {
    validate_snr_pair(snr1, snr2)?;
    alphas
        .iter()
        .map(|&alpha| {
            if !(0.0..=1.0).contains(&alpha) {
                return Err(Error::AlphaRange(alpha));
            }
            Ok(CapacityRegionSample {
                alpha,
                r1: 0.5 * (1.0 + alpha * snr1).ln(),
                r2: 0.5 * ((1.0 + snr2) / (1.0 + alpha * snr2)).ln(),
            })
        })
        .collect()
}

/// Everything the broadcast converse chain computes on its way to placing
/// the operating pair inside the region.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BroadcastConverseReport {
    pub snr1: f64,
    pub snr2: f64,
    /// Power split recovered from the weak user's conditional information.
    pub alpha: f64,
    /// Ratio at which the conditional error meets the split's reference
    /// curve.
    pub snr0: f64,
    /// Residual of the meeting condition at `snr0`.
    pub snr0_residual: f64,
    pub i_xz_given_u: f64,
    pub i_xz: f64,
    pub i_uz: f64,
    pub i_xy_given_u: f64,
    pub r1_bound: f64,
    pub r2_bound: f64,
    /// `r1_bound - i_xy_given_u`; nonnegative when the pair is inside.
    pub r1_slack: f64,
    /// `r2_bound - i_uz`; nonnegative when the pair is inside.
    pub r2_slack: f64,
    /// Worst overshoot of the conditional error above the reference curve
    /// on the band between the two ratios; nonpositive means clean.
    pub band_violation: f64,
}

/// Run the full converse chain for a finite side-information family:
/// recover the power split from the weak user's conditional information,
/// certify the intermediate-value ratio, check the between-band
/// domination, and place the operating pair inside the region.
///
/// A failed inequality here contradicts the converse theorem, so it
/// surfaces as an error rather than a report.
pub fn broadcast_converse_check(
    family: &[(InputDistribution, f64)],
    snr1: f64,
    snr2: f64,
) -> Result<BroadcastConverseReport> {
    validate_snr_pair(snr1, snr2)?;
    if snr2 <= 0.0 {
        return Err(Error::InvalidParameter(
            "converse chain needs a positive weak-user ratio".into(),
        ));
    }
    validate_family(family)?;
    let parts: Vec<(InputDistribution, f64)> =
        family.iter().map(|(d, p)| (d.clone(), *p)).collect();
    let marginal = InputDistribution::mix(&parts)?;
    enforce_unit_power(marginal.moment(2, false)?)?;

    // Conditional and marginal informations at the weak user.
    let mut i_xz_given_u = 0.0;
    for (d, p) in family {
        i_xz_given_u += p * mutual_information(d, snr2)?;
    }
    let i_xz = mutual_information(&marginal, snr2)?;
    let i_uz = i_xz - i_xz_given_u;

    // The power split solving the weak user's conditional information.
    let alpha_raw = ((2.0 * i_xz_given_u).exp() - 1.0) / snr2;
    if !(-1e-9..=1.0 + 1e-9).contains(&alpha_raw) {
        return Err(Error::InvariantViolation(format!(
            "recovered power split {alpha_raw} escapes [0, 1]"
        )));
    }
    let alpha = alpha_raw.clamp(0.0, 1.0);

    // The conditional error meets the split's reference curve somewhere in
    // [0, snr2]; locate it by bisection on the sampled sign change, falling
    // back to the least-residual sample for the degenerate all-Gaussian
    // family whose difference vanishes identically.
    let g = |gamma: f64| -> Result<f64> {
        Ok(conditional_mmse(family, gamma)? - alpha / (alpha * gamma + 1.0))
    };
    let grid = lin_grid(0.0, snr2, 129);
    let mut bracket = None;
    let mut best = (f64::INFINITY, 0.0);
    let mut prev: Option<(f64, f64)> = None;
    for &gamma in &grid {
        let v = g(gamma)?;
        if v.abs() < best.0 {
            best = (v.abs(), gamma);
        }
        if let Some((pg, pv)) = prev {
            if pv > 0.0 && v < 0.0 {
                bracket = Some((pg, gamma, pv));
                break;
            }
        }
        prev = Some((gamma, v));
    }
    let (snr0, snr0_residual) = match bracket {
        Some((mut lo, mut hi, mut g_lo)) => {
            while hi - lo > 1e-10 * (1.0 + 0.5 * (lo + hi)) {
                let mid = 0.5 * (lo + hi);
                let g_mid = g(mid)?;
                if (g_mid > 0.0) == (g_lo > 0.0) {
                    lo = mid;
                    g_lo = g_mid;
                } else {
                    hi = mid;
                }
            }
            let snr0 = 0.5 * (lo + hi);
            (snr0, g(snr0)?.abs())
        }
        None => {
            if best.0 > CONVERSE_SLACK {
                return Err(Error::InvariantViolation(format!(
                    "conditional error never meets the reference curve on \
                     [0, {snr2}]; best residual {}",
                    best.0
                )));
            }
            (best.1, best.0)
        }
    };

    // Between the two ratios the conditional error must sit below the
    // reference curve.
    let mut band_violation = f64::NEG_INFINITY;
    for &gamma in log_grid(snr2, snr1, 60).iter() {
        let v = g(gamma)?;
        band_violation = band_violation.max(v);
        if v > BAND_SLACK {
            return Err(Error::InvariantViolation(format!(
                "conditional error exceeds the reference curve by {v} at \
                 ratio {gamma}"
            )));
        }
    }

    // Strong-user conditional information, then the region placement.
    let mut i_xy_given_u = 0.0;
    for (d, p) in family {
        i_xy_given_u += p * mutual_information(d, snr1)?;
    }
    let r1_bound = 0.5 * (1.0 + alpha * snr1).ln();
    let r2_bound = 0.5 * ((1.0 + snr2) / (1.0 + alpha * snr2)).ln();
    let r1_slack = r1_bound - i_xy_given_u;
    let r2_slack = r2_bound - i_uz;
    if r1_slack < -CONVERSE_SLACK || r2_slack < -CONVERSE_SLACK {
        return Err(Error::InvariantViolation(format!(
            "operating pair ({i_xy_given_u}, {i_uz}) escapes the region \
             corner ({r1_bound}, {r2_bound})"
        )));
    }

    Ok(BroadcastConverseReport {
        snr1,
        snr2,
        alpha,
        snr0,
        snr0_residual,
        i_xz_given_u,
        i_xz,
        i_uz,
        i_xy_given_u,
        r1_bound,
        r2_bound,
        r1_slack,
        r2_slack,
        band_violation,
    })
}

/// Sides and margin of the Gaussian entropy-power check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EpiReport {
    pub var_z: f64,
    /// Differential entropy of the input alone.
    pub h_x: f64,
    /// Differential entropy of input plus independent Gaussian.
    pub h_sum: f64,
    /// `e^{2 h_sum}`.
    pub lhs: f64,
    /// `e^{2 h_x} + 2 pi e var_z`.
    pub rhs: f64,
    /// `lhs - rhs`; nonnegative up to tolerance.
    pub margin: f64,
    /// Smallest cumulative error-difference against the matched-entropy
    /// Gaussian across the checked grid; nonnegative up to tolerance.
    pub min_cumulative: f64,
}

/// Check the Gaussian-noise entropy-power inequality for a continuous
/// input: `e^{2h(X+Z)} >= e^{2h(X)} + 2 pi e var_z` with
/// `Z ~ N(0, var_z)`, both entropies through the error-integral path.
///
/// Also walks the underlying proof quantity: against the Gaussian `a W`
/// matched to the input's entropy, the cumulative difference
/// `0.5 int_0^s [mmse(X, gamma) - a^2/(1 + a^2 gamma)] dgamma` must stay
/// nonnegative along the whole ratio axis.
pub fn epi_gaussian_check(dist: &InputDistribution, var_z: f64) -> Result<EpiReport> {
    if !var_z.is_finite() || var_z <= 0.0 {
        return Err(Error::BadVariance(var_z));
    }
    if !dist.is_continuous() {
        return Err(Error::NotContinuous);
    }
    let h_x = differential_entropy(dist)?;
    let noise = InputDistribution::make_gaussian(0.0, var_z)?;
    let sum = dist.convolve(&noise)?;
    let h_sum = differential_entropy(&sum)?;
    let two_pi_e = 2.0 * std::f64::consts::PI * std::f64::consts::E;
    let lhs = (2.0 * h_sum).exp();
    let rhs = (2.0 * h_x).exp() + two_pi_e * var_z;
    let margin = lhs - rhs;

    // Matched-entropy Gaussian scale.
    let a2 = (2.0 * h_x).exp() / two_pi_e;
    let diff = |gamma: f64| -> Result<f64> {
        Ok(mmse_at(dist, gamma)?.0 - a2 / (1.0 + a2 * gamma))
    };
    let checkpoints = log_grid(1e-2, 100.0, 12);
    let mut cumulative = 0.0;
    let mut min_cumulative = f64::INFINITY;
    let mut lo = 0.0f64;
    for &s in &checkpoints {
        let mut f = |u: f64| -> Result<f64> {
            let eu = u.exp();
            diff(eu - 1.0).map(|d| d * eu)
        };
        let seg = adaptive_simpson(
            &mut f,
            (1.0 + lo).ln(),
            (1.0 + s).ln(),
            1e-10,
            36,
            "entropy-power cumulative segment",
        )?;
        cumulative += 0.5 * seg.value;
        min_cumulative = min_cumulative.min(cumulative);
        lo = s;
    }

    Ok(EpiReport {
        var_z,
        h_x,
        h_sum,
        lhs,
        rhs,
        margin,
        min_cumulative,
    })
}
