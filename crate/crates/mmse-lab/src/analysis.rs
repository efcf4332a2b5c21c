//! Structural checks on error curves.
//!
//! The centerpiece is the crossing scan: for a reference Gaussian variance
//! `sigma2` the difference `f(gamma) = sigma2/(1 + sigma2 gamma) -
//! mmse(X, gamma)` crosses zero at most once on the positive axis, moving
//! from negative to positive, and is increasing wherever it is negative.
//! The scanner samples `f` on a log grid, brackets sign changes, refines
//! them by bisection, asserts the structural statements on the samples, and
//! classifies the outcome. Two certified crossings contradict the theorem
//! and therefore report as an implementation failure, never as a finding.
//!
//! The remaining checkers evaluate one-line inequalities (Gaussian worst
//! case, mixture concavity, normalized-sum monotonicity, cosine blending,
//! leave-one-out sums) and hand back signed residuals; callers decide what
//! slack to accept.

use crate::distributions::InputDistribution;
use crate::error::{Error, Result};
use crate::mmse::{conditional_mmse, mmse_at};
use crate::quadrature::log_grid;
use rayon::prelude::*;
use serde::Serialize;

/// Sampling plan for crossing scans.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridConfig {
    /// Left end of the log grid (must be positive).
    pub lo: f64,
    /// Right end of the log grid.
    pub hi: f64,
    /// Number of samples.
    pub n: usize,
    /// Values within this band of zero count as touching zero.
    pub zero_band: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            lo: 1e-4,
            hi: 1e4,
            n: 400,
            zero_band: 1e-9,
        }
    }
}

impl GridConfig {
    fn validate(&self) -> Result<()> {
        if !(self.lo > 0.0) || !(self.hi > self.lo) || self.n < 2 {
            return Err(Error::InvalidParameter(format!(
                "bad crossing grid: lo {} hi {} n {}",
                self.lo, self.hi, self.n
            )));
        }
        if !(self.zero_band > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "bad zero band {}",
                self.zero_band
            )));
        }
        Ok(())
    }
}

/// Outcome of a crossing scan.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    /// `f >= 0` across the grid: the reference curve dominates.
    NoCrossingNonneg,
    /// `f` dips negative and never crosses: its tail approaches zero from
    /// below, so no crossing exists beyond the grid either.
    NoCrossingNegativeTailImpossible,
    /// Exactly one certified sign change, negative to positive.
    SingleCrossing,
    /// `f` stays inside the zero band everywhere.
    Identical,
}

/// Report of one crossing scan.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CrossingReport {
    pub sigma2: f64,
    pub classification: Classification,
    /// Refined brackets, at most one for a valid scan.
    pub crossings: Vec<(f64, f64)>,
    /// Sampled `(gamma, f(gamma))` pairs.
    pub f_grid: Vec<(f64, f64)>,
}

impl CrossingReport {
    /// Midpoint of the refined bracket, when a crossing was certified.
    pub fn crossing_point(&self) -> Option<f64> {
        self.crossings.first().map(|(lo, hi)| 0.5 * (lo + hi))
    }
}

/// Scan `f(gamma) = sigma2/(1+sigma2 gamma) - mmse(X, gamma)` for its
/// unique zero.
pub fn single_crossing(
    dist: &InputDistribution,
    sigma2: f64,
    config: &GridConfig,
) -> Result<CrossingReport> {
    if !(sigma2 > 0.0) || !sigma2.is_finite() {
        return Err(Error::BadVariance(sigma2));
    }
    let f = |gamma: f64| -> Result<f64> {
        Ok(sigma2 / (1.0 + sigma2 * gamma) - mmse_at(dist, gamma)?.0)
    };
    crossing_scan(&f, sigma2, config)
}

/// Crossing scan against the side-information error of a finite family.
pub fn conditional_single_crossing(
    family: &[(InputDistribution, f64)],
    sigma2: f64,
    config: &GridConfig,
) -> Result<CrossingReport> {
    if !(sigma2 > 0.0) || !sigma2.is_finite() {
        return Err(Error::BadVariance(sigma2));
    }
    let f = |gamma: f64| -> Result<f64> {
        Ok(sigma2 / (1.0 + sigma2 * gamma) - conditional_mmse(family, gamma)?)
    };
    crossing_scan(&f, sigma2, config)
}

/// Shared engine: sample, bracket, bisect, assert the structural
/// statements, classify.
fn crossing_scan<F>(f: &F, sigma2: f64, config: &GridConfig) -> Result<CrossingReport>
where
    F: Fn(f64) -> Result<f64> + Sync,
{
    config.validate()?;
    let band = config.zero_band;
    let gammas = log_grid(config.lo, config.hi, config.n);
    let values: Vec<f64> = gammas
        .par_iter()
        .map(|&g| f(g))
        .collect::<Result<Vec<f64>>>()?;
    let f_grid: Vec<(f64, f64)> = gammas.iter().cloned().zip(values.iter().cloned()).collect();

    // Certified sign changes: both endpoints strictly outside the band.
    let mut up_changes = Vec::new();
    let mut down_changes = 0usize;
    for i in 0..f_grid.len() - 1 {
        let (_, fl) = f_grid[i];
        let (_, fr) = f_grid[i + 1];
        if fl < -band && fr > band {
            up_changes.push(i);
        } else if fl > band && fr < -band {
            down_changes += 1;
        }
    }
    let total = up_changes.len() + down_changes;
    if total > 1 || down_changes > 0 {
        // More than one crossing, or a positive-to-negative one, cannot
        // happen for a true error curve.
        return Err(Error::CrossingAnomaly { count: total });
    }

    let mut crossings = Vec::new();
    if let Some(&i) = up_changes.first() {
        let (mut lo, mut hi) = (f_grid[i].0, f_grid[i + 1].0);
        let mut f_lo = f_grid[i].1;
        while hi - lo > 1e-8 * (1.0 + 0.5 * (lo + hi)) {
            let mid = 0.5 * (lo + hi);
            let f_mid = f(mid)?;
            if (f_mid < 0.0) == (f_lo < 0.0) {
                lo = mid;
                f_lo = f_mid;
            } else {
                hi = mid;
            }
        }
        crossings.push((lo, hi));
    }

    // Statement checks on the samples. Wherever f is certifiably negative
    // it must be increasing; beyond a certified crossing it must stay
    // nonnegative; and at the far end it must have decayed into the
    // envelope of the two curves.
    for w in f_grid.windows(2) {
        let (g0, f0) = w[0];
        let (_, f1) = w[1];
        if f0 < -band && f1 < f0 {
            return Err(Error::InvariantViolation(format!(
                "difference decreases while negative near gamma {g0}"
            )));
        }
    }
    if let Some(&i) = up_changes.first() {
        for &(g, fv) in &f_grid[i + 1..] {
            if fv < -band {
                return Err(Error::InvariantViolation(format!(
                    "difference negative at gamma {g} after its crossing"
                )));
            }
        }
    }
    let (g_end, f_end) = *f_grid.last().expect("n >= 2");
    let envelope = 1.0 / g_end + sigma2 / (1.0 + sigma2 * g_end);
    if f_end.abs() > envelope {
        return Err(Error::InvariantViolation(format!(
            "tail value {f_end} escapes envelope {envelope}"
        )));
    }

    let max_f = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min_f = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let classification = if !crossings.is_empty() {
        Classification::SingleCrossing
    } else if max_f <= band && min_f >= -band {
        Classification::Identical
    } else if min_f >= -band {
        Classification::NoCrossingNonneg
    } else {
        Classification::NoCrossingNegativeTailImpossible
    };

    Ok(CrossingReport {
        sigma2,
        classification,
        crossings,
        f_grid,
    })
}

/// Worst violation of the Gaussian-is-hardest bound over a grid: the
/// maximum of `mmse(X, gamma) - Var(X)/(1 + Var(X) gamma)`. Nonpositive
/// (within quadrature error) for every true curve.
pub fn check_gaussian_dominance(dist: &InputDistribution, snr_grid: &[f64]) -> Result<f64> {
    if snr_grid.is_empty() {
        return Err(Error::InvalidParameter("empty snr grid".into()));
    }
    let var = dist.variance();
    let violations: Vec<f64> = snr_grid
        .par_iter()
        .map(|&g| {
            if !g.is_finite() || g < 0.0 {
                return Err(Error::BadSnr(g));
            }
            Ok(mmse_at(dist, g)?.0 - var / (1.0 + var * g))
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(violations.into_iter().fold(f64::NEG_INFINITY, f64::max))
}

/// Concavity residual of blending two inputs:
/// `mmse(mix, snr) - [alpha mmse(d0, snr) + (1-alpha) mmse(d1, snr)]`,
/// nonnegative (within quadrature error) for every true curve.
pub fn check_concavity(
    d0: &InputDistribution,
    d1: &InputDistribution,
    alpha: f64,
    snr: f64,
) -> Result<f64> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::AlphaRange(alpha));
    }
    let blend = InputDistribution::mix(&[(d0.clone(), alpha), (d1.clone(), 1.0 - alpha)])?;
    let (mixed, _) = mmse_at(&blend, snr)?;
    let (v0, _) = mmse_at(d0, snr)?;
    let (v1, _) = mmse_at(d1, snr)?;
    Ok(mixed - (alpha * v0 + (1.0 - alpha) * v1))
}

/// Gaps of the normalized independent-sum sequence at one ratio:
/// `mmse(S_{n+1}, snr) - mmse(S_n, snr)` for `n = 1..n_max-1`, where `S_n`
/// is the sum of `n` copies scaled by `1/sqrt(n)`. Each gap is nonnegative
/// for a true curve, and the sequence climbs toward the Gaussian value of
/// equal variance.
pub fn check_sum_monotonicity(
    dist: &InputDistribution,
    n_max: usize,
    snr: f64,
) -> Result<Vec<f64>> {
    if n_max < 2 {
        return Err(Error::InvalidParameter(format!(
            "n_max {n_max} must be at least 2"
        )));
    }
    let mut values = Vec::with_capacity(n_max);
    for n in 1..=n_max {
        let sum = dist.normalized_iid_sum(n)?;
        values.push(mmse_at(&sum, snr)?.0);
    }
    Ok(values.windows(2).map(|w| w[1] - w[0]).collect())
}

/// Cosine-blend residual for independent inputs:
/// `mmse(cos(alpha) X1 + sin(alpha) X2, snr) -
///  [cos^2(alpha) mmse(X1, snr) + sin^2(alpha) mmse(X2, snr)]`,
/// nonnegative for every true pair of curves.
pub fn check_cosine_mix(
    d1: &InputDistribution,
    d2: &InputDistribution,
    alpha: f64,
    snr: f64,
) -> Result<f64> {
    if !alpha.is_finite() {
        return Err(Error::InvalidParameter(format!("bad angle {alpha}")));
    }
    let (c, s) = (alpha.cos(), alpha.sin());
    let blended = d1.affine(c, 0.0).convolve(&d2.affine(s, 0.0))?;
    let (lhs, _) = mmse_at(&blended, snr)?;
    let (v1, _) = mmse_at(d1, snr)?;
    let (v2, _) = mmse_at(d2, snr)?;
    Ok(lhs - (c * c * v1 + s * s * v2))
}

/// Leave-one-out residual for independent inputs with convex weights:
/// `mmse(sum X_i, gamma) - sum_i lambda_i mmse(S_{-i} / sqrt((n-1) lambda_i), gamma)`
/// where `S_{-i}` drops the i-th input. Nonnegative for true curves;
/// zero-weight terms drop out.
pub fn check_tv_inequality(
    dists: &[InputDistribution],
    lambdas: &[f64],
    gamma: f64,
) -> Result<f64> {
    if dists.len() < 2 || dists.len() != lambdas.len() {
        return Err(Error::InvalidParameter(format!(
            "need matching lists of at least two inputs, got {} and {}",
            dists.len(),
            lambdas.len()
        )));
    }
    let mut total = 0.0;
    for &l in lambdas {
        if !l.is_finite() || l < 0.0 {
            return Err(Error::BadWeight(l));
        }
        total += l;
    }
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::WeightSum(total, 1e-9));
    }
    let full = fold_sum(dists)?;
    let (lhs, _) = mmse_at(&full, gamma)?;
    let n = dists.len();
    let mut rhs = 0.0;
    for (i, &l) in lambdas.iter().enumerate() {
        if l == 0.0 {
            continue;
        }
        let rest: Vec<InputDistribution> = dists
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != i)
            .map(|(_, d)| d.clone())
            .collect();
        let partial = fold_sum(&rest)?;
        let scale = 1.0 / ((n - 1) as f64 * l).sqrt();
        let (v, _) = mmse_at(&partial.affine(scale, 0.0), gamma)?;
        rhs += l * v;
    }
    Ok(lhs - rhs)
}

fn fold_sum(dists: &[InputDistribution]) -> Result<InputDistribution> {
    let mut acc = dists[0].clone();
    for d in &dists[1..] {
        acc = acc.convolve(d)?;
    }
    Ok(acc)
}
