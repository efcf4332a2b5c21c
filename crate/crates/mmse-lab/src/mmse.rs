//! The minimum mean-square error of estimating `X` from `sqrt(snr) X + N`.
//!
//! The value is the integral over the output space of the conditional
//! variance against the output density. With the kernels of [`crate::channel`]
//! this is `E[X^2] - int h_1^2/h_0 dy`; the implementation folds `E[X^2]`
//! into the integrand as `int (h_2 - h_1^2/h_0) dy`, which is the same
//! expression term by term but keeps the integrand pointwise nonnegative,
//! so nothing large cancels after integration and the relative target
//! survives at high signal-to-noise ratio.
//!
//! Truncation: the integrand decays like the output density's Gaussian
//! tails, so the range `|y| <= sqrt(snr) * B + 8` (atom radius `B`) joined
//! with eight output standard deviations of every Gaussian component keeps
//! the neglected mass below 1e-14 of the total.

use crate::channel::{output_truncation_radius, phi, posterior_distribution};
use crate::distributions::InputDistribution;
use crate::error::{Error, Result};
use crate::quadrature::{trapezoid_refine_from, CompensatedSum};
use rayon::prelude::*;
use serde::Serialize;

/// Relative tolerance for the output-space quadrature.
const MMSE_REL_TOL: f64 = 1e-10;
/// Panel-doubling budget for the output-space trapezoid refinement.
const MAX_DOUBLINGS: usize = 18;
/// Tolerance used by the nested-channel consistency contract.
const INCREMENTAL_REL_TOL: f64 = 1e-8;

/// Absolute resolution limit of the output-space error integral. The
/// integrand is a difference of second-moment-scaled kernels, so
/// cancellation leaves roughly this much absolute noise in the result no
/// matter how far the panels refine; demanding convergence below it stalls
/// the refinement (near-degenerate posteriors reached through the
/// nested-channel path, and deep error-curve tails, both land there).
/// Values at or below the floor measure roundoff, not the error curve.
pub(crate) fn abs_noise_floor(dist: &InputDistribution) -> f64 {
    1e-13 * dist.variance() + 1e-14 * dist.second_moment()
}

/// Initial panel count for an output-space integral on a range of width
/// `range`.
///
/// The posterior hand-over between two atoms `x_i, x_j` happens across an
/// output strip of width about `1/(a |x_i - x_j|)`: narrower than the
/// Gaussian envelope whenever the pair is close or the ratio is large. A
/// refinement that starts blind to such a strip can satisfy its stop
/// condition without ever integrating it, so the initial grid is sized to
/// put several panels across the narrowest strip that still carries
/// probability at this ratio. Pairs whose likelihood gap exceeds `e^{-50}`
/// contribute nothing at double precision and do not count. Pure Gaussian
/// parts self-smooth (their output envelopes widen with the ratio), so
/// only atom pairs matter.
pub(crate) fn output_panel_count(dist: &InputDistribution, a: f64, range: f64) -> usize {
    let mut width = 1.0f64;
    let atoms = dist.atoms();
    for (i, ai) in atoms.iter().enumerate() {
        for aj in atoms.iter().skip(i + 1) {
            let d = (ai.location - aj.location).abs();
            if d > 0.0 && a * a * d * d <= 400.0 {
                width = width.min(1.0 / (a * d).max(1.0));
            }
        }
    }
    let needed = (4.0 * range / width).ceil() as usize;
    needed.clamp(64, 1 << 17).next_power_of_two()
}

/// One evaluated point of an error curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurvePoint {
    pub snr: f64,
    pub mmse: f64,
    pub quad_err: f64,
    pub upper_bound: f64,
}

/// An error curve over a strictly increasing grid of signal-to-noise
/// ratios, validated against the structural facts every true curve obeys:
/// values in `[0, min(Var X, 1/snr)]` and non-increasing in `snr`, both up
/// to the reported quadrature error.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MmseCurve {
    pub points: Vec<CurvePoint>,
}

/// Conditional variance times output density at one observation:
/// `h_2 - h_1^2/h_0`, all three kernels in one pass over the parts.
fn var_integrand(dist: &InputDistribution, y: f64, a: f64) -> f64 {
    let mut h0 = CompensatedSum::new();
    let mut h1 = CompensatedSum::new();
    let mut h2 = CompensatedSum::new();
    for at in dist.atoms() {
        let like = at.weight * phi(y - a * at.location);
        h0.add(like);
        h1.add(like * at.location);
        h2.add(like * at.location * at.location);
    }
    for c in dist.components() {
        let s2 = 1.0 + a * a * c.variance;
        let z = (y - a * c.mean) / s2.sqrt();
        let pred = c.weight * phi(z) / s2.sqrt();
        let post_mean = (c.mean + a * c.variance * y) / s2;
        let post_var = c.variance / s2;
        h0.add(pred);
        h1.add(pred * post_mean);
        h2.add(pred * (post_var + post_mean * post_mean));
    }
    let (h0, h1, h2) = (h0.value(), h1.value(), h2.value());
    if h0 <= 0.0 {
        // Every part underflowed: the true integrand is below the underflow
        // threshold as well.
        return 0.0;
    }
    h2 - h1 * h1 / h0
}

/// The minimum mean-square error at one signal-to-noise ratio, with a
/// quadrature error estimate. Exact shortcuts: the prior variance at
/// `snr = 0`, zero for a point mass.
pub fn mmse_at(dist: &InputDistribution, snr: f64) -> Result<(f64, f64)> {
    if !snr.is_finite() || snr < 0.0 {
        return Err(Error::BadSnr(snr));
    }
    let variance = dist.variance();
    if snr == 0.0 {
        return Ok((variance, 0.0));
    }
    if variance == 0.0 {
        return Ok((0.0, 0.0));
    }
    let a = snr.sqrt();
    let radius = output_truncation_radius(dist, a);
    let mut f = |y: f64| -> Result<f64> { Ok(var_integrand(dist, y, a)) };
    let quad = trapezoid_refine_from(
        &mut f,
        -radius,
        radius,
        output_panel_count(dist, a, 2.0 * radius),
        MMSE_REL_TOL,
        abs_noise_floor(dist),
        MAX_DOUBLINGS,
        "mmse output integral",
    )?;
    Ok((quad.value.max(0.0), quad.err))
}

/// Upper bound `min(Var X, 1/snr)`; the variance branch alone at zero
/// signal-to-noise ratio.
pub fn mmse_upper_bound(dist: &InputDistribution, snr: f64) -> f64 {
    dist.variance().min(1.0 / snr)
}

impl MmseCurve {
    /// Evaluate the curve on a strictly increasing grid, in parallel, and
    /// verify the structural invariants.
    pub fn compute(dist: &InputDistribution, grid: &[f64]) -> Result<Self> {
        if grid.is_empty() {
            return Err(Error::InvalidParameter("empty snr grid".into()));
        }
        for w in grid.windows(2) {
            if !(w[1] > w[0]) {
                return Err(Error::InvalidParameter(format!(
                    "snr grid not strictly increasing at {} -> {}",
                    w[0], w[1]
                )));
            }
        }
        let points: Vec<CurvePoint> = grid
            .par_iter()
            .map(|&snr| {
                let (mmse, quad_err) = mmse_at(dist, snr)?;
                Ok(CurvePoint {
                    snr,
                    mmse,
                    quad_err,
                    upper_bound: mmse_upper_bound(dist, snr),
                })
            })
            .collect::<Result<_>>()?;
        let curve = MmseCurve { points };
        curve.check_invariants()?;
        Ok(curve)
    }

    fn check_invariants(&self) -> Result<()> {
        for p in &self.points {
            let slack = p.quad_err + 1e-12 * (1.0 + p.upper_bound);
            if p.mmse > p.upper_bound + slack {
                return Err(Error::InvariantViolation(format!(
                    "mmse {} exceeds bound {} at snr {}",
                    p.mmse, p.upper_bound, p.snr
                )));
            }
        }
        for w in self.points.windows(2) {
            let slack = w[0].quad_err + w[1].quad_err + 1e-12 * (1.0 + w[0].mmse);
            if w[1].mmse > w[0].mmse + slack {
                return Err(Error::InvariantViolation(format!(
                    "mmse increases from snr {} to {}",
                    w[0].snr, w[1].snr
                )));
            }
        }
        Ok(())
    }
}

/// Evaluate the curve on a grid; convenience wrapper over
/// [`MmseCurve::compute`].
pub fn mmse_curve(dist: &InputDistribution, grid: &[f64]) -> Result<MmseCurve> {
    MmseCurve::compute(dist, grid)
}

/// Outcome of checking the affine transformation law
/// `mmse(aX + b, snr) = a^2 mmse(X, a^2 snr)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ShiftScaleReport {
    pub a: f64,
    pub b: f64,
    pub snr: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
    pub tol: f64,
    pub pass: bool,
}

/// Check the affine law at one point by running both sides through
/// independent quadratures.
pub fn mmse_shift_scale_check(
    dist: &InputDistribution,
    a: f64,
    b: f64,
    snr: f64,
    tol: f64,
) -> Result<ShiftScaleReport> {
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!("tolerance {tol} must be > 0")));
    }
    let transformed = dist.affine(a, b);
    let (lhs, _) = mmse_at(&transformed, snr)?;
    let (base, _) = mmse_at(dist, a * a * snr)?;
    let rhs = a * a * base;
    let residual = (lhs - rhs).abs();
    Ok(ShiftScaleReport {
        a,
        b,
        snr,
        lhs,
        rhs,
        residual,
        tol,
        pass: residual <= tol,
    })
}

/// Mean-square error of estimating `X` at extra signal-to-noise ratio
/// `gamma` after already observing the channel at `snr`: the average over
/// first observations of the per-observation error, computed by nesting the
/// posterior-distribution update inside an outer output-space quadrature.
///
/// Contract (checked in tests, not assumed here): the result equals
/// `mmse_at(dist, snr + gamma)`, the two-look identity.
pub fn incremental_mmse(dist: &InputDistribution, snr: f64, gamma: f64) -> Result<f64> {
    if !snr.is_finite() || snr < 0.0 {
        return Err(Error::BadSnr(snr));
    }
    if !gamma.is_finite() || gamma < 0.0 {
        return Err(Error::BadSnr(gamma));
    }
    if snr == 0.0 {
        // No first look: the conditional error is the plain error.
        return Ok(mmse_at(dist, gamma)?.0);
    }
    if gamma == 0.0 {
        // Zero extra light: the error is the conditional variance given the
        // first look, which is the plain error at its ratio.
        return Ok(mmse_at(dist, snr)?.0);
    }
    let a = snr.sqrt();
    let radius = output_truncation_radius(dist, a);
    let mut f = |y: f64| -> Result<f64> {
        let density = crate::channel::kernel_h(dist, y, a, 0)?;
        if density <= 0.0 {
            return Ok(0.0);
        }
        let post = posterior_distribution(dist, y, snr)?;
        Ok(density * mmse_at(&post, gamma)?.0)
    };
    let quad = trapezoid_refine_from(
        &mut f,
        -radius,
        radius,
        output_panel_count(dist, a, 2.0 * radius),
        INCREMENTAL_REL_TOL,
        1e-12 * dist.variance().max(f64::MIN_POSITIVE),
        MAX_DOUBLINGS,
        "incremental mmse outer integral",
    )?;
    Ok(quad.value.max(0.0))
}

/// Error of the best estimator that also sees side information `U` drawn
/// from a finite alphabet: the probability-weighted average of per-value
/// errors.
pub fn conditional_mmse(family: &[(InputDistribution, f64)], snr: f64) -> Result<f64> {
    validate_family(family)?;
    let mut acc = CompensatedSum::new();
    for (dist, p) in family {
        acc.add(p * mmse_at(dist, snr)?.0);
    }
    Ok(acc.value())
}

/// Shared validation for finite side-information families: nonnegative
/// finite probabilities summing to one within 1e-9.
pub(crate) fn validate_family(family: &[(InputDistribution, f64)]) -> Result<()> {
    if family.is_empty() {
        return Err(Error::EmptyDistribution);
    }
    let mut total = 0.0;
    for (_, p) in family {
        if !p.is_finite() || *p < 0.0 {
            return Err(Error::BadWeight(*p));
        }
        total += p;
    }
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::WeightSum(total, 1e-9));
    }
    Ok(())
}
