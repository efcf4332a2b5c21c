//! Kernels and posterior summaries of the scalar Gaussian channel
//! `Y = sqrt(snr) * X + N` with standard Gaussian noise `N`.
//!
//! The central objects are the kernels `h_i(y; a) = E[X^i phi(y - aX)]`
//! with `a = sqrt(snr)`. `h_0` is the output density, `h_1/h_0` the
//! conditional mean, and ratios `h_i/h_0` the raw posterior moments from
//! which the central moments `M_i` follow. For the distribution class of
//! this crate the posterior law itself stays in the class: atom weights are
//! reweighted by the likelihood and each Gaussian component updates by the
//! usual conjugate rule. This module exposes both views: the kernel values
//! and the updated posterior distribution.
//!
//! Numerics: per-component kernel integrals complete the Gaussian factors
//! into the quadrature weight, so the Gauss-Hermite path only sees a
//! polynomial of degree at most [`KERNEL_ORDER_CAP`] and the refinement
//! schedule certifies convergence on the first doubling. Posterior weights
//! are normalized through a log-sum-exp pass so far-tail observations do
//! not underflow.

use crate::distributions::InputDistribution;
use crate::error::{Error, Result};
use crate::quadrature::{gauss_hermite, CompensatedSum, GAUSS_HERMITE_SCHEDULE};

/// Largest supported kernel order.
pub const KERNEL_ORDER_CAP: usize = 16;
/// Largest supported posterior central moment order.
pub const POSTERIOR_ORDER_CAP: usize = 8;
/// Relative change at which the Gauss-Hermite refinement stops.
const KERNEL_REL_TOL: f64 = 1e-10;
/// Binomial recombination falls back to a direct centered pass when the
/// result is this small relative to the largest term (lost significance).
const CANCELLATION_GUARD: f64 = 1e-6;

pub(crate) const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

/// Standard Gaussian density.
#[inline]
pub(crate) fn phi(t: f64) -> f64 {
    (-0.5 * t * t - LN_SQRT_2PI).exp()
}

/// Density of `N(mean, var)` at `x`.
#[inline]
pub(crate) fn normal_pdf(x: f64, mean: f64, var: f64) -> f64 {
    let z = (x - mean) / var.sqrt();
    (-0.5 * z * z - LN_SQRT_2PI).exp() / var.sqrt()
}

/// Log density of `N(mean, var)` at `x`.
#[inline]
pub(crate) fn ln_normal_pdf(x: f64, mean: f64, var: f64) -> f64 {
    let z = (x - mean) / var.sqrt();
    -0.5 * z * z - LN_SQRT_2PI - 0.5 * var.ln()
}

/// Channel coordinates: signal-to-noise ratio, its square root, and the
/// observation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelPoint {
    pub snr: f64,
    pub a: f64,
    pub y: f64,
}

impl ChannelPoint {
    pub fn new(snr: f64, y: f64) -> Result<Self> {
        if !snr.is_finite() || snr < 0.0 {
            return Err(Error::BadSnr(snr));
        }
        if !y.is_finite() {
            return Err(Error::NonFiniteLocation(y));
        }
        Ok(Self {
            snr,
            a: snr.sqrt(),
            y,
        })
    }
}

/// Conditional mean and central moments of `X` given one observation.
///
/// `central_moment(i)` returns `M_i = E[(X - E[X|Y=y])^i | Y=y]` for
/// `i <= k_max`; `M_0 = 1` and `M_1 = 0` by construction. At zero
/// signal-to-noise ratio the posterior is the prior, so the fields reduce to
/// the prior mean and central moments.
#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorSummary {
    pub point: ChannelPoint,
    pub mean: f64,
    pub density: f64,
    central: Vec<f64>,
}

impl PosteriorSummary {
    pub fn k_max(&self) -> usize {
        self.central.len() + 1
    }

    /// `M_i` for `0 <= i <= k_max`.
    pub fn central_moment(&self, i: usize) -> f64 {
        match i {
            0 => 1.0,
            1 => 0.0,
            _ => self.central[i - 2],
        }
    }
}

/// Per-component conjugate update for likelihood `N(y; a*x, 1)` against the
/// prior component `N(mean, var)`: predictive variance `1 + a^2 var`,
/// posterior mean `(mean + a var y) / (1 + a^2 var)`, posterior variance
/// `var / (1 + a^2 var)`.
#[inline]
fn conjugate_update(mean: f64, var: f64, y: f64, a: f64) -> (f64, f64, f64) {
    let s2 = 1.0 + a * a * var;
    let post_mean = (mean + a * var * y) / s2;
    let post_var = var / s2;
    (s2, post_mean, post_var)
}

/// `E[Z^i]` for `Z ~ N(mean, var)` by Gauss-Hermite quadrature with the
/// doubling schedule. The integrand is a polynomial of degree `i`, so the
/// first comparison already certifies convergence; the schedule is still
/// honored so a regression in the rule construction cannot pass silently.
fn gh_gaussian_moment(mean: f64, var: f64, i: usize) -> Result<f64> {
    let scale = (2.0 * var).sqrt();
    // Odd moments of near-symmetric posteriors are exact zeros; anchor the
    // stop test with the moment's natural magnitude so roundoff-level
    // residue still counts as converged while an O(1) regression does not.
    let magnitude = (mean.abs() + var.sqrt()).powi(i as i32);
    let eval = |n: usize| -> Result<f64> {
        let (nodes, weights) = gauss_hermite(n)?;
        let mut acc = CompensatedSum::new();
        for (t, w) in nodes.iter().zip(weights) {
            acc.add(w * (mean + scale * t).powi(i as i32));
        }
        Ok(acc.value() / std::f64::consts::PI.sqrt())
    };
    let mut prev = eval(GAUSS_HERMITE_SCHEDULE[0])?;
    for &n in &GAUSS_HERMITE_SCHEDULE[1..] {
        let next = eval(n)?;
        let change = (next - prev).abs();
        if change <= KERNEL_REL_TOL * next.abs().max(1e-4 * magnitude) {
            return Ok(next);
        }
        prev = next;
    }
    Err(Error::Quadrature {
        context: format!("gauss-hermite moment of order {i}"),
        achieved: f64::NAN,
        requested: KERNEL_REL_TOL,
    })
}

/// Kernel `h_i(y; a) = E[X^i phi(y - aX)]`.
///
/// Atoms contribute exact finite sums. Gaussian components use the closed
/// conjugate reduction for `i <= 2` and Gauss-Hermite quadrature for
/// `i >= 3`.
pub fn kernel_h(dist: &InputDistribution, y: f64, a: f64, i: usize) -> Result<f64> {
    if !y.is_finite() {
        return Err(Error::NonFiniteLocation(y));
    }
    if !a.is_finite() || a < 0.0 {
        return Err(Error::BadSnr(a));
    }
    if i > KERNEL_ORDER_CAP {
        return Err(Error::KernelOrderCap {
            k: i,
            cap: KERNEL_ORDER_CAP,
        });
    }
    let mut acc = CompensatedSum::new();
    for at in dist.atoms() {
        acc.add(at.weight * at.location.powi(i as i32) * phi(y - a * at.location));
    }
    for c in dist.components() {
        let (s2, post_mean, post_var) = conjugate_update(c.mean, c.variance, y, a);
        let pred = normal_pdf(y, a * c.mean, s2);
        let moment = match i {
            0 => 1.0,
            1 => post_mean,
            2 => post_var + post_mean * post_mean,
            _ => gh_gaussian_moment(post_mean, post_var, i)?,
        };
        acc.add(c.weight * pred * moment);
    }
    Ok(acc.value())
}

/// Output density `h_0(y; sqrt(snr))`, strictly positive for every `y`.
pub fn output_density(dist: &InputDistribution, y: f64, snr: f64) -> Result<f64> {
    let point = ChannelPoint::new(snr, y)?;
    kernel_h(dist, y, point.a, 0)
}

/// Natural log of the output density, computed by log-sum-exp over parts so
/// deep-tail observations stay finite.
pub fn log_output_density(dist: &InputDistribution, y: f64, a: f64) -> Result<f64> {
    if !y.is_finite() {
        return Err(Error::NonFiniteLocation(y));
    }
    if !a.is_finite() || a < 0.0 {
        return Err(Error::BadSnr(a));
    }
    let logs = part_log_likelihoods(dist, y, a);
    let max = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut acc = CompensatedSum::new();
    for l in &logs {
        acc.add((l - max).exp());
    }
    Ok(max + acc.value().ln())
}

/// Log of each part's weighted predictive likelihood, atoms first, then
/// components, in canonical order.
fn part_log_likelihoods(dist: &InputDistribution, y: f64, a: f64) -> Vec<f64> {
    let mut logs = Vec::with_capacity(dist.part_count());
    for at in dist.atoms() {
        let z = y - a * at.location;
        logs.push(at.weight.ln() - 0.5 * z * z - LN_SQRT_2PI);
    }
    for c in dist.components() {
        let s2 = 1.0 + a * a * c.variance;
        logs.push(c.weight.ln() + ln_normal_pdf(y, a * c.mean, s2));
    }
    logs
}

/// Conditional mean `E[X | Y = y]`, the ratio `h_1/h_0` with the shared
/// exponential scale factored out for stability. At `snr = 0` this is the
/// prior mean.
pub fn posterior_mean(dist: &InputDistribution, y: f64, snr: f64) -> Result<f64> {
    let point = ChannelPoint::new(snr, y)?;
    if snr == 0.0 {
        return Ok(dist.mean());
    }
    let (pis, values) = posterior_weights(dist, y, point.a);
    let mut acc = CompensatedSum::new();
    for (pi, v) in pis.iter().zip(&values) {
        acc.add(pi * v.post_mean);
    }
    Ok(acc.value())
}

#[derive(Debug, Clone, Copy)]
struct PartPosterior {
    /// Posterior location: the atom itself, or the updated component mean.
    post_mean: f64,
    /// Zero for atoms, updated variance for components.
    post_var: f64,
}

/// Normalized posterior part weights and per-part posterior parameters.
fn posterior_weights(
    dist: &InputDistribution,
    y: f64,
    a: f64,
) -> (Vec<f64>, Vec<PartPosterior>) {
    let logs = part_log_likelihoods(dist, y, a);
    let max = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut pis: Vec<f64> = logs.iter().map(|l| (l - max).exp()).collect();
    let total: f64 = pis.iter().sum();
    for p in &mut pis {
        *p /= total;
    }
    let mut values = Vec::with_capacity(pis.len());
    for at in dist.atoms() {
        values.push(PartPosterior {
            post_mean: at.location,
            post_var: 0.0,
        });
    }
    for c in dist.components() {
        let (_, post_mean, post_var) = conjugate_update(c.mean, c.variance, y, a);
        values.push(PartPosterior {
            post_mean,
            post_var,
        });
    }
    (pis, values)
}

/// Posterior law of `X` given `Y = y`, as a distribution of the same class:
/// reweighted atoms plus conjugately updated components.
pub fn posterior_distribution(
    dist: &InputDistribution,
    y: f64,
    snr: f64,
) -> Result<InputDistribution> {
    let point = ChannelPoint::new(snr, y)?;
    if snr == 0.0 {
        return Ok(dist.clone());
    }
    let (pis, _) = posterior_weights(dist, y, point.a);
    let mut parts = Vec::with_capacity(dist.part_count());
    let n_atoms = dist.atoms().len();
    for (at, pi) in dist.atoms().iter().zip(&pis[..n_atoms]) {
        if *pi > 0.0 {
            parts.push((
                InputDistribution::make_discrete(&[(at.location, 1.0)])?,
                *pi,
            ));
        }
    }
    for (c, pi) in dist.components().iter().zip(&pis[n_atoms..]) {
        if *pi > 0.0 {
            let (_, post_mean, post_var) = conjugate_update(c.mean, c.variance, y, point.a);
            parts.push((InputDistribution::make_gaussian(post_mean, post_var)?, *pi));
        }
    }
    InputDistribution::mix(&parts)
}

/// Conditional mean and central moments `M_2..M_{k_max}` at one observation.
///
/// Raw posterior moments come from one kernel pass (`h_i/h_0`); central
/// moments follow by binomial recombination around the mean. When the
/// recombination loses more than [`CANCELLATION_GUARD`] of the leading
/// term's magnitude, a direct centered pass replaces it.
pub fn posterior_summary(
    dist: &InputDistribution,
    y: f64,
    snr: f64,
    k_max: usize,
) -> Result<PosteriorSummary> {
    let point = ChannelPoint::new(snr, y)?;
    if k_max < 2 || k_max > POSTERIOR_ORDER_CAP {
        return Err(Error::PosteriorOrderCap {
            k: k_max,
            cap: POSTERIOR_ORDER_CAP,
        });
    }
    if snr == 0.0 {
        let mv = dist.moments(k_max)?;
        return Ok(PosteriorSummary {
            point,
            mean: dist.mean(),
            density: phi(y),
            central: mv.central[1..].to_vec(),
        });
    }

    let a = point.a;
    let (pis, values) = posterior_weights(dist, y, a);
    let n_atoms = dist.atoms().len();

    // Raw posterior moments r_i = h_i / h_0. The shared predictive factor is
    // already folded into the normalized weights, so each component
    // contributes pi_c * E[Z^i] with the Gauss-Hermite path for i >= 3.
    let mut raw = vec![0.0f64; k_max + 1];
    raw[0] = 1.0;
    for i in 1..=k_max {
        let mut acc = CompensatedSum::new();
        for (at, pi) in dist.atoms().iter().zip(&pis[..n_atoms]) {
            acc.add(pi * at.location.powi(i as i32));
        }
        for (v, pi) in values[n_atoms..].iter().zip(&pis[n_atoms..]) {
            let moment = match i {
                1 => v.post_mean,
                2 => v.post_var + v.post_mean * v.post_mean,
                _ => gh_gaussian_moment(v.post_mean, v.post_var, i)?,
            };
            acc.add(pi * moment);
        }
        raw[i] = acc.value();
    }
    let mean = raw[1];

    let mut central = Vec::with_capacity(k_max - 1);
    for i in 2..=k_max {
        let mut acc = CompensatedSum::new();
        let mut max_term = 0.0f64;
        for j in 0..=i {
            let term = binomial(i, j) * raw[j] * (-mean).powi((i - j) as i32);
            max_term = max_term.max(term.abs());
            acc.add(term);
        }
        let mut m_i = acc.value();
        if m_i.abs() < CANCELLATION_GUARD * max_term {
            m_i = centered_moment_direct(dist, &pis, &values, mean, i)?;
        }
        if i == 2 {
            m_i = m_i.max(0.0);
        }
        central.push(m_i);
    }

    let density = log_output_density(dist, y, a)?.exp();
    Ok(PosteriorSummary {
        point,
        mean,
        density,
        central,
    })
}

/// Direct pass for `E[(X - center)^i | y]`: exact centered sums over atoms
/// plus centered Gauss-Hermite integrals over components. Used when the
/// binomial recombination cancels.
fn centered_moment_direct(
    dist: &InputDistribution,
    pis: &[f64],
    values: &[PartPosterior],
    center: f64,
    i: usize,
) -> Result<f64> {
    let n_atoms = dist.atoms().len();
    let mut acc = CompensatedSum::new();
    for (at, pi) in dist.atoms().iter().zip(&pis[..n_atoms]) {
        acc.add(pi * (at.location - center).powi(i as i32));
    }
    for (v, pi) in values[n_atoms..].iter().zip(&pis[n_atoms..]) {
        acc.add(pi * gh_gaussian_moment(v.post_mean - center, v.post_var, i)?);
    }
    Ok(acc.value())
}

/// Sub-Gaussian bound on the posterior tail `P(|X| >= x | Y = y)`:
/// `sqrt(2/pi) * exp(y^2/2) / h_0(y; a) * exp(-a^2 x^2 / 4)`.
///
/// The bound is returned uncapped and can exceed 1; callers comparing with
/// probabilities may clamp it. Requires `a > 0` (at zero signal-to-noise
/// ratio the posterior equals the prior, whose tail the channel cannot
/// bound).
pub fn posterior_tail_bound(dist: &InputDistribution, y: f64, a: f64, x: f64) -> Result<f64> {
    if !a.is_finite() || a <= 0.0 {
        return Err(Error::ZeroSnrTailBound);
    }
    if !x.is_finite() || x <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "tail threshold {x} must be > 0"
        )));
    }
    let log_h0 = log_output_density(dist, y, a)?;
    let ln_bound = 0.5 * (2.0 / std::f64::consts::PI).ln() + 0.5 * y * y - log_h0
        - 0.25 * a * a * x * x;
    Ok(ln_bound.exp())
}

/// Truncation radius for output-space integrals at gain `a`: the discrete
/// image radius plus eight noise standard deviations, joined with eight
/// output standard deviations of every Gaussian component. Keeps neglected
/// Gaussian tail mass below 1e-14.
pub(crate) fn output_truncation_radius(dist: &InputDistribution, a: f64) -> f64 {
    let mut r: f64 = 0.0;
    let atom_radius = dist
        .atoms()
        .iter()
        .map(|at| at.location.abs())
        .fold(0.0f64, f64::max);
    if !dist.atoms().is_empty() {
        r = r.max(a * atom_radius + 8.0);
    }
    for c in dist.components() {
        let sd = (1.0 + a * a * c.variance).sqrt();
        r = r.max((a * c.mean).abs() + 8.0 * sd);
    }
    r
}

/// Binomial coefficient as f64; exact for the small orders used here.
pub(crate) fn binomial(n: usize, k: usize) -> f64 {
    let k = k.min(n - k.min(n));
    let mut c = 1.0f64;
    for j in 0..k {
        c = c * (n - j) as f64 / (j + 1) as f64;
    }
    c
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use statrs::distribution::{ContinuousCDF, Normal};

    fn binary() -> InputDistribution {
        InputDistribution::make_discrete(&[(-1.0, 0.5), (1.0, 0.5)]).unwrap()
    }

    fn delta(c: f64) -> InputDistribution {
        InputDistribution::make_discrete(&[(c, 1.0)]).unwrap()
    }

    fn std_gaussian() -> InputDistribution {
        InputDistribution::make_gaussian(0.0, 1.0).unwrap()
    }

    /// E[Z^k] for N(mean, var) by the analytic recurrence; the independent
    /// reference for the Gauss-Hermite kernel path.
    fn gaussian_moment_recurrence(mean: f64, var: f64, k: usize) -> f64 {
        let (mut prev, mut cur) = (1.0, mean);
        if k == 0 {
            return 1.0;
        }
        for j in 2..=k {
            let next = mean * cur + (j - 1) as f64 * var * prev;
            prev = cur;
            cur = next;
        }
        cur
    }

    #[test]
    fn kernel_point_mass_is_scaled_noise_density() {
        for &(y, a, i) in &[(0.3, 1.0, 0), (-1.2, 2.0, 3), (2.0, 0.5, 5)] {
            let c = 1.7f64;
            let got = kernel_h(&delta(c), y, a, i).unwrap();
            assert_relative_eq!(got, c.powi(i as i32) * phi(y - a * c), max_relative = 1e-14);
        }
    }

    #[test]
    fn kernel_matches_gaussian_convolution_identity() {
        // h_0 for N(0,1) input equals the N(0, 1+a^2) density.
        for &(y, a) in &[(0.0, 1.0), (1.5, 2.0), (-3.0, 0.3)] {
            let got = kernel_h(&std_gaussian(), y, a, 0).unwrap();
            let s = (1.0 + a * a).sqrt();
            assert_relative_eq!(got, phi(y / s) / s, max_relative = 1e-13);
        }
    }

    #[test]
    fn kernel_odd_order_vanishes_by_symmetry() {
        let got = kernel_h(&binary(), 0.0, 1.0, 1).unwrap();
        assert!(got.abs() < 1e-17);
    }

    #[test]
    fn kernel_high_orders_match_moment_recurrence() {
        // Dual route: the shipped path integrates by quadrature, the
        // reference multiplies out the conjugate-posterior moments.
        let mix = InputDistribution::mix(&[
            (InputDistribution::make_gaussian(-0.7, 0.6).unwrap(), 0.4),
            (InputDistribution::make_gaussian(1.1, 2.5).unwrap(), 0.6),
        ])
        .unwrap();
        for &(y, a) in &[(0.4, 0.9), (-1.3, 2.1), (2.2, 0.2)] {
            for i in 3..=8 {
                let got = kernel_h(&mix, y, a, i).unwrap();
                let mut want = 0.0;
                for c in mix.components() {
                    let (s2, pm, pv) = conjugate_update(c.mean, c.variance, y, a);
                    want += c.weight
                        * normal_pdf(y, a * c.mean, s2)
                        * gaussian_moment_recurrence(pm, pv, i);
                }
                assert_relative_eq!(got, want, max_relative = 1e-11);
            }
        }
    }

    #[test]
    fn kernel_rejects_bad_arguments() {
        assert!(kernel_h(&binary(), f64::NAN, 1.0, 0).is_err());
        assert!(kernel_h(&binary(), 0.0, -1.0, 0).is_err());
        assert!(kernel_h(&binary(), 0.0, 1.0, 17).is_err());
    }

    #[test]
    fn output_density_known_values() {
        let got = output_density(&std_gaussian(), 0.0, 1.0).unwrap();
        assert_relative_eq!(
            got,
            1.0 / (4.0 * std::f64::consts::PI).sqrt(),
            max_relative = 1e-14
        );
        for y in [-2.0, 0.3, 5.0] {
            assert_relative_eq!(
                output_density(&binary(), y, 0.0).unwrap(),
                phi(y),
                max_relative = 1e-14
            );
        }
        assert_relative_eq!(
            output_density(&delta(0.0), 2.0, 9.0).unwrap(),
            phi(2.0),
            max_relative = 1e-14
        );
    }

    #[test]
    fn log_output_density_matches_and_extends_linear_path() {
        let mix = InputDistribution::mix(&[
            (binary(), 0.5),
            (InputDistribution::make_gaussian(0.3, 0.7).unwrap(), 0.5),
        ])
        .unwrap();
        for y in [-4.0, -0.5, 1.0, 3.5] {
            let lin = output_density(&mix, y, 2.0).unwrap();
            let log = log_output_density(&mix, y, 2.0f64.sqrt()).unwrap();
            assert_relative_eq!(log, lin.ln(), max_relative = 1e-12);
        }
        // Far tail: the linear path underflows, the log path stays finite.
        let far = log_output_density(&binary(), 60.0, 1.0).unwrap();
        assert!(far.is_finite() && far < -1000.0);
    }

    #[test]
    fn posterior_mean_closed_forms() {
        for &(y, snr) in &[(0.7, 1.0), (-2.0, 4.0), (1.3, 0.25)] {
            let got = posterior_mean(&std_gaussian(), y, snr).unwrap();
            assert_relative_eq!(got, snr.sqrt() * y / (1.0 + snr), max_relative = 1e-13);

            let b = posterior_mean(&binary(), y, snr).unwrap();
            assert_relative_eq!(b, (snr.sqrt() * y).tanh(), max_relative = 1e-12);
        }
        assert_relative_eq!(
            posterior_mean(&binary(), 0.0, 1.0).unwrap(),
            0.0,
            epsilon = 1e-15
        );
        assert_relative_eq!(
            posterior_mean(&delta(2.5), 0.3, 3.0).unwrap(),
            2.5,
            max_relative = 1e-14
        );
        assert_relative_eq!(
            posterior_mean(&binary(), 1.0, 0.0).unwrap(),
            0.0,
            epsilon = 1e-15
        );
    }

    #[test]
    fn posterior_summary_gaussian_moments() {
        for &(y, snr) in &[(0.0, 1.0), (1.7, 0.5), (-2.4, 8.0)] {
            let s = posterior_summary(&std_gaussian(), y, snr, 4).unwrap();
            let v = 1.0 / (1.0 + snr);
            assert_relative_eq!(s.central_moment(2), v, max_relative = 1e-11);
            assert!(s.central_moment(3).abs() < 1e-12);
            assert_relative_eq!(s.central_moment(4), 3.0 * v * v, max_relative = 1e-10);
            assert_relative_eq!(s.mean, snr.sqrt() * y * v, max_relative = 1e-12);
        }
    }

    #[test]
    fn posterior_summary_at_zero_snr_is_prior() {
        let skewed = InputDistribution::make_discrete(&[(0.05, 0.99), (-4.95, 0.01)]).unwrap();
        let s = posterior_summary(&skewed, 1.3, 0.0, 4).unwrap();
        assert_relative_eq!(s.mean, skewed.mean(), epsilon = 1e-15);
        for i in 2..=4 {
            assert_relative_eq!(
                s.central_moment(i),
                skewed.moment(i, true).unwrap(),
                max_relative = 1e-13
            );
        }
        assert_relative_eq!(s.density, phi(1.3), max_relative = 1e-14);
    }

    #[test]
    fn posterior_summary_point_mass_has_zero_spread() {
        let s = posterior_summary(&delta(1.7), 0.4, 2.0, 6).unwrap();
        assert_eq!(s.mean, 1.7);
        for i in 2..=6 {
            assert_eq!(s.central_moment(i), 0.0);
        }
    }

    #[test]
    fn posterior_summary_binary_matches_bayes_table() {
        let (y, snr) = (1.0f64, 1.0f64);
        let a = snr.sqrt();
        let p_plus = phi(y - a) * 0.5;
        let p_minus = phi(y + a) * 0.5;
        let pi = p_plus / (p_plus + p_minus);
        let mean = 2.0 * pi - 1.0;
        let m2 = pi * (1.0 - mean).powi(2) + (1.0 - pi) * (-1.0 - mean).powi(2);
        let s = posterior_summary(&binary(), y, snr, 2).unwrap();
        assert_relative_eq!(s.mean, mean, max_relative = 1e-13);
        assert_relative_eq!(s.central_moment(2), m2, max_relative = 1e-12);
    }

    #[test]
    fn posterior_distribution_reweights_atoms() {
        let (y, snr) = (0.8f64, 2.0f64);
        let a = snr.sqrt();
        let post = posterior_distribution(&binary(), y, snr).unwrap();
        let want_plus = phi(y - a) / (phi(y - a) + phi(y + a));
        assert_eq!(post.atoms().len(), 2);
        assert_relative_eq!(post.atoms()[1].weight, want_plus, max_relative = 1e-13);
        assert_relative_eq!(
            post.mean(),
            posterior_mean(&binary(), y, snr).unwrap(),
            max_relative = 1e-12
        );
    }

    #[test]
    fn posterior_distribution_updates_components() {
        let g = InputDistribution::make_gaussian(0.5, 2.0).unwrap();
        let (y, snr) = (-1.0, 3.0);
        let post = posterior_distribution(&g, y, snr).unwrap();
        let (_, pm, pv) = conjugate_update(0.5, 2.0, y, snr.sqrt());
        assert_eq!(post.components().len(), 1);
        assert_relative_eq!(post.components()[0].mean, pm, max_relative = 1e-14);
        assert_relative_eq!(post.components()[0].variance, pv, max_relative = 1e-14);
    }

    #[test]
    fn tail_bound_dominates_exact_gaussian_tail() {
        // Posterior for N(0,1) at y=0, a=1 is N(0, 1/2).
        let n = Normal::new(0.0, (0.5f64).sqrt()).unwrap();
        for x in [0.5, 1.0, 2.0, 3.0] {
            let exact = 2.0 * n.cdf(-x);
            let bound = posterior_tail_bound(&std_gaussian(), 0.0, 1.0, x).unwrap();
            assert!(bound >= exact, "bound {bound} below exact {exact} at x={x}");
        }
    }

    #[test]
    fn tail_bound_can_exceed_one_and_covers_binary() {
        // True tail is 1 for x below the atom magnitude.
        let bound = posterior_tail_bound(&binary(), 0.0, 1.0, 0.5).unwrap();
        assert!(bound >= 1.0);
        let b2 = posterior_tail_bound(&delta(0.3), 1.0, 2.0, 5.0).unwrap();
        assert!(b2 >= 0.0);
    }

    #[test]
    fn tail_bound_rejects_zero_snr() {
        assert!(matches!(
            posterior_tail_bound(&binary(), 0.0, 0.0, 1.0),
            Err(Error::ZeroSnrTailBound)
        ));
        assert!(posterior_tail_bound(&binary(), 0.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn channel_point_checks_inputs() {
        assert!(ChannelPoint::new(-1.0, 0.0).is_err());
        assert!(ChannelPoint::new(1.0, f64::NAN).is_err());
        let p = ChannelPoint::new(4.0, 1.0).unwrap();
        assert_eq!(p.a, 2.0);
    }
}
