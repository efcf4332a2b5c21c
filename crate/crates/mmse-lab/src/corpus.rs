//! Named input distributions shared by the test suites and the `check`
//! subcommand.
//!
//! The corpus collects the families that exercise every code path worth
//! exercising: Gaussians of several variances (closed forms available),
//! symmetric and heavily skewed binary inputs (atom kernels, fast tail
//! decay), 4-PAM (multi-atom constellations), and two-component Gaussian
//! mixtures (continuous but non-Gaussian, one of them engineered so its
//! mean-square error stays strictly between the matching Gaussian
//! envelopes at every signal-to-noise ratio).
//!
//! Three views are exposed: the full default corpus, the unit-power
//! members (for capacity comparisons that fix the power constraint), and
//! the purely continuous members (for differential-entropy and entropy
//! power checks).

use crate::distributions::InputDistribution;
use crate::error::{Error, Result};

/// Standard Gaussian, N(0, 1).
pub fn gaussian_unit() -> InputDistribution {
    InputDistribution::make_gaussian(0.0, 1.0).expect("unit Gaussian is valid")
}

/// Low-variance Gaussian, N(0, 1/4).
pub fn gaussian_quarter() -> InputDistribution {
    InputDistribution::make_gaussian(0.0, 0.25).expect("quarter-variance Gaussian is valid")
}

/// High-variance Gaussian, N(0, 4).
pub fn gaussian_four() -> InputDistribution {
    InputDistribution::make_gaussian(0.0, 4.0).expect("four-variance Gaussian is valid")
}

/// Equiprobable binary input on {-1, +1}; unit power.
pub fn binary_pm1() -> InputDistribution {
    InputDistribution::make_discrete(&[(-1.0, 0.5), (1.0, 0.5)]).expect("binary input is valid")
}

/// Equiprobable binary input on {-sqrt(2), +sqrt(2)}; second moment 2.
///
/// The canonical example whose error curve crosses the unit-variance
/// Gaussian reference exactly once.
pub fn binary_sqrt2() -> InputDistribution {
    let r = 2.0f64.sqrt();
    InputDistribution::make_discrete(&[(-r, 0.5), (r, 0.5)]).expect("binary input is valid")
}

/// Zero-mean skewed binary input: 0.05 with probability 0.99 and -4.95
/// with probability 0.01; variance 0.2475.
///
/// Its error curve starts well below the unit Gaussian yet decays faster
/// than any of the symmetric corpus members at high signal-to-noise
/// ratio.
pub fn skewed_binary() -> InputDistribution {
    InputDistribution::make_discrete(&[(0.05, 0.99), (-4.95, 0.01)])
        .expect("skewed binary input is valid")
}

/// Equiprobable 4-PAM constellation {-3, -1, +1, +3} / sqrt(5); unit
/// power.
pub fn pam4() -> InputDistribution {
    let s = 5.0f64.sqrt();
    InputDistribution::make_discrete(&[
        (-3.0 / s, 0.25),
        (-1.0 / s, 0.25),
        (1.0 / s, 0.25),
        (3.0 / s, 0.25),
    ])
    .expect("4-PAM constellation is valid")
}

/// Symmetric pair of Gaussian components: half N(-sqrt(1/2), 1/2) plus
/// half N(+sqrt(1/2), 1/2); zero mean, unit power, purely continuous.
pub fn symmetric_gaussian_pair() -> InputDistribution {
    let m = 0.5f64.sqrt();
    let g = |mu: f64| InputDistribution::make_gaussian(mu, 0.5).expect("component is valid");
    InputDistribution::mix(&[(g(-m), 0.5), (g(m), 0.5)]).expect("mixture is valid")
}

/// Gaussian-plus-binary sum: half N(-sqrt(3), 1) plus half N(+sqrt(3), 1);
/// zero mean, variance 4.
///
/// Equivalent to Z + sqrt(3) B with Z standard normal and B = +-1
/// equiprobable, independent. Its mean-square error is sandwiched
/// strictly between 1/(1+snr) and 4/(1+4 snr) at every positive
/// signal-to-noise ratio, so the crossing scan against a unit-variance
/// Gaussian reference finds no zero even though the curve starts below
/// the reference.
pub fn high_snr_mixture() -> InputDistribution {
    let m = 3.0f64.sqrt();
    let g = |mu: f64| InputDistribution::make_gaussian(mu, 1.0).expect("component is valid");
    InputDistribution::mix(&[(g(-m), 0.5), (g(m), 0.5)]).expect("mixture is valid")
}

/// Point mass at `location`: the degenerate input whose mean-square
/// error vanishes identically.
pub fn point_mass(location: f64) -> InputDistribution {
    InputDistribution::make_discrete(&[(location, 1.0)]).expect("point mass is valid")
}

/// Every nondegenerate corpus member, paired with its stable name.
pub fn default_corpus() -> Vec<(&'static str, InputDistribution)> {
    vec![
        ("gaussian_unit", gaussian_unit()),
        ("gaussian_quarter", gaussian_quarter()),
        ("gaussian_four", gaussian_four()),
        ("binary_pm1", binary_pm1()),
        ("binary_sqrt2", binary_sqrt2()),
        ("skewed_binary", skewed_binary()),
        ("pam4", pam4()),
        ("symmetric_gaussian_pair", symmetric_gaussian_pair()),
        ("high_snr_mixture", high_snr_mixture()),
    ]
}

/// The members with unit second moment, for comparisons under a common
/// power constraint.
pub fn unit_power_corpus() -> Vec<(&'static str, InputDistribution)> {
    vec![
        ("gaussian_unit", gaussian_unit()),
        ("binary_pm1", binary_pm1()),
        ("pam4", pam4()),
        ("symmetric_gaussian_pair", symmetric_gaussian_pair()),
    ]
}

/// The purely continuous members, for differential-entropy and entropy
/// power checks.
pub fn continuous_corpus() -> Vec<(&'static str, InputDistribution)> {
    vec![
        ("gaussian_unit", gaussian_unit()),
        ("gaussian_quarter", gaussian_quarter()),
        ("gaussian_four", gaussian_four()),
        ("symmetric_gaussian_pair", symmetric_gaussian_pair()),
        ("high_snr_mixture", high_snr_mixture()),
    ]
}

/// Resolve a corpus by its command-line name.
pub fn corpus_by_name(name: &str) -> Result<Vec<(&'static str, InputDistribution)>> {
    match name {
        "default" => Ok(default_corpus()),
        "unit-power" => Ok(unit_power_corpus()),
        "continuous" => Ok(continuous_corpus()),
        other => Err(Error::InvalidParameter(format!(
            "unknown corpus '{other}' (expected default, unit-power, or continuous)"
        ))),
    }
}
