//! Information functionals obtained by integrating the error curve.
//!
//! The mutual information between the input and the channel output is half
//! the integral of the error curve from zero up to the operating
//! signal-to-noise ratio. Pushed to infinity the same integral yields the
//! entropy of a discrete input, and a compensated version yields the
//! differential entropy of a continuous one. Derivatives of the mutual
//! information in the ratio are again expectations of posterior-moment
//! polynomials.
//!
//! All values are in nats; unit conversion is presentation-layer business.
//!
//! Wide integration ranges substitute `gamma = e^u - 1` so the adaptive
//! rule works on a logarithmic scale, and the improper integrals close
//! with analytic tail models: geometric decay for discrete inputs,
//! inverse-square approach for continuous ones.

use crate::channel::{output_truncation_radius, posterior_summary};
use crate::distributions::InputDistribution;
use crate::error::{Error, Result};
use crate::mmse::mmse_at;
use crate::quadrature::adaptive_simpson;
use serde::Serialize;

/// Absolute tolerance for the signal-to-noise-space quadratures.
const SNR_QUAD_TOL: f64 = 1e-11;
/// Recursion budget for the signal-to-noise-space quadratures.
const SNR_QUAD_DEPTH: usize = 36;
/// Integrand threshold at which the discrete-entropy range stops growing.
const ENTROPY_TAIL_THRESHOLD: f64 = 1e-12;
/// Largest allowed integration endpoint for improper integrals.
const GAMMA_CAP: f64 = (1u64 << 20) as f64;
/// The remaining continuous-entropy tail must be below this before the
/// inverse-square model takes over.
const DIFF_TAIL_STOP: f64 = 1e-5;
/// Largest relative spread tolerated among tail-fit samples.
const TAIL_FIT_BUDGET: f64 = 0.05;

/// Mutual information `I(X; sqrt(snr) X + N)` in nats: half the integral
/// of the error curve over `[0, snr]`, evaluated in the substituted
/// variable `u = ln(1 + gamma)`.
pub fn mutual_information(dist: &InputDistribution, snr: f64) -> Result<f64> {
    if !snr.is_finite() || snr < 0.0 {
        return Err(Error::BadSnr(snr));
    }
    if snr == 0.0 || dist.variance() == 0.0 {
        return Ok(0.0);
    }
    let q = integrate_mmse_over(dist, 0.0, snr)?;
    Ok(0.5 * q)
}

/// Achievable absolute tolerance for a ratio-space integral over
/// `[lo, hi]`: the error-curve evaluations carry an absolute noise floor,
/// so the attainable accuracy degrades linearly with the range, and the
/// substitution concentrates that noise at the right end of the `u`
/// interval while the adaptive rule splits its budget uniformly in `u` —
/// the extra logarithmic factor covers the mismatch, doubled for margin.
fn ratio_space_tol(dist: &InputDistribution, lo: f64, hi: f64) -> f64 {
    let u_range = ((1.0 + hi) / (1.0 + lo)).ln();
    SNR_QUAD_TOL.max(2.0 * (1.0 + u_range) * crate::mmse::abs_noise_floor(dist) * (hi - lo))
}

/// `int_a^b mmse(X, gamma) dgamma` via the logarithmic substitution.
pub(crate) fn integrate_mmse_over(dist: &InputDistribution, lo: f64, hi: f64) -> Result<f64> {
    let mut f = |u: f64| -> Result<f64> {
        let eu = u.exp();
        let gamma = eu - 1.0;
        Ok(mmse_at(dist, gamma)?.0 * eu)
    };
    let q = adaptive_simpson(
        &mut f,
        (1.0 + lo).ln(),
        (1.0 + hi).ln(),
        ratio_space_tol(dist, lo, hi),
        SNR_QUAD_DEPTH,
        "mutual information integral",
    )?;
    Ok(q.value)
}

/// Entropy of a discrete input in nats: half the improper integral of its
/// error curve, with the endpoint doubled until the integrand falls below
/// [`ENTROPY_TAIL_THRESHOLD`] and a geometric model closing the tail.
///
/// The integrand must actually decay: a flat tail (as produced by atoms
/// separated below resolution) invalidates the geometric closure and
/// reports as an error instead of a silently wrong entropy.
pub fn discrete_entropy(dist: &InputDistribution) -> Result<f64> {
    if !dist.is_discrete() {
        return Err(Error::NotDiscrete);
    }
    let mut gamma_max = 64.0f64;
    loop {
        let (m, _) = mmse_at(dist, gamma_max)?;
        if m < ENTROPY_TAIL_THRESHOLD {
            break;
        }
        gamma_max *= 2.0;
        if gamma_max > GAMMA_CAP {
            return Err(Error::TailNonDecay {
                gamma_max: GAMMA_CAP,
                integrand: m,
            });
        }
    }
    let (m_end, _) = mmse_at(dist, gamma_max)?;
    let (m_half, _) = mmse_at(dist, 0.5 * gamma_max)?;
    let mut tail = 0.0;
    // Endpoint values at the quadrature noise floor measure roundoff, not
    // the curve: the true tail is then below resolution and counts as
    // closed. The decay test only makes sense on resolved values.
    if m_end > crate::mmse::abs_noise_floor(dist) {
        if m_end >= 0.9 * m_half {
            // Not decaying: the geometric model cannot close this tail.
            return Err(Error::TailNonDecay {
                gamma_max,
                integrand: m_end,
            });
        }
        let rate = (m_half / m_end).ln() / (0.5 * gamma_max);
        tail = m_end / rate;
    }
    let body = integrate_mmse_over(dist, 0.0, gamma_max)?;
    Ok(0.5 * (body + tail))
}

/// Differential entropy of a purely continuous input in nats:
/// `0.5 ln(2 pi e)` minus half the improper integral of
/// `1/(1+gamma) - mmse(X, gamma)`, whose tail approaches zero like
/// `c / gamma^2`. The constant is fitted on the last decade of the
/// computed range; a fit spread above [`TAIL_FIT_BUDGET`] reports as an
/// error.
pub fn differential_entropy(dist: &InputDistribution) -> Result<f64> {
    if !dist.is_continuous() {
        return Err(Error::NotContinuous);
    }
    let gap = |gamma: f64| -> Result<f64> { Ok(1.0 / (1.0 + gamma) - mmse_at(dist, gamma)?.0) };

    let mut gamma_max = 64.0f64;
    loop {
        let g = gap(gamma_max)?;
        if (g * gamma_max).abs() < DIFF_TAIL_STOP {
            break;
        }
        gamma_max *= 2.0;
        if gamma_max > GAMMA_CAP {
            return Err(Error::TailNonDecay {
                gamma_max: GAMMA_CAP,
                integrand: g,
            });
        }
    }

    // Fit the inverse-square constant on the last decade.
    let samples = 8;
    let mut cs = Vec::with_capacity(samples);
    for i in 0..samples {
        let t = i as f64 / (samples - 1) as f64;
        let gamma = gamma_max * (0.1f64).powf(1.0 - t);
        cs.push(gap(gamma)? * gamma * gamma);
    }
    let c = cs.iter().sum::<f64>() / samples as f64;
    let spread = cs
        .iter()
        .map(|ci| (ci - c).abs())
        .fold(0.0f64, f64::max);
    let residual = spread / c.abs().max(1e-9);
    if residual > TAIL_FIT_BUDGET {
        return Err(Error::TailFit {
            residual,
            budget: TAIL_FIT_BUDGET,
        });
    }
    let tail = c / gamma_max;

    let mut f = |u: f64| -> Result<f64> {
        let eu = u.exp();
        Ok(gap(eu - 1.0)? * eu)
    };
    let body = adaptive_simpson(
        &mut f,
        0.0,
        (1.0 + gamma_max).ln(),
        ratio_space_tol(dist, 0.0, gamma_max),
        SNR_QUAD_DEPTH,
        "differential entropy integral",
    )?;

    let half_ln_2pie = 0.5 * (2.0 * std::f64::consts::PI * std::f64::consts::E).ln();
    Ok(half_ln_2pie - 0.5 * (body.value + tail))
}

/// The moment polynomial under the expectation for each mutual-information
/// derivative order.
fn mi_polynomial(order: usize, m2: f64, m3: f64, m4: f64) -> f64 {
    match order {
        1 => 0.5 * m2,
        2 => -0.5 * m2 * m2,
        3 => m2.powi(3) - 0.5 * m3 * m3,
        4 => {
            0.5 * (-m4 * m4
                + 6.0 * m4 * m2 * m2
                + 12.0 * m3 * m3 * m2
                - 15.0 * m2.powi(4))
        }
        _ => unreachable!("validated order"),
    }
}

/// Derivative of the mutual information in the signal-to-noise ratio,
/// orders 1 through 4, by quadrature of the stated posterior-moment
/// polynomial against the output density.
///
/// Order 4 carries coefficient 12 on the `M_3^2 M_2` term, which is what
/// the chain from the third derivative of the error curve forces; the
/// consistency tests pin this against both that chain and direct finite
/// differences of the mutual information.
pub fn mi_derivative(dist: &InputDistribution, snr: f64, order: usize) -> Result<f64> {
    if !(1..=4).contains(&order) {
        return Err(Error::InvalidParameter(format!(
            "mutual-information derivative order {order} outside 1..=4"
        )));
    }
    if !snr.is_finite() || snr <= 0.0 {
        return Err(Error::BadSnr(snr));
    }
    let variance = dist.variance();
    if variance == 0.0 {
        return Ok(0.0);
    }
    let k_query = order.max(2);
    let a = snr.sqrt();
    let radius = output_truncation_radius(dist, a);
    let mut f = |y: f64| -> Result<f64> {
        let s = posterior_summary(dist, y, snr, k_query)?;
        let m2 = s.central_moment(2);
        let m3 = if order >= 3 { s.central_moment(3) } else { 0.0 };
        let m4 = if order >= 4 { s.central_moment(4) } else { 0.0 };
        Ok(s.density * mi_polynomial(order, m2, m3, m4))
    };
    let q = crate::quadrature::trapezoid_refine_from(
        &mut f,
        -radius,
        radius,
        crate::mmse::output_panel_count(dist, a, 2.0 * radius),
        1e-9,
        1e-12 * variance.powi(order as i32),
        18,
        "mutual-information derivative integral",
    )?;
    Ok(q.value)
}

/// Mutual information plus the entropy context the CLI presents.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InfoReport {
    pub snr: f64,
    pub mutual_information: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub discrete_entropy: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub differential_entropy: Option<f64>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use crate::calculus::finite_difference_of;
    use crate::channel::kernel_h;
    use crate::quadrature::trapezoid_refine;

    fn binary() -> InputDistribution {
        InputDistribution::make_discrete(&[(-1.0, 0.5), (1.0, 0.5)]).unwrap()
    }

    fn gaussian(var: f64) -> InputDistribution {
        InputDistribution::make_gaussian(0.0, var).unwrap()
    }

    /// Independent route: I = h(Y) - h(N) with h(Y) from a direct density
    /// quadrature of -h0 ln h0.
    fn mi_by_output_entropy(dist: &InputDistribution, snr: f64) -> f64 {
        let a = snr.sqrt();
        let radius = output_truncation_radius(dist, a) + 4.0;
        let mut f = |y: f64| -> Result<f64> {
            let h0 = kernel_h(dist, y, a, 0)?;
            Ok(if h0 > 0.0 { -h0 * h0.ln() } else { 0.0 })
        };
        let hy = trapezoid_refine(&mut f, -radius, radius, 1e-11, 1e-14, 18, "oracle")
            .unwrap()
            .value;
        let half_ln_2pie = 0.5 * (2.0 * std::f64::consts::PI * std::f64::consts::E).ln();
        hy - half_ln_2pie
    }

    #[test]
    fn gaussian_mutual_information_closed_form() {
        for snr in [0.5, 1.0, 10.0, 1000.0] {
            let got = mutual_information(&gaussian(1.0), snr).unwrap();
            assert_relative_eq!(got, 0.5 * (1.0 + snr).ln(), max_relative = 1e-8);
        }
        assert_eq!(mutual_information(&gaussian(1.0), 0.0).unwrap(), 0.0);
    }

    #[test]
    fn binary_mutual_information_matches_density_entropy_route() {
        for snr in [0.5, 2.0] {
            let integral_route = mutual_information(&binary(), snr).unwrap();
            let density_route = mi_by_output_entropy(&binary(), snr);
            assert_relative_eq!(integral_route, density_route, max_relative = 1e-6);
        }
    }

    #[test]
    fn mutual_information_monotone_and_concave() {
        let snrs = [0.25, 0.5, 1.0, 2.0, 4.0];
        let vals: Vec<f64> = snrs
            .iter()
            .map(|&s| mutual_information(&binary(), s).unwrap())
            .collect();
        for w in vals.windows(2) {
            assert!(w[1] > w[0]);
        }
        // Chord slopes decrease for a concave function.
        let mut prev_slope = f64::INFINITY;
        for i in 1..snrs.len() {
            let slope = (vals[i] - vals[i - 1]) / (snrs[i] - snrs[i - 1]);
            assert!(slope < prev_slope);
            prev_slope = slope;
        }
    }

    #[test]
    fn binary_entropy_is_ln_two() {
        let h = discrete_entropy(&binary()).unwrap();
        assert_relative_eq!(h, std::f64::consts::LN_2, max_relative = 1e-6);
    }

    #[test]
    fn four_level_entropy_is_ln_four() {
        let s = 5.0f64.sqrt();
        let pam = InputDistribution::make_discrete(&[
            (-3.0 / s, 0.25),
            (-1.0 / s, 0.25),
            (1.0 / s, 0.25),
            (3.0 / s, 0.25),
        ])
        .unwrap();
        let h = discrete_entropy(&pam).unwrap();
        assert!((h - 4.0f64.ln()).abs() < 1e-3, "got {h}");
    }

    #[test]
    fn point_mass_entropy_is_zero() {
        let d = InputDistribution::make_discrete(&[(2.0, 1.0)]).unwrap();
        assert_eq!(discrete_entropy(&d).unwrap(), 0.0);
    }

    #[test]
    fn entropy_requires_discrete_kind() {
        assert!(matches!(
            discrete_entropy(&gaussian(1.0)),
            Err(Error::NotDiscrete)
        ));
    }

    #[test]
    fn near_duplicate_atoms_report_flat_tail() {
        let d = InputDistribution::make_discrete(&[(0.0, 0.5), (1e-6, 0.5)]).unwrap();
        assert!(matches!(
            discrete_entropy(&d),
            Err(Error::TailNonDecay { .. })
        ));
    }

    #[test]
    fn entropy_dominates_mutual_information() {
        let h = discrete_entropy(&binary()).unwrap();
        let mut prev_gap = f64::INFINITY;
        for snr in [1.0, 4.0, 16.0] {
            let i = mutual_information(&binary(), snr).unwrap();
            let gap = h - i;
            assert!(gap > -1e-9, "entropy below information at snr {snr}");
            assert!(gap < prev_gap, "gap not shrinking at snr {snr}");
            prev_gap = gap;
        }
    }

    #[test]
    fn gaussian_differential_entropy_closed_forms() {
        let half_ln_2pie = 0.5 * (2.0 * std::f64::consts::PI * std::f64::consts::E).ln();
        let h1 = differential_entropy(&gaussian(1.0)).unwrap();
        assert_relative_eq!(h1, half_ln_2pie, max_relative = 1e-9);
        for var in [0.25, 4.0] {
            let h = differential_entropy(&gaussian(var)).unwrap();
            let want = half_ln_2pie + 0.5 * var.ln();
            assert!((h - want).abs() < 1e-3, "var {var}: {h} vs {want}");
        }
    }

    #[test]
    fn mixture_differential_entropy_matches_density_route() {
        let m = (0.5f64).sqrt();
        let mix = InputDistribution::mix(&[
            (InputDistribution::make_gaussian(-m, 0.5).unwrap(), 0.5),
            (InputDistribution::make_gaussian(m, 0.5).unwrap(), 0.5),
        ])
        .unwrap();
        let integral_route = differential_entropy(&mix).unwrap();
        // Direct route: -int p ln p for the known two-component density.
        let mut f = |x: f64| -> Result<f64> {
            let p = 0.5 * crate::channel::normal_pdf(x, -m, 0.5)
                + 0.5 * crate::channel::normal_pdf(x, m, 0.5);
            Ok(if p > 0.0 { -p * p.ln() } else { 0.0 })
        };
        let direct = trapezoid_refine(&mut f, -12.0, 12.0, 1e-12, 1e-15, 18, "oracle")
            .unwrap()
            .value;
        assert!(
            (integral_route - direct).abs() < 1e-3,
            "{integral_route} vs {direct}"
        );
    }

    #[test]
    fn differential_entropy_requires_continuous_kind() {
        assert!(matches!(
            differential_entropy(&binary()),
            Err(Error::NotContinuous)
        ));
    }

    #[test]
    fn first_mi_derivative_is_half_mmse() {
        for snr in [0.3, 1.0, 5.0] {
            let d1 = mi_derivative(&binary(), snr, 1).unwrap();
            let (m, _) = mmse_at(&binary(), snr).unwrap();
            assert_relative_eq!(d1, 0.5 * m, max_relative = 1e-6);
        }
    }

    #[test]
    fn gaussian_second_mi_derivative_closed_form() {
        for snr in [0.5, 2.0] {
            let d2 = mi_derivative(&gaussian(1.0), snr, 2).unwrap();
            assert_relative_eq!(d2, -0.5 * (1.0 + snr).powi(-2), max_relative = 1e-7);
        }
    }

    #[test]
    fn third_mi_derivative_matches_finite_differences() {
        let analytic = mi_derivative(&binary(), 1.0, 3).unwrap();
        let mut f = |s: f64| mutual_information(&binary(), s);
        let fd = finite_difference_of(&mut f, 1.0, 3, &[0.16, 0.08, 0.04]).unwrap();
        assert_relative_eq!(analytic, fd, max_relative = 1e-3);
    }

    #[test]
    fn fourth_mi_derivative_matches_error_curve_chain() {
        // The fourth derivative of the information is half the third
        // derivative of the error curve.
        for snr in [0.5, 1.0] {
            let d4 = mi_derivative(&binary(), snr, 4).unwrap();
            let chain = 0.5 * crate::calculus::mmse_derivative(&binary(), snr, 3).unwrap();
            assert_relative_eq!(d4, chain, max_relative = 1e-6);
        }
    }

    #[test]
    fn fourth_mi_derivative_matches_finite_differences() {
        // Distinguishes the coefficient 12 on M_3^2 M_2 from smaller
        // printed variants: the gap between candidates is orders of
        // magnitude above this tolerance.
        let analytic = mi_derivative(&binary(), 1.0, 4).unwrap();
        let mut f = |s: f64| mutual_information(&binary(), s);
        let fd = finite_difference_of(&mut f, 1.0, 4, &[0.2, 0.1, 0.05]).unwrap();
        assert_relative_eq!(analytic, fd, max_relative = 1e-3);
    }

    #[test]
    fn mi_derivative_validates_inputs() {
        assert!(mi_derivative(&binary(), 0.0, 1).is_err());
        assert!(mi_derivative(&binary(), 1.0, 5).is_err());
    }
}
