//! Derivatives of the error curve in the signal-to-noise ratio.
//!
//! The first three derivatives are expectations of polynomials in the
//! posterior central moments `M_i`, integrated against the output density:
//!
//! * order 1: `-E[M_2^2]`
//! * order 2: `E[2 M_2^3 - M_3^2]`
//! * order 3: `E[6 M_4 M_2^2 - M_4^2 + 12 M_3^2 M_2 - 15 M_2^4]`
//!
//! At zero signal-to-noise ratio the posterior is the prior and the same
//! polynomials evaluate directly on prior central moments, which also
//! yields the Taylor coefficients of the curve at the origin. A central
//! finite-difference engine with Richardson extrapolation serves as the
//! independent route for validating the analytic forms.

use crate::channel::{output_truncation_radius, posterior_summary};
use crate::distributions::InputDistribution;
use crate::error::{Error, Result};
use crate::mmse::{mmse_at, validate_family};
use crate::quadrature::{trapezoid_refine_from, CompensatedSum};
use serde::Serialize;

/// Largest supported Hermite polynomial order.
pub const HERMITE_CAP: usize = 32;
/// Relative tolerance for derivative quadratures.
const DERIV_REL_TOL: f64 = 1e-9;
/// Panel-doubling budget for derivative quadratures.
const MAX_DOUBLINGS: usize = 18;
/// Relative-gap floor guarding division by a vanishing analytic value.
const REL_GAP_FLOOR: f64 = 1e-12;

/// Probabilists' Hermite polynomial `H_n(x)` by the three-term recurrence
/// `H_{n+1} = x H_n - n H_{n-1}` with `H_0 = 1`, `H_1 = x`.
pub fn hermite(n: usize, x: f64) -> Result<f64> {
    if n > HERMITE_CAP {
        return Err(Error::InvalidParameter(format!(
            "hermite order {n} exceeds cap {HERMITE_CAP}"
        )));
    }
    let (mut prev, mut cur) = (1.0, x);
    match n {
        0 => Ok(1.0),
        1 => Ok(x),
        _ => {
            for k in 1..n {
                let next = x * cur - k as f64 * prev;
                prev = cur;
                cur = next;
            }
            Ok(cur)
        }
    }
}

/// The moment polynomial under the expectation for each derivative order.
fn derivative_polynomial(order: usize, m2: f64, m3: f64, m4: f64) -> f64 {
    match order {
        1 => -(m2 * m2),
        2 => 2.0 * m2.powi(3) - m3 * m3,
        3 => 6.0 * m4 * m2 * m2 - m4 * m4 + 12.0 * m3 * m3 * m2 - 15.0 * m2.powi(4),
        _ => unreachable!("validated order"),
    }
}

/// Derivative of the error curve at `snr`, orders 1 through 3.
///
/// Positive ratios integrate the moment polynomial against the output
/// density; at exactly zero the quadrature is bypassed and the polynomial
/// evaluates on prior central moments, which avoids the degenerate kernel
/// at vanishing gain.
pub fn mmse_derivative(dist: &InputDistribution, snr: f64, order: usize) -> Result<f64> {
    if !(1..=3).contains(&order) {
        return Err(Error::InvalidParameter(format!(
            "derivative order {order} outside 1..=3"
        )));
    }
    if !snr.is_finite() || snr < 0.0 {
        return Err(Error::BadSnr(snr));
    }
    let k_max = order + 1;
    if snr == 0.0 {
        let mv = dist.moments(k_max.max(2))?;
        let m2 = mv.central[1];
        let m3 = if k_max >= 3 { mv.central[2] } else { 0.0 };
        let m4 = if k_max >= 4 { mv.central[3] } else { 0.0 };
        return Ok(derivative_polynomial(order, m2, m3, m4));
    }
    let variance = dist.variance();
    if variance == 0.0 {
        return Ok(0.0);
    }
    let a = snr.sqrt();
    let radius = output_truncation_radius(dist, a);
    let k_query = k_max.max(2);
    let mut f = |y: f64| -> Result<f64> {
        let s = posterior_summary(dist, y, snr, k_query)?;
        let m2 = s.central_moment(2);
        let m3 = if k_max >= 3 { s.central_moment(3) } else { 0.0 };
        let m4 = if k_max >= 4 { s.central_moment(4) } else { 0.0 };
        Ok(s.density * derivative_polynomial(order, m2, m3, m4))
    };
    let quad = trapezoid_refine_from(
        &mut f,
        -radius,
        radius,
        crate::mmse::output_panel_count(dist, a, 2.0 * radius),
        DERIV_REL_TOL,
        1e-12 * variance.powi(order as i32 + 1),
        MAX_DOUBLINGS,
        "mmse derivative integral",
    )?;
    Ok(quad.value)
}

/// Taylor coefficients of the error curve at the origin, in powers of the
/// signal-to-noise ratio up to `max_order <= 3`:
/// `m_2, -m_2^2, (2 m_2^3 - m_3^2)/2,
/// -(m_4^2 - 6 m_4 m_2^2 - 12 m_3^2 m_2 + 15 m_2^4)/6`
/// with `m_i` the prior central moments.
pub fn taylor_zero(dist: &InputDistribution, max_order: usize) -> Result<Vec<f64>> {
    if max_order > 3 {
        return Err(Error::InvalidParameter(format!(
            "taylor order {max_order} outside 0..=3"
        )));
    }
    let mv = dist.moments((max_order + 1).max(2))?;
    let m2 = mv.central[1];
    let mut coeffs = vec![m2];
    if max_order >= 1 {
        coeffs.push(-(m2 * m2));
    }
    if max_order >= 2 {
        let m3 = mv.central[2];
        coeffs.push((2.0 * m2.powi(3) - m3 * m3) / 2.0);
    }
    if max_order >= 3 {
        let m3 = mv.central[2];
        let m4 = mv.central[3];
        coeffs.push(
            -(m4 * m4 - 6.0 * m4 * m2 * m2 - 12.0 * m3 * m3 * m2 + 15.0 * m2.powi(4)) / 6.0,
        );
    }
    Ok(coeffs)
}

/// First derivative of the side-information error: the probability-weighted
/// average of per-value first derivatives.
pub fn conditional_mmse_derivative(family: &[(InputDistribution, f64)], snr: f64) -> Result<f64> {
    validate_family(family)?;
    let mut acc = CompensatedSum::new();
    for (dist, p) in family {
        acc.add(p * mmse_derivative(dist, snr, 1)?);
    }
    Ok(acc.value())
}

/// Default step schedule for the finite-difference engine: three halving
/// steps scaled to the evaluation point.
pub fn default_step_schedule(snr: f64) -> [f64; 3] {
    let scale = snr.max(1.0);
    [1e-2 * scale, 5e-3 * scale, 2.5e-3 * scale]
}

/// Central finite difference of an arbitrary scalar function, orders 1
/// through 4, Richardson-extrapolated over the step schedule.
///
/// Each step yields an estimate with even-power error; extrapolation runs
/// polynomial elimination in the squared step, so a halving schedule of
/// three steps removes the first two error terms.
pub fn finite_difference_of(
    f: &mut dyn FnMut(f64) -> Result<f64>,
    x: f64,
    order: usize,
    steps: &[f64],
) -> Result<f64> {
    if !(1..=4).contains(&order) {
        return Err(Error::InvalidParameter(format!(
            "finite-difference order {order} outside 1..=4"
        )));
    }
    if steps.is_empty() {
        return Err(Error::InvalidParameter("empty step schedule".into()));
    }
    let stencil_halfwidth = if order <= 2 { 1.0 } else { 2.0 };
    for &h in steps {
        if !(h > 0.0) || !h.is_finite() {
            return Err(Error::InvalidParameter(format!("bad step {h}")));
        }
        if x - stencil_halfwidth * h < 0.0 {
            return Err(Error::StepSchedule { snr: x, order });
        }
    }
    let mut estimates = Vec::with_capacity(steps.len());
    for &h in steps {
        let d = match order {
            1 => (f(x + h)? - f(x - h)?) / (2.0 * h),
            2 => (f(x + h)? - 2.0 * f(x)? + f(x - h)?) / (h * h),
            3 => {
                (f(x + 2.0 * h)? - 2.0 * f(x + h)? + 2.0 * f(x - h)? - f(x - 2.0 * h)?)
                    / (2.0 * h * h * h)
            }
            4 => {
                (f(x + 2.0 * h)? - 4.0 * f(x + h)? + 6.0 * f(x)? - 4.0 * f(x - h)?
                    + f(x - 2.0 * h)?)
                    / (h * h * h * h)
            }
            _ => unreachable!(),
        };
        estimates.push((h * h, d));
    }
    // Neville elimination toward zero squared step.
    let mut table = estimates;
    for level in 1..table.len() {
        for i in 0..table.len() - level {
            let (h2_lo, v_lo) = table[i];
            let (h2_hi, v_hi) = table[i + 1];
            let v = (h2_lo * v_hi - h2_hi * v_lo) / (h2_lo - h2_hi);
            table[i] = (h2_lo, v);
        }
    }
    Ok(table[0].1)
}

/// Finite-difference derivative of the error curve; the oracle route for
/// [`mmse_derivative`].
pub fn finite_difference(
    dist: &InputDistribution,
    snr: f64,
    order: usize,
    steps: &[f64],
) -> Result<f64> {
    let mut f = |s: f64| -> Result<f64> { Ok(mmse_at(dist, s)?.0) };
    finite_difference_of(&mut f, snr, order, steps)
}

/// Analytic and finite-difference derivative values side by side.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DerivativeReport {
    pub snr: f64,
    pub order: usize,
    pub analytic: f64,
    pub finite_diff: f64,
    pub rel_gap: f64,
}

/// Run both derivative routes and report the relative gap
/// `|analytic - finite_diff| / max(|analytic|, floor)`.
pub fn derivative_report(
    dist: &InputDistribution,
    snr: f64,
    order: usize,
    steps: Option<&[f64]>,
) -> Result<DerivativeReport> {
    let analytic = mmse_derivative(dist, snr, order)?;
    let default = default_step_schedule(snr);
    let steps = steps.unwrap_or(&default);
    let finite_diff = finite_difference(dist, snr, order, steps)?;
    let rel_gap = (analytic - finite_diff).abs() / analytic.abs().max(REL_GAP_FLOOR);
    Ok(DerivativeReport {
        snr,
        order,
        analytic,
        finite_diff,
        rel_gap,
    })
}
