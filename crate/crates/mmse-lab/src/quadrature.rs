//! Shared numerical integration machinery.
//!
//! Three integrators cover every integral in the crate:
//!
//! * [`gauss_hermite`]: classical Gauss-Hermite rules (weight e^{-t^2}) built
//!   by the Golub-Welsch eigenvalue method and cached per node count. Used for
//!   expectations under a Gaussian factor; an n-point rule integrates
//!   polynomials up to degree 2n-1 exactly.
//! * [`trapezoid_refine`]: step-halving trapezoid sums. For analytic
//!   integrands that decay to zero at both endpoints (Gaussian tails) the
//!   trapezoid rule converges geometrically in the step size, so this is the
//!   workhorse for all observation-space integrals.
//! * [`adaptive_simpson`]: bisection-refined Simpson quadrature for smooth
//!   integrands on finite intervals that do not vanish at the endpoints
//!   (the signal-to-noise integrals behind the information functionals).
//!
//! All integrands return `Result<f64>` so failures deep inside nested
//! quadrature propagate instead of turning into silent NaNs.

use std::sync::OnceLock;

use crate::error::{Error, Result};

/// Node counts used by the adaptive Gauss-Hermite schedule, in refinement
/// order.
pub const GAUSS_HERMITE_SCHEDULE: [usize; 4] = [33, 65, 129, 257];

/// Value/error pair produced by the adaptive integrators. `err` is the
/// observed change at the accepted refinement step, a practical (not
/// certified) error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quad {
    pub value: f64,
    pub err: f64,
    pub evals: usize,
}

/// Running compensated sum (Neumaier variant of Kahan summation).
///
/// The observation-space integrands of this crate are sums of terms spanning
/// many orders of magnitude; plain accumulation would cap the achievable
/// relative accuracy well above what the acceptance tolerances need.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// N-point Gauss-Hermite rule for the weight e^{-t^2} on the real line.
///
/// Returns `(nodes, weights)` with nodes ascending and symmetric about zero.
/// Rules for the counts in [`GAUSS_HERMITE_SCHEDULE`] are cached for the
/// lifetime of the process; other counts are rejected to keep the cache
/// bounded.
pub fn gauss_hermite(n: usize) -> Result<&'static (Vec<f64>, Vec<f64>)> {
    static CACHE: OnceLock<Vec<OnceLock<(Vec<f64>, Vec<f64>)>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| {
        (0..GAUSS_HERMITE_SCHEDULE.len())
            .map(|_| OnceLock::new())
            .collect()
    });
    let slot = GAUSS_HERMITE_SCHEDULE
        .iter()
        .position(|&m| m == n)
        .ok_or_else(|| {
            Error::InvalidParameter(format!(
                "Gauss-Hermite rule size {n} is not in the supported schedule"
            ))
        })?;
    Ok(cache[slot].get_or_init(|| build_gauss_hermite(n)))
}

/// Golub-Welsch construction: eigenvalues of the Jacobi matrix are the nodes,
/// squared first eigenvector components (scaled by the zeroth moment sqrt(pi))
/// are the weights.
fn build_gauss_hermite(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut diag = vec![0.0f64; n];
    // Off-diagonal of the Jacobi matrix for Hermite weight: sqrt(k/2).
    let mut off: Vec<f64> = (1..n).map(|k| (k as f64 / 2.0).sqrt()).collect();
    off.push(0.0);
    let mut first = vec![0.0f64; n];
    first[0] = 1.0;

    symmetric_tridiagonal_eigen(&mut diag, &mut off, &mut first);

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| diag[i].total_cmp(&diag[j]));
    let mut nodes: Vec<f64> = order.iter().map(|&i| diag[i]).collect();
    let sqrt_pi = std::f64::consts::PI.sqrt();
    let mut weights: Vec<f64> = order.iter().map(|&i| sqrt_pi * first[i] * first[i]).collect();

    // The rule is symmetric by construction; average mirrored entries so the
    // symmetry holds exactly in floating point.
    for k in 0..n / 2 {
        let m = n - 1 - k;
        let x = 0.5 * (nodes[m] - nodes[k]);
        nodes[k] = -x;
        nodes[m] = x;
        let w = 0.5 * (weights[k] + weights[m]);
        weights[k] = w;
        weights[m] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

/// Implicit-shift QL iteration for a symmetric tridiagonal matrix, carrying a
/// single accumulated vector (`z`) instead of the full eigenvector matrix.
/// On return `diag` holds eigenvalues (unsorted) and `z` the first component
/// of each normalized eigenvector.
fn symmetric_tridiagonal_eigen(diag: &mut [f64], off: &mut [f64], z: &mut [f64]) {
    let n = diag.len();
    if n <= 1 {
        return;
    }
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let scale = diag[m].abs() + diag[m + 1].abs();
                if off[m].abs() <= f64::EPSILON * scale {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            assert!(iter <= 64, "tridiagonal QL failed to converge");

            let mut g = (diag[l + 1] - diag[l]) / (2.0 * off[l]);
            let mut r = g.hypot(1.0);
            g = diag[m] - diag[l] + off[l] / (g + r.copysign(g));
            let (mut s, mut c) = (1.0f64, 1.0f64);
            let mut p = 0.0f64;
            let mut underflow = false;
            for i in (l..m).rev() {
                let mut f = s * off[i];
                let b = c * off[i];
                r = f.hypot(g);
                off[i + 1] = r;
                if r == 0.0 {
                    // Rotation annihilated early; drop the shift and restart.
                    diag[i + 1] -= p;
                    off[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = diag[i + 1] - p;
                r = (diag[i] - g) * s + 2.0 * c * b;
                p = s * r;
                diag[i + 1] = g + p;
                g = c * r - b;

                f = z[i + 1];
                z[i + 1] = s * z[i] + c * f;
                z[i] = c * z[i] - s * f;
            }
            if underflow {
                continue;
            }
            diag[l] -= p;
            off[l] = g;
            off[m] = 0.0;
        }
    }
}

/// Trapezoid sums with step halving on `[lo, hi]`, starting from 64
/// panels. See [`trapezoid_refine_from`] for integrands with features the
/// default grid would step over.
pub fn trapezoid_refine(
    f: &mut dyn FnMut(f64) -> Result<f64>,
    lo: f64,
    hi: f64,
    rel_tol: f64,
    abs_floor: f64,
    max_doublings: usize,
    context: &str,
) -> Result<Quad> {
    trapezoid_refine_from(f, lo, hi, 64, rel_tol, abs_floor, max_doublings, context)
}

/// Trapezoid sums with step halving on `[lo, hi]`, starting from
/// `n_initial` panels.
///
/// Converges geometrically for integrands that are analytic on the interval
/// and negligible at both endpoints. Refinement stops once the last halving
/// changed the value by at most `max(rel_tol * |value|, abs_floor)`; the
/// change is reported as the error estimate. Exceeding `max_doublings`
/// refinements yields a quadrature error tagged with `context`.
///
/// The stop compares two grids one halving apart, so a feature much
/// narrower than the initial panel width can be invisible to both and the
/// result converges to the wrong integral; callers must choose `n_initial`
/// so the narrowest real feature of the integrand spans several panels.
#[allow(clippy::too_many_arguments)]
pub fn trapezoid_refine_from(
    f: &mut dyn FnMut(f64) -> Result<f64>,
    lo: f64,
    hi: f64,
    n_initial: usize,
    rel_tol: f64,
    abs_floor: f64,
    max_doublings: usize,
    context: &str,
) -> Result<Quad> {
    assert!(hi > lo, "empty integration interval");
    let mut n: usize = n_initial.max(2);
    let mut h = (hi - lo) / n as f64;
    let mut evals = 0usize;

    let mut interior = CompensatedSum::new();
    for i in 1..n {
        interior.add(f(lo + i as f64 * h)?);
        evals += 1;
    }
    let ends = 0.5 * (f(lo)? + f(hi)?);
    evals += 2;
    let mut value = h * (ends + interior.value());

    for _ in 0..max_doublings {
        // Midpoints of the current panels become the new interior points.
        let mut mids = CompensatedSum::new();
        for i in 0..n {
            mids.add(f(lo + (i as f64 + 0.5) * h)?);
            evals += 1;
        }
        n *= 2;
        h *= 0.5;
        interior.add(mids.value());
        let next = h * (ends + interior.value());
        let change = (next - value).abs();
        value = next;
        if change <= f64::max(rel_tol * value.abs(), abs_floor) {
            return Ok(Quad {
                value,
                err: change,
                evals,
            });
        }
    }
    Err(Error::Quadrature {
        context: context.to_string(),
        achieved: f64::NAN,
        requested: f64::max(rel_tol, abs_floor),
    })
}

/// Fraction of a panel's own magnitude below which its Richardson
/// correction counts as converged regardless of the tolerance share. The
/// integrands fed to the adaptive rule are themselves computed by inner
/// quadratures resolved to about 1e-10 relative, so corrections this far
/// below the panel magnitude measure evaluation noise, and subdividing
/// further cannot reduce them (both the noise-floored correction and the
/// halving budget shrink at the same rate).
const PANEL_NOISE_REL: f64 = 1e-9;

/// Adaptive Simpson quadrature on `[a, b]` with absolute tolerance `tol`.
///
/// Accepts a panel when the Richardson estimate of its error is below the
/// panel's share of the tolerance or below the evaluation-noise floor
/// [`PANEL_NOISE_REL`]; accepted panel corrections accumulate into the
/// reported error estimate.
pub fn adaptive_simpson(
    f: &mut dyn FnMut(f64) -> Result<f64>,
    a: f64,
    b: f64,
    tol: f64,
    max_depth: usize,
    context: &str,
) -> Result<Quad> {
    assert!(b > a, "empty integration interval");
    let fa = f(a)?;
    let fb = f(b)?;
    let m = 0.5 * (a + b);
    let fm = f(m)?;
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    let mut evals = 3usize;
    let mut err_acc = 0.0f64;
    let value = simpson_step(
        f, a, b, fa, fm, fb, whole, tol, max_depth, context, &mut evals, &mut err_acc,
    )?;
    Ok(Quad {
        value,
        err: err_acc,
        evals,
    })
}

#[allow(clippy::too_many_arguments)]
fn simpson_step(
    f: &mut dyn FnMut(f64) -> Result<f64>,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: usize,
    context: &str,
    evals: &mut usize,
    err_acc: &mut f64,
) -> Result<f64> {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm)?;
    let frm = f(rm)?;
    *evals += 2;
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    let noise_floor = PANEL_NOISE_REL * (left.abs() + right.abs());
    if delta.abs() <= 15.0 * tol || delta.abs() <= noise_floor {
        *err_acc += delta.abs() / 15.0;
        return Ok(left + right + delta / 15.0);
    }
    if depth == 0 {
        return Err(Error::Quadrature {
            context: context.to_string(),
            achieved: delta.abs() / 15.0,
            requested: tol,
        });
    }
    let l = simpson_step(
        f, a, m, fa, flm, fm, left, tol * 0.5, depth - 1, context, evals, err_acc,
    )?;
    let r = simpson_step(
        f, m, b, fm, frm, fb, right, tol * 0.5, depth - 1, context, evals, err_acc,
    )?;
    Ok(l + r)
}

/// Strictly increasing logarithmic grid with `n >= 2` points from `lo` to
/// `hi`, both positive.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi > lo && n >= 2);
    let llo = lo.ln();
    let step = (hi.ln() - llo) / (n - 1) as f64;
    let mut g: Vec<f64> = (0..n).map(|i| (llo + i as f64 * step).exp()).collect();
    g[0] = lo;
    g[n - 1] = hi;
    g
}

/// Linear grid with `n >= 2` points from `lo` to `hi`.
pub fn lin_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(hi > lo && n >= 2);
    let step = (hi - lo) / (n - 1) as f64;
    let mut g: Vec<f64> = (0..n).map(|i| lo + i as f64 * step).collect();
    g[n - 1] = hi;
    g
}
