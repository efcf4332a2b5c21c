//! Release gate: each test pins one acceptance criterion with its
//! tolerance, so `cargo test --test acceptance` prints one pass/fail line
//! per criterion.
//!
//! Oracles here are deliberately independent of the library's own
//! quadrature where the criterion demands a second route: closed forms,
//! a frozen composite Simpson rule, truncated-Gaussian moment
//! recurrences, and the seeded Monte Carlo estimators.

use std::fs;
use std::path::PathBuf;
use std::time::{Duration, Instant};

use mmse_lab::analysis::{
    check_concavity, check_cosine_mix, check_sum_monotonicity, check_tv_inequality,
    single_crossing, Classification, GridConfig,
};
use mmse_lab::calculus::{
    default_step_schedule, derivative_report, finite_difference_of, mmse_derivative, taylor_zero,
};
use mmse_lab::capacity::{
    broadcast_converse_check, epi_gaussian_check, secrecy_capacity, secrecy_gap,
};
use mmse_lab::channel::{
    output_density, posterior_distribution, posterior_summary, posterior_tail_bound,
};
use mmse_lab::corpus;
use mmse_lab::infotheory::{differential_entropy, discrete_entropy, mutual_information};
use mmse_lab::mmse::{conditional_mmse, mmse_at, mmse_curve};
use mmse_lab::oracle::{mc_mmse, mc_mutual_information, mc_posterior_slice};
use mmse_lab::quadrature::{lin_grid, log_grid};
use mmse_lab::InputDistribution;

use rand_chacha::rand_core::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use statrs::distribution::{ContinuousCDF, Normal};

const SQRT_2PI: f64 = 2.506_628_274_631_000_7;

fn phi(t: f64) -> f64 {
    (-0.5 * t * t).exp() / SQRT_2PI
}

fn norm_cdf(t: f64) -> f64 {
    Normal::new(0.0, 1.0).unwrap().cdf(t)
}

/// Composite Simpson rule on a uniform grid with `n` intervals (n even).
fn composite_simpson(f: impl Fn(f64) -> f64, lo: f64, hi: f64, n: usize) -> f64 {
    assert!(n >= 2 && n % 2 == 0);
    let h = (hi - lo) / n as f64;
    let mut acc = f(lo) + f(hi);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(lo + i as f64 * h);
    }
    acc * h / 3.0
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Raw moments of the standard normal: 0 for odd order, (k-1)!! for even.
fn std_normal_moment(k: usize) -> f64 {
    if k % 2 == 1 {
        0.0
    } else {
        (1..=k).filter(|j| j % 2 == 1).map(|j| j as f64).product()
    }
}

/// Lower truncated moments `L_k = int_{-inf}^beta z^k phi(z) dz` of the
/// standard normal, via the classical recurrence
/// `L_k = -beta^{k-1} phi(beta) + (k-1) L_{k-2}`.
fn truncated_lower_moments(beta: f64, k_max: usize) -> Vec<f64> {
    let p = phi(beta);
    let mut l = vec![0.0; k_max + 1];
    l[0] = norm_cdf(beta);
    if k_max >= 1 {
        l[1] = -p;
    }
    for k in 2..=k_max {
        l[k] = -beta.powi((k - 1) as i32) * p + (k - 1) as f64 * l[k - 2];
    }
    l
}

fn binom(n: usize, k: usize) -> f64 {
    let k = k.min(n - k);
    let mut c = 1.0f64;
    for j in 0..k {
        c = c * (n - j) as f64 / (j + 1) as f64;
    }
    c
}

/// `E |W - center|^n` for `W ~ N(mu, var)`, exactly: even orders expand in
/// raw normal moments; odd orders split the integral at the kink using
/// truncated moments.
fn gaussian_abs_moment_about(mu: f64, var: f64, center: f64, n: usize) -> f64 {
    let delta = mu - center;
    let sd = var.sqrt();
    let raw: f64 = (0..=n)
        .map(|k| binom(n, k) * delta.powi((n - k) as i32) * sd.powi(k as i32) * std_normal_moment(k))
        .sum();
    if n % 2 == 0 {
        return raw;
    }
    // Odd order: E|W'|^n = E[W'^n] - 2 E[W'^n; W' < 0] with W' = W - center.
    let beta = -delta / sd;
    let l = truncated_lower_moments(beta, n);
    let below: f64 = (0..=n)
        .map(|k| binom(n, k) * delta.powi((n - k) as i32) * sd.powi(k as i32) * l[k])
        .sum();
    raw - 2.0 * below
}

/// `E |X_y - center|^n` for the posterior at `(y, snr)`, exactly from its
/// mixture parts.
fn posterior_abs_moment_about(
    dist: &InputDistribution,
    y: f64,
    snr: f64,
    center: f64,
    n: usize,
) -> f64 {
    let post = posterior_distribution(dist, y, snr).unwrap();
    let mut acc = 0.0;
    for at in post.atoms() {
        acc += at.weight * (at.location - center).abs().powi(n as i32);
    }
    for c in post.components() {
        acc += c.weight * gaussian_abs_moment_about(c.mean, c.variance, center, n);
    }
    acc
}

/// Exact posterior tail probability `P(|X_y| >= x)` from the mixture parts.
fn posterior_tail_exact(dist: &InputDistribution, y: f64, snr: f64, x: f64) -> f64 {
    let post = posterior_distribution(dist, y, snr).unwrap();
    let mut acc = 0.0;
    for at in post.atoms() {
        if at.location.abs() >= x {
            acc += at.weight;
        }
    }
    for c in post.components() {
        let sd = c.variance.sqrt();
        acc += c.weight * (norm_cdf((-x - c.mean) / sd) + 1.0 - norm_cdf((x - c.mean) / sd));
    }
    acc
}

/// Radius covering the output density's mass for integrals over `y`.
fn output_radius(dist: &InputDistribution, a: f64) -> f64 {
    let mut r: f64 = 12.0;
    for at in dist.atoms() {
        r = r.max((a * at.location).abs() + 10.0);
    }
    for c in dist.components() {
        r = r.max((a * c.mean).abs() + 10.0 * (1.0 + a * a * c.variance).sqrt());
    }
    r
}

fn u01(rng: &mut ChaCha12Rng) -> f64 {
    ((rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / 9_007_199_254_740_992.0)
}

fn unif(rng: &mut ChaCha12Rng, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * u01(rng)
}

#[test]
fn c01_gaussian_closed_form_on_log_grid() {
    let start = Instant::now();
    for var in [0.25, 1.0, 4.0] {
        let dist = InputDistribution::make_gaussian(0.0, var).unwrap();
        for &snr in &log_grid(1e-3, 1e3, 200) {
            let (value, _) = mmse_at(&dist, snr).unwrap();
            let closed = var / (1.0 + var * snr);
            let rel = ((value - closed) / closed).abs();
            assert!(
                rel < 1e-9,
                "variance {var}, snr {snr}: rel err {rel:.3e}"
            );
        }
    }
    assert!(
        start.elapsed() < Duration::from_secs(5),
        "600 closed-form comparisons took {:?}",
        start.elapsed()
    );
}

#[test]
fn c02_binary_engine_matches_direct_quadrature() {
    // Independent route: mmse = 1 - int phi(y) tanh(snr - sqrt(snr) y) dy,
    // evaluated with a frozen composite Simpson rule.
    let oracle = |snr: f64| {
        let a = snr.sqrt();
        1.0 - composite_simpson(|y| phi(y) * (snr - a * y).tanh(), -16.0, 16.0, 4000)
    };
    let dist = corpus::binary_pm1();
    for &snr in &log_grid(1e-2, 1e2, 100) {
        let (value, _) = mmse_at(&dist, snr).unwrap();
        let gap = (value - oracle(snr)).abs();
        assert!(gap < 1e-8, "snr {snr}: abs gap {gap:.3e}");
    }
}

#[test]
fn c03_error_curve_quartet_shape_and_golden() {
    let grid = lin_grid(0.0, 10.0, 41);
    let curves: Vec<(&str, Vec<f64>)> = [
        ("gaussian_unit", corpus::gaussian_unit()),
        ("gaussian_quarter", corpus::gaussian_quarter()),
        ("binary_pm1", corpus::binary_pm1()),
        ("skewed_binary", corpus::skewed_binary()),
    ]
    .into_iter()
    .map(|(name, dist)| {
        let curve = mmse_curve(&dist, &grid).unwrap();
        (name, curve.points.iter().map(|p| p.mmse).collect())
    })
    .collect();

    let unit = &curves[0].1;
    let quarter = &curves[1].1;
    let binary = &curves[2].1;
    let skewed = &curves[3].1;

    for (i, &snr) in grid.iter().enumerate() {
        // The unit Gaussian dominates its unit-variance competitor and both
        // small-variance curves; every curve is nonincreasing.
        if snr > 0.0 {
            assert!(unit[i] > binary[i], "unit vs binary at snr {snr}");
        }
        assert!(unit[i] > quarter[i] - 1e-12);
        assert!(quarter[i] > skewed[i], "quarter vs skewed at snr {snr}");
        assert!(binary[i] > skewed[i], "binary vs skewed at snr {snr}");
        if i > 0 {
            for c in &curves {
                assert!(c.1[i] <= c.1[i - 1] + 1e-12, "{} rose at snr {snr}", c.0);
            }
        }
    }
    // The binary curve starts at the Gaussian-unit level and ends below the
    // quarter-variance Gaussian: exactly one sign change along the grid.
    let changes = grid
        .iter()
        .enumerate()
        .skip(1)
        .filter(|(i, _)| {
            let d_prev = binary[i - 1] - quarter[i - 1];
            let d_here = binary[*i] - quarter[*i];
            d_prev > 0.0 && d_here < 0.0 || d_prev < 0.0 && d_here > 0.0
        })
        .count();
    assert_eq!(changes, 1, "binary vs quarter crossing count");
    assert!(binary[0] > quarter[0] && *binary.last().unwrap() < *quarter.last().unwrap());

    // Golden data: regenerate with REGEN_GOLDEN=1, compare otherwise.
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data/figure_curves.csv");
    let mut rendered = String::from("curve,snr,mmse\n");
    for (name, values) in &curves {
        for (&snr, &v) in grid.iter().zip(values) {
            rendered.push_str(&format!("{name},{snr:.16e},{v:.16e}\n"));
        }
    }
    if std::env::var_os("REGEN_GOLDEN").is_some() {
        fs::write(&path, &rendered).unwrap();
        return;
    }
    let golden = fs::read_to_string(&path).expect("golden curve data present");
    let parse = |s: &str| -> Vec<(String, f64, f64)> {
        s.lines()
            .skip(1)
            .map(|l| {
                let mut it = l.split(',');
                (
                    it.next().unwrap().to_string(),
                    it.next().unwrap().parse().unwrap(),
                    it.next().unwrap().parse().unwrap(),
                )
            })
            .collect()
    };
    let want = parse(&golden);
    let got = parse(&rendered);
    assert_eq!(want.len(), got.len());
    for (w, g) in want.iter().zip(&got) {
        assert_eq!(w.0, g.0);
        assert!((w.1 - g.1).abs() < 1e-12);
        let rel = (w.2 - g.2).abs() / w.2.abs().max(1e-12);
        assert!(rel < 1e-7, "{} at snr {}: drifted by {rel:.3e}", w.0, w.1);
    }
}

#[test]
fn c04_derivative_routes_agree_on_corpus() {
    for (name, dist) in corpus::default_corpus() {
        for snr in [0.1, 1.0, 10.0] {
            for order in 1..=3 {
                let report = derivative_report(&dist, snr, order, None).unwrap();
                // Below ~1e-10 the derivative sits within a few orders of the
                // absolute noise floor of double-precision quadrature, so a
                // relative comparison is unattainable in principle; require
                // tight absolute agreement between the two routes instead.
                let resolvable =
                    report.analytic.abs() > 1e-10 || report.finite_diff.abs() > 1e-10;
                let ok = if resolvable {
                    report.rel_gap < 1e-4
                } else {
                    (report.analytic - report.finite_diff).abs() < 1e-12
                };
                assert!(
                    ok,
                    "{name}, snr {snr}, order {order}: gap {:.3e} (analytic {:.6e}, fd {:.6e})",
                    report.rel_gap,
                    report.analytic,
                    report.finite_diff
                );
            }
        }
    }
    // Gaussian closed forms pin the absolute scale.
    let g = corpus::gaussian_unit();
    for snr in [0.1f64, 1.0, 10.0] {
        let base = 1.0 + snr;
        for (order, closed) in [
            (1, -base.powi(-2)),
            (2, 2.0 * base.powi(-3)),
            (3, -6.0 * base.powi(-4)),
        ] {
            let v = mmse_derivative(&g, snr, order).unwrap();
            let rel = ((v - closed) / closed).abs();
            assert!(rel < 1e-7, "order {order}, snr {snr}: rel {rel:.3e}");
        }
    }
}

#[test]
fn c05_taylor_remainder_scales_as_fourth_power() {
    let snrs = [0.04, 0.02, 0.01];
    for (name, dist) in [
        ("binary_pm1", corpus::binary_pm1()),
        ("gaussian_unit", corpus::gaussian_unit()),
    ] {
        let coeffs = taylor_zero(&dist, 3).unwrap();
        let series = |s: f64| {
            coeffs
                .iter()
                .enumerate()
                .map(|(k, c)| c * s.powi(k as i32))
                .sum::<f64>()
        };
        let pts: Vec<(f64, f64)> = snrs
            .iter()
            .map(|&s| {
                let err = (mmse_at(&dist, s).unwrap().0 - series(s)).abs();
                (s.ln(), err.ln())
            })
            .collect();
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / 3.0;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / 3.0;
        let slope = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>()
            / pts.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>();
        assert!(
            (slope - 4.0).abs() <= 0.3,
            "{name}: remainder slope {slope:.3} not 4 +- 0.3"
        );
    }
}

#[test]
fn c06_information_slope_is_half_the_error() {
    for (name, dist) in [
        ("gaussian_unit", corpus::gaussian_unit()),
        ("binary_pm1", corpus::binary_pm1()),
        ("symmetric_gaussian_pair", corpus::symmetric_gaussian_pair()),
    ] {
        for snr in [0.5, 2.0] {
            let mut f = |s: f64| mutual_information(&dist, s);
            let slope =
                finite_difference_of(&mut f, snr, 1, &default_step_schedule(snr)).unwrap();
            let half = 0.5 * mmse_at(&dist, snr).unwrap().0;
            let rel = ((slope - half) / half).abs();
            assert!(rel < 1e-5, "{name} at snr {snr}: rel gap {rel:.3e}");
        }
    }
    let g = corpus::gaussian_unit();
    for snr in [0.1, 0.5, 1.0, 2.0, 5.0, 10.0] {
        let mi = mutual_information(&g, snr).unwrap();
        let closed = 0.5 * (1.0 + snr).ln();
        assert!((mi - closed).abs() < 1e-8, "snr {snr}");
    }
}

#[test]
fn c07_entropy_paths_recover_closed_forms() {
    let h2 = discrete_entropy(&corpus::binary_pm1()).unwrap();
    assert!((h2 - 2f64.ln()).abs() < 1e-3, "binary entropy {h2}");
    let h4 = discrete_entropy(&corpus::pam4()).unwrap();
    assert!((h4 - 4f64.ln()).abs() < 1e-3, "4-level entropy {h4}");
    for var in [0.25, 1.0, 4.0] {
        let g = InputDistribution::make_gaussian(0.0, var).unwrap();
        let h = differential_entropy(&g).unwrap();
        let closed = 0.5 * (2.0 * std::f64::consts::PI * std::f64::consts::E * var).ln();
        assert!(
            (h - closed).abs() < 1e-3,
            "variance {var}: {h} vs {closed}"
        );
    }
}

#[test]
fn c08_moment_bounds_hold() {
    // Average error moments: E|X - E[X|Y]|^n <= (2/sqrt(snr))^n sqrt(n!)
    // for n <= 8, integrating the exact posterior absolute moments over
    // the output density.
    for (name, dist) in corpus::default_corpus() {
        for snr in [0.5f64, 2.0] {
            let a = snr.sqrt();
            let r = output_radius(&dist, a);
            for n in 0..=8usize {
                let value = composite_simpson(
                    |y| {
                        let h0 = output_density(&dist, y, snr).unwrap();
                        if h0 <= 0.0 {
                            return 0.0;
                        }
                        let mean = posterior_summary(&dist, y, snr, 2).unwrap().mean;
                        h0 * posterior_abs_moment_about(&dist, y, snr, mean, n)
                    },
                    -r,
                    r,
                    4000,
                );
                let bound = (2.0 / a).powi(n as i32) * factorial(n).sqrt();
                assert!(
                    value <= bound * (1.0 + 1e-6),
                    "{name}, snr {snr}, order {n}: {value:.6e} > {bound:.6e}"
                );
            }
            // The absolute-moment route and the summary route agree on even
            // orders at spot-check points.
            for y in [-1.3, 0.0, 0.7, 2.9] {
                let s = posterior_summary(&dist, y, snr, 8).unwrap();
                for n in [2usize, 4, 6, 8] {
                    let via_abs = posterior_abs_moment_about(&dist, y, snr, s.mean, n);
                    let gap = (via_abs - s.central_moment(n)).abs();
                    assert!(
                        gap <= 1e-8 * via_abs.abs().max(1e-9),
                        "{name}, snr {snr}, y {y}, order {n}"
                    );
                }
            }
        }
    }

    // Posterior tail and raw-moment bounds on randomized observation pairs.
    let members = corpus::default_corpus();
    let mut rng = ChaCha12Rng::seed_from_u64(0xA8);
    for _ in 0..1000 {
        let (name, dist) = &members[(rng.next_u64() % members.len() as u64) as usize];
        let y = unif(&mut rng, -8.0, 8.0);
        let a = unif(&mut rng, 0.2, 3.0);
        let snr = a * a;
        let x = unif(&mut rng, 0.05, 8.0);
        let bound = posterior_tail_bound(dist, y, a, x).unwrap();
        let exact = posterior_tail_exact(dist, y, snr, x);
        assert!(
            exact <= bound * (1.0 + 1e-9) + 1e-12,
            "{name}: tail at (y {y:.3}, a {a:.3}, x {x:.3}): {exact:.6e} > {bound:.6e}"
        );
        let h0 = output_density(dist, y, snr).unwrap();
        for n in 1..=6usize {
            let abs_raw = posterior_abs_moment_about(dist, y, snr, 0.0, n);
            let raw_bound = n as f64 * (0.5 * y * y).exp() / h0
                * (2f64.sqrt() / a).powi(n as i32)
                * factorial(n - 1).sqrt();
            assert!(
                abs_raw <= raw_bound * (1.0 + 1e-9),
                "{name}: raw moment {n} at (y {y:.3}, a {a:.3}): {abs_raw:.6e} > {raw_bound:.6e}"
            );
        }
    }

    // Products of posterior central moments on randomized small index sets:
    // E[prod |M_i|^{n_j}] <= snr^{-n/2} 2^n sqrt(n!) with n the weighted
    // total order.
    let mut rng = ChaCha12Rng::seed_from_u64(0xB1);
    let mut done = 0;
    while done < 40 {
        let (name, dist) = &members[(rng.next_u64() % members.len() as u64) as usize];
        let snr = unif(&mut rng, 0.3, 3.0);
        let k = 1 + (rng.next_u64() % 2) as usize;
        let set: Vec<(usize, usize)> = (0..k)
            .map(|_| {
                (
                    2 + (rng.next_u64() % 3) as usize,
                    1 + (rng.next_u64() % 2) as usize,
                )
            })
            .collect();
        let n: usize = set.iter().map(|(i, m)| i * m).sum();
        if n > 8 {
            continue;
        }
        done += 1;
        let a = snr.sqrt();
        let r = output_radius(dist, a);
        let value = composite_simpson(
            |y| {
                let h0 = output_density(dist, y, snr).unwrap();
                if h0 <= 0.0 {
                    return 0.0;
                }
                let s = posterior_summary(dist, y, snr, 4).unwrap();
                let mut p = h0;
                for &(i, m) in &set {
                    p *= s.central_moment(i).abs().powi(m as i32);
                }
                p
            },
            -r,
            r,
            2000,
        );
        let bound = snr.powf(-0.5 * n as f64) * 2f64.powi(n as i32) * factorial(n).sqrt();
        assert!(
            value <= bound * (1.0 + 1e-6),
            "{name}, snr {snr:.3}, set {set:?}: {value:.6e} > {bound:.6e}"
        );
    }
}

#[test]
fn c09_crossing_census_on_corpus() {
    let config = GridConfig::default();

    // The canonical second-moment-2 binary input crosses the unit Gaussian
    // reference exactly once.
    let report = single_crossing(&corpus::binary_sqrt2(), 1.0, &config).unwrap();
    assert_eq!(report.classification, Classification::SingleCrossing);
    assert_eq!(report.crossings.len(), 1);
    let at = report.crossing_point().unwrap();
    assert!(at > 1e-2 && at < 1e2, "crossing at {at}");

    // The Gaussian-plus-binary sum stays strictly between its Gaussian
    // envelopes: it starts below the unit reference and never comes back.
    let report = single_crossing(&corpus::high_snr_mixture(), 1.0, &config).unwrap();
    assert_eq!(
        report.classification,
        Classification::NoCrossingNegativeTailImpossible
    );
    assert!(report.crossings.is_empty());

    // Every corpus member against several references: the scan certifies
    // the structural statements internally, so Ok is the assertion; the
    // reported grid must show at most one sign change.
    for (name, dist) in corpus::default_corpus() {
        for sigma2 in [0.5, 1.0, 2.0] {
            let report = single_crossing(&dist, sigma2, &config)
                .unwrap_or_else(|e| panic!("{name} vs {sigma2}: {e}"));
            let band = config.zero_band;
            let signs: Vec<i8> = report
                .f_grid
                .iter()
                .filter(|(_, f)| f.abs() > band)
                .map(|(_, f)| if *f > 0.0 { 1 } else { -1 })
                .collect();
            let flips = signs.windows(2).filter(|w| w[0] != w[1]).count();
            assert!(flips <= 1, "{name} vs {sigma2}: {flips} sign changes");
        }
    }
}

#[test]
fn c10_structure_residuals_are_nonnegative() {
    let members = corpus::default_corpus();
    let mut rng = ChaCha12Rng::seed_from_u64(0xC4);
    let tol = -1e-7;

    // Blending two inputs never estimates easier than the blend of errors.
    for _ in 0..12 {
        let d0 = &members[(rng.next_u64() % members.len() as u64) as usize].1;
        let d1 = &members[(rng.next_u64() % members.len() as u64) as usize].1;
        let alpha = unif(&mut rng, 0.0, 1.0);
        let snr = unif(&mut rng, 0.2, 4.0);
        let res = check_concavity(d0, d1, alpha, snr).unwrap();
        assert!(res >= tol, "concavity residual {res:.3e}");
    }

    // Side information can only reduce the error.
    for _ in 0..6 {
        let d0 = members[(rng.next_u64() % members.len() as u64) as usize].1.clone();
        let d1 = members[(rng.next_u64() % members.len() as u64) as usize].1.clone();
        let w = unif(&mut rng, 0.1, 0.9);
        let snr = unif(&mut rng, 0.2, 4.0);
        let family = [(d0, w), (d1, 1.0 - w)];
        let informed = conditional_mmse(&family, snr).unwrap();
        let blind = mmse_at(&InputDistribution::mix(&family).unwrap(), snr).unwrap().0;
        assert!(blind - informed >= tol, "conditioning residual");
    }

    // Rotating two independent inputs together beats the split errors.
    for _ in 0..8 {
        let d0 = &members[(rng.next_u64() % members.len() as u64) as usize].1;
        let d1 = &members[(rng.next_u64() % members.len() as u64) as usize].1;
        let alpha = unif(&mut rng, 0.0, std::f64::consts::FRAC_PI_2);
        let snr = unif(&mut rng, 0.2, 4.0);
        let res = check_cosine_mix(d0, d1, alpha, snr).unwrap();
        assert!(res >= tol, "rotation residual {res:.3e}");
    }

    // Leave-one-out decomposition of an independent sum.
    for lambdas in [[0.3, 0.3, 0.4], [0.0, 0.5, 0.5]] {
        let dists = [
            corpus::binary_pm1(),
            corpus::gaussian_quarter(),
            corpus::pam4(),
        ];
        let res = check_tv_inequality(&dists, &lambdas, 1.3).unwrap();
        assert!(res >= tol, "leave-one-out residual {res:.3e}");
    }

    // Normalized independent sums of a binary input get harder with each
    // extra summand.
    for snr in [0.5, 2.0] {
        let gaps = check_sum_monotonicity(&corpus::binary_pm1(), 4, snr).unwrap();
        assert_eq!(gaps.len(), 3);
        for g in gaps {
            assert!(g >= tol, "sum monotonicity gap {g:.3e} at snr {snr}");
        }
    }
}

#[test]
fn c11_capacity_checks() {
    // Gaussian secrecy rate matches the closed form and dominates every
    // non-Gaussian unit-power member.
    let pairs = [(2.0f64, 0.8f64), (3.0, 1.0), (1.5, 0.3)];
    let gauss = corpus::gaussian_unit();
    for (snr1, snr2) in pairs {
        let closed = 0.5 * ((1.0 + snr1) / (1.0 + snr2)).ln();
        assert!((secrecy_capacity(snr1, snr2).unwrap() - closed).abs() < 1e-12);
        let g = secrecy_gap(&gauss, snr1, snr2).unwrap();
        assert!((g - closed).abs() < 1e-8, "gaussian gap at ({snr1},{snr2})");
        for (name, dist) in corpus::unit_power_corpus() {
            if name == "gaussian_unit" {
                continue;
            }
            let other = secrecy_gap(&dist, snr1, snr2).unwrap();
            assert!(
                other < g,
                "{name} at ({snr1},{snr2}): {other} not below {g}"
            );
        }
    }

    // Fifty randomized finite families pass the converse chain.
    let mut rng = ChaCha12Rng::seed_from_u64(0xD7);
    for trial in 0..50 {
        let k = 2 + (rng.next_u64() % 2) as usize;
        let raw: Vec<(InputDistribution, f64)> = (0..k)
            .map(|_| {
                let x1 = unif(&mut rng, 0.3, 2.5);
                let x2 = unif(&mut rng, -2.5, -0.3);
                let w = unif(&mut rng, 0.2, 0.8);
                let d = InputDistribution::make_discrete(&[(x1, w), (x2, 1.0 - w)]).unwrap();
                (d, unif(&mut rng, 0.2, 1.0))
            })
            .collect();
        let total: f64 = raw.iter().map(|(_, p)| p).sum();
        let family: Vec<(InputDistribution, f64)> = {
            let normalized: Vec<(InputDistribution, f64)> =
                raw.into_iter().map(|(d, p)| (d, p / total)).collect();
            let power = InputDistribution::mix(&normalized)
                .unwrap()
                .moment(2, false)
                .unwrap();
            let s = power.sqrt();
            normalized
                .into_iter()
                .map(|(d, p)| (d.affine(1.0 / s, 0.0), p))
                .collect()
        };
        let snr1 = unif(&mut rng, 1.2, 3.5);
        let snr2 = snr1 * unif(&mut rng, 0.15, 0.7);
        let report = broadcast_converse_check(&family, snr1, snr2)
            .unwrap_or_else(|e| panic!("trial {trial}: {e}"));
        assert!((0.0..=1.0).contains(&report.alpha), "trial {trial}");
        assert!(report.band_violation <= 1e-8, "trial {trial}");
        // The meeting point is certified on [0, snr2]; band domination
        // covers the rest of the way to snr1.
        assert!(
            report.snr0 >= 0.0 && report.snr0 <= snr2 + 1e-8,
            "trial {trial}: snr0 {} outside [0, {snr2}]",
            report.snr0
        );
    }

    // Entropy power: nonnegative margin on the continuous corpus, equality
    // for Gaussian inputs.
    for (name, dist) in corpus::continuous_corpus() {
        for var_z in [0.5, 1.0] {
            let report = epi_gaussian_check(&dist, var_z).unwrap();
            assert!(
                report.margin >= -1e-3,
                "{name}, var_z {var_z}: margin {:.3e}",
                report.margin
            );
            assert!(
                report.min_cumulative >= -1e-7,
                "{name}, var_z {var_z}: cumulative {:.3e}",
                report.min_cumulative
            );
        }
    }
    for var in [0.5, 1.0] {
        let g = InputDistribution::make_gaussian(0.0, var).unwrap();
        let report = epi_gaussian_check(&g, 1.0).unwrap();
        assert!(
            report.margin.abs() <= 2e-3,
            "gaussian variance {var}: margin {:.3e} off equality",
            report.margin
        );
    }
}

#[test]
fn c12_monte_carlo_brackets_quadrature() {
    const N: u64 = 1_000_000;
    for (name, dist) in corpus::default_corpus() {
        let est = mc_mmse(&dist, 1.3, N, 101).unwrap();
        let (quad, _) = mmse_at(&dist, 1.3).unwrap();
        assert!(
            (est.value - quad).abs() <= 4.0 * est.stderr,
            "{name} error estimate: mc {} +- {} vs quad {quad}",
            est.value,
            est.stderr
        );

        let est = mc_mutual_information(&dist, 0.8, N, 211).unwrap();
        let quad = mutual_information(&dist, 0.8).unwrap();
        assert!(
            (est.value - quad).abs() <= 4.0 * est.stderr,
            "{name} information estimate: mc {} +- {} vs quad {quad}",
            est.value,
            est.stderr
        );
    }

    for (name, dist, y, snr) in [
        ("binary_pm1", corpus::binary_pm1(), 1.0, 1.0),
        ("gaussian_unit", corpus::gaussian_unit(), 0.7, 2.0),
        (
            "symmetric_gaussian_pair",
            corpus::symmetric_gaussian_pair(),
            -0.5,
            1.5,
        ),
    ] {
        let est = mc_posterior_slice(&dist, y, snr, N, 307).unwrap();
        let summary = posterior_summary(&dist, y, snr, 4).unwrap();
        assert!((est.mean.value - summary.mean).abs() <= 4.0 * est.mean.stderr, "{name} mean");
        for (mc, order) in [(est.m2, 2), (est.m3, 3), (est.m4, 4)] {
            assert!(
                (mc.value - summary.central_moment(order)).abs() <= 4.0 * mc.stderr,
                "{name} central moment {order}: mc {} +- {} vs quad {}",
                mc.value,
                mc.stderr,
                summary.central_moment(order)
            );
        }
    }
}
