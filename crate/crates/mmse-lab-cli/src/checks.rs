//! The invariant suite behind `mmse-lab check`: fast structural checks
//! over a named corpus, reported as one summary document.
//!
//! Every check reduces to a single violation measure that passes when it
//! is at most its limit: closed-form comparisons report a relative or
//! absolute error, one-sided inequalities report the negated residual, and
//! oracle comparisons report the distance in standard errors. A library
//! error inside a check marks it failed and carries the message instead of
//! a value; it never aborts the rest of the suite.

use rand_chacha::rand_core::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::Serialize;

use mmse_lab::analysis::{
    check_concavity, check_cosine_mix, check_gaussian_dominance, check_sum_monotonicity,
    check_tv_inequality, single_crossing, GridConfig,
};
use mmse_lab::calculus::{
    default_step_schedule, derivative_report, finite_difference_of, taylor_zero,
};
use mmse_lab::capacity::{broadcast_converse_check, epi_gaussian_check, secrecy_capacity, secrecy_gap};
use mmse_lab::corpus;
use mmse_lab::distributions::Kind;
use mmse_lab::infotheory::{differential_entropy, discrete_entropy, mutual_information};
use mmse_lab::mmse::{conditional_mmse, incremental_mmse, mmse_at, mmse_curve, mmse_shift_scale_check};
use mmse_lab::oracle::{mc_mmse, mc_mutual_information};
use mmse_lab::quadrature::log_grid;
use mmse_lab::{Error, InputDistribution, Result};

const SCHEMA_CHECK: &str = "mmse-lab/check/v1";

/// One check: `value <= limit` passes; a trapped library error fails with
/// its message in place of the value.
#[derive(Serialize)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub subject: String,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
    pub limit: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Serialize)]
pub struct GroupOutcome {
    pub name: &'static str,
    pub checks: Vec<CheckOutcome>,
    pub passed: usize,
    pub failed: usize,
}

#[derive(Serialize)]
pub struct Summary {
    pub schema: &'static str,
    pub corpus: String,
    pub seed: u64,
    pub oracle_sigmas: f64,
    pub groups: Vec<GroupOutcome>,
    pub passed: usize,
    pub failed: usize,
    pub ok: bool,
}

impl Summary {
    /// Human-readable lines for every failed check.
    pub fn failures(&self) -> Vec<String> {
        let mut out = Vec::new();
        for g in &self.groups {
            for c in &g.checks {
                if !c.passed {
                    match (&c.value, &c.error) {
                        (_, Some(e)) => {
                            out.push(format!("check {}/{} [{}]: {e}", g.name, c.name, c.subject))
                        }
                        (Some(v), None) => out.push(format!(
                            "check {}/{} [{}]: {v:.6e} exceeds {:.1e}",
                            g.name, c.name, c.subject, c.limit
                        )),
                        (None, None) => {
                            out.push(format!("check {}/{} [{}] failed", g.name, c.name, c.subject))
                        }
                    }
                }
            }
        }
        out
    }
}

/// Collects outcomes under the uniform `value <= limit` convention.
struct Recorder {
    checks: Vec<CheckOutcome>,
}

impl Recorder {
    fn new() -> Self {
        Recorder { checks: Vec::new() }
    }

    fn at_most(&mut self, name: &'static str, subject: &str, result: Result<f64>, limit: f64) {
        let outcome = match result {
            Ok(v) => CheckOutcome {
                name,
                subject: subject.to_string(),
                passed: v <= limit,
                value: Some(v),
                limit,
                error: None,
            },
            Err(e) => CheckOutcome {
                name,
                subject: subject.to_string(),
                passed: false,
                value: None,
                limit,
                error: Some(e.to_string()),
            },
        };
        self.checks.push(outcome);
    }

    fn finish(self, name: &'static str) -> GroupOutcome {
        let passed = self.checks.iter().filter(|c| c.passed).count();
        let failed = self.checks.len() - passed;
        GroupOutcome {
            name,
            checks: self.checks,
            passed,
            failed,
        }
    }
}

/// Run one group (or `all`) over the named corpus.
pub fn run(group: &str, corpus_name: &str, seed: u64, oracle_sigmas: f64) -> Result<Summary> {
    if !(oracle_sigmas > 0.0) || !oracle_sigmas.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "oracle acceptance width {oracle_sigmas} must be a positive number of standard errors"
        )));
    }
    let members = corpus::corpus_by_name(corpus_name)?;
    let groups: Vec<GroupOutcome> = match group {
        "all" => vec![
            group_curve(&members),
            group_calculus(&members),
            group_info(&members),
            group_structure(&members),
            group_capacity(&members, seed),
            group_oracle(&members, seed, oracle_sigmas),
        ],
        "curve" => vec![group_curve(&members)],
        "calculus" => vec![group_calculus(&members)],
        "info" => vec![group_info(&members)],
        "structure" => vec![group_structure(&members)],
        "capacity" => vec![group_capacity(&members, seed)],
        "oracle" => vec![group_oracle(&members, seed, oracle_sigmas)],
        other => {
            return Err(Error::InvalidParameter(format!(
                "unknown check group '{other}' (expected all, curve, calculus, info, structure, capacity, or oracle)"
            )))
        }
    };
    let passed = groups.iter().map(|g| g.passed).sum();
    let failed = groups.iter().map(|g| g.failed).sum();
    Ok(Summary {
        schema: SCHEMA_CHECK,
        corpus: corpus_name.to_string(),
        seed,
        oracle_sigmas,
        groups,
        passed,
        failed,
        ok: failed == 0,
    })
}

fn scan_grid() -> Vec<f64> {
    log_grid(1e-2, 1e2, 16)
}

/// Closed forms, bounds, monotonicity, the affine law, and the two-look
/// identity, per corpus member.
fn group_curve(members: &[(&'static str, InputDistribution)]) -> GroupOutcome {
    let mut r = Recorder::new();
    let grid = scan_grid();
    for (name, dist) in members {
        if dist.kind() == Kind::Gaussian {
            let s2 = dist.variance();
            let worst = mmse_curve(dist, &grid).map(|curve| {
                curve
                    .points
                    .iter()
                    .map(|p| {
                        let closed = s2 / (1.0 + s2 * p.snr);
                        (p.mmse - closed).abs() / closed
                    })
                    .fold(0.0, f64::max)
            });
            r.at_most("gaussian_closed_form", name, worst, 1e-9);
        }
        let curve = mmse_curve(dist, &grid);
        let bound_violation = curve.as_ref().map_err(Clone::clone).map(|c| {
            c.points
                .iter()
                .map(|p| (p.mmse - p.upper_bound).max(-p.mmse))
                .fold(f64::MIN, f64::max)
        });
        r.at_most("bounds_hold", name, bound_violation, 1e-9);
        let worst_increase = curve.map(|c| {
            c.points
                .windows(2)
                .map(|w| w[1].mmse - w[0].mmse)
                .fold(f64::MIN, f64::max)
        });
        r.at_most("monotone_nonincreasing", name, worst_increase, 1e-9);

        let tol = 1e-7 * (1.0 + 2.89 * dist.variance());
        let affine = mmse_shift_scale_check(dist, 1.7, -0.3, 1.3, tol).map(|rep| rep.residual);
        r.at_most("affine_law", name, affine, tol);

        let two_look = incremental_mmse(dist, 1.0, 0.5).and_then(|lhs| {
            let rhs = mmse_at(dist, 1.5)?.0;
            Ok((lhs - rhs).abs() / rhs.max(1e-12))
        });
        r.at_most("two_look_identity", name, two_look, 1e-6);
    }
    r.finish("curve")
}

/// Analytic derivatives against Richardson differences, and the leading
/// expansion coefficient, per corpus member.
fn group_calculus(members: &[(&'static str, InputDistribution)]) -> GroupOutcome {
    let mut r = Recorder::new();
    for (name, dist) in members {
        for order in 1..=3usize {
            let subject = format!("{name} order {order}");
            let gap = derivative_report(dist, 1.0, order, None).map(|rep| {
                // Vanishing derivatives sit in quadrature roundoff; report
                // the absolute gap there instead of a meaningless ratio.
                if rep.analytic.abs() > 1e-10 || rep.finite_diff.abs() > 1e-10 {
                    rep.rel_gap
                } else {
                    (rep.analytic - rep.finite_diff).abs() * 1e8
                }
            });
            r.at_most("derivative_matches_differences", &subject, gap, 1e-4);
        }
        let leading = taylor_zero(dist, 0).map(|c| (c[0] - dist.variance()).abs() / dist.variance());
        r.at_most("expansion_starts_at_variance", name, leading, 1e-12);
    }
    r.finish("calculus")
}

/// Information integrals: slope against half the error, entropy closed
/// forms, nonnegativity and monotonicity.
fn group_info(members: &[(&'static str, InputDistribution)]) -> GroupOutcome {
    let mut r = Recorder::new();
    for (name, dist) in members {
        let slope = finite_difference_of(
            &mut |s: f64| mutual_information(dist, s),
            1.0,
            1,
            &default_step_schedule(1.0),
        )
        .and_then(|slope| {
            let half = 0.5 * mmse_at(dist, 1.0)?.0;
            Ok((slope - half).abs() / half.abs().max(1e-12))
        });
        r.at_most("slope_is_half_error", name, slope, 1e-5);

        if dist.is_discrete() {
            let direct: f64 = dist
                .atoms()
                .iter()
                .map(|a| -a.weight * a.weight.ln())
                .sum();
            let h = discrete_entropy(dist).map(|h| (h - direct).abs());
            r.at_most("source_entropy_closed_form", name, h, 1e-3);
        }
        if dist.kind() == Kind::Gaussian {
            let closed =
                0.5 * (2.0 * std::f64::consts::PI * std::f64::consts::E * dist.variance()).ln();
            let h = differential_entropy(dist).map(|h| (h - closed).abs());
            r.at_most("differential_entropy_closed_form", name, h, 1e-3);
        }

        let monotone = mutual_information(dist, 0.5).and_then(|i0| {
            let i1 = mutual_information(dist, 1.0)?;
            let i2 = mutual_information(dist, 2.0)?;
            Ok((-i0).max(i0 - i1).max(i1 - i2))
        });
        r.at_most("information_nondecreasing", name, monotone, 1e-9);
    }
    r.finish("info")
}

/// Structural inequalities: dominance, crossing scans, concavity,
/// conditioning, smoothing by sums, cosine blends, leave-one-out.
fn group_structure(members: &[(&'static str, InputDistribution)]) -> GroupOutcome {
    let mut r = Recorder::new();
    let gauss = corpus::gaussian_unit();
    for (name, dist) in members {
        let dominance = check_gaussian_dominance(dist, &log_grid(1e-2, 1e2, 12));
        r.at_most("gaussian_dominance", name, dominance, 1e-7);

        let config = GridConfig {
            lo: 1e-2,
            hi: 1e2,
            n: 80,
            zero_band: 1e-9,
        };
        let crossings =
            single_crossing(dist, 1.0, &config).map(|rep| rep.crossings.len() as f64);
        r.at_most("at_most_one_crossing", name, crossings, 1.0);

        let concave = check_concavity(dist, &gauss, 0.3, 1.0).map(|res| -res);
        r.at_most("mixture_concavity", name, concave, 1e-7);

        let conditioning = {
            let family = vec![(dist.clone(), 0.6), (gauss.clone(), 0.4)];
            InputDistribution::mix(&family).and_then(|blend| {
                Ok(conditional_mmse(&family, 1.0)? - mmse_at(&blend, 1.0)?.0)
            })
        };
        r.at_most("side_information_helps", name, conditioning, 1e-9);
    }

    let binary = corpus::binary_pm1();
    let smoothing = check_sum_monotonicity(&binary, 4, 1.0)
        .map(|gaps| -gaps.into_iter().fold(f64::INFINITY, f64::min));
    r.at_most("sums_smooth_the_error", "binary_pm1 n<=4", smoothing, 1e-7);

    let cosine = check_cosine_mix(&binary, &gauss, 0.7, 1.0).map(|res| -res);
    r.at_most("cosine_blend", "binary_pm1 + gaussian_unit", cosine, 1e-7);

    let trio = [
        corpus::gaussian_unit(),
        corpus::binary_pm1(),
        corpus::gaussian_quarter(),
    ];
    let tv = check_tv_inequality(&trio, &[0.25, 0.5, 0.25], 1.0).map(|res| -res);
    r.at_most(
        "leave_one_out",
        "gaussian_unit + binary_pm1 + gaussian_quarter",
        tv,
        1e-7,
    );
    r.finish("structure")
}

fn u01(rng: &mut ChaCha12Rng) -> f64 {
    ((rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / 9_007_199_254_740_992.0)
}

fn unif(rng: &mut ChaCha12Rng, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * u01(rng)
}

/// Secrecy closed form and ceiling, randomized broadcast converse chains,
/// and the entropy-power margin for continuous members.
fn group_capacity(members: &[(&'static str, InputDistribution)], seed: u64) -> GroupOutcome {
    let mut r = Recorder::new();
    let (snr1, snr2) = (4.0, 1.0);
    let capacity = secrecy_capacity(snr1, snr2);
    let closed = 0.5 * ((1.0 + snr1) / (1.0 + snr2)).ln();
    r.at_most(
        "secrecy_closed_form",
        "gaussian (4, 1)",
        capacity.clone().map(|c| (c - closed).abs() / closed),
        1e-12,
    );
    if let Ok(cap) = capacity {
        // The ceiling is the maximum over unit-power inputs, so only
        // members within the power constraint compete with it.
        for (name, dist) in members {
            if dist.second_moment() > 1.0 + 1e-9 {
                continue;
            }
            let slack = secrecy_gap(dist, snr1, snr2).map(|gap| gap - cap);
            r.at_most("gaussian_ceiling", name, slack, 1e-8);
        }
    }

    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    for trial in 0..5 {
        let family: Vec<(InputDistribution, f64)> = {
            let raw: Vec<(InputDistribution, f64)> = (0..2)
                .map(|_| {
                    let x1 = unif(&mut rng, 0.3, 2.5);
                    let x2 = unif(&mut rng, -2.5, -0.3);
                    let w = unif(&mut rng, 0.2, 0.8);
                    let d = InputDistribution::make_discrete(&[(x1, w), (x2, 1.0 - w)])
                        .expect("separated atoms with convex weights are valid");
                    (d, unif(&mut rng, 0.2, 1.0))
                })
                .collect();
            let total: f64 = raw.iter().map(|(_, p)| p).sum();
            let normalized: Vec<(InputDistribution, f64)> =
                raw.into_iter().map(|(d, p)| (d, p / total)).collect();
            // The converse chain works under the unit power constraint;
            // rescale the family so the marginal has unit second moment.
            let power = InputDistribution::mix(&normalized)
                .expect("normalized family weights sum to 1")
                .second_moment();
            let s = power.sqrt();
            normalized
                .into_iter()
                .map(|(d, p)| (d.affine(1.0 / s, 0.0), p))
                .collect()
        };
        let s1 = unif(&mut rng, 1.5, 4.0);
        let s2 = s1 * unif(&mut rng, 0.2, 0.7);
        let subject = format!("random family trial {trial}");
        let worst = broadcast_converse_check(&family, s1, s2)
            .map(|rep| (-rep.r1_slack).max(-rep.r2_slack).max(rep.band_violation));
        r.at_most("broadcast_converse", &subject, worst, 1e-6);
    }

    for (name, dist) in members {
        if !dist.is_continuous() {
            continue;
        }
        let report = epi_gaussian_check(dist, 0.5);
        let margin = report
            .as_ref()
            .map_err(Clone::clone)
            .map(|rep| (-rep.margin).max(-rep.min_cumulative));
        r.at_most("entropy_power_margin", name, margin, 1e-3);
        if dist.kind() == Kind::Gaussian {
            let equality = report.map(|rep| rep.margin.abs() / rep.rhs);
            r.at_most("entropy_power_equality", name, equality, 2e-3);
        }
    }
    r.finish("capacity")
}

/// Quadrature against the seeded Monte Carlo estimators, in standard
/// errors.
fn group_oracle(
    members: &[(&'static str, InputDistribution)],
    seed: u64,
    sigmas: f64,
) -> GroupOutcome {
    let mut r = Recorder::new();
    for (name, dist) in members {
        let sigmas_off = mc_mmse(dist, 1.0, 200_000, seed).and_then(|est| {
            let (v, _) = mmse_at(dist, 1.0)?;
            Ok((v - est.value).abs() / est.stderr)
        });
        r.at_most("error_simulation_agrees", name, sigmas_off, sigmas);
    }
    for dist in [corpus::gaussian_unit(), corpus::binary_pm1()] {
        let label = if dist.kind() == Kind::Gaussian {
            "gaussian_unit"
        } else {
            "binary_pm1"
        };
        let sigmas_off = mc_mutual_information(&dist, 1.0, 200_000, seed).and_then(|est| {
            let i = mutual_information(&dist, 1.0)?;
            Ok((i - est.value).abs() / est.stderr)
        });
        r.at_most("information_simulation_agrees", label, sigmas_off, sigmas);
    }
    r.finish("oracle")
}
