//! Seeded Monte Carlo estimators: the independent verification channel for
//! every quadrature-based quantity.
//!
//! Three properties are load-bearing and hold by construction:
//!
//! * **Determinism.** A run is partitioned into fixed-size batches; batch
//!   `b` draws from the counter-based stream `b` of a ChaCha generator
//!   seeded once from the caller's seed. Batches may execute on any number
//!   of threads, but their partial sums are merged in batch order, so a
//!   given `(seed, n_samples)` pair produces bit-identical estimates
//!   regardless of parallelism.
//! * **Bit-stable variates.** Gaussian draws go through the inverse CDF
//!   applied to a 53-bit uniform rather than through rejection samplers,
//!   whose consumption pattern (and therefore the whole sample path) can
//!   differ between platforms.
//! * **Lockstep draws.** Every sample consumes a fixed number of uniforms
//!   independent of which mixture part it lands in, so estimates never
//!   depend on data-dependent branching inside the sampler.

use crate::channel::{binomial, log_output_density, ln_normal_pdf, normal_pdf, posterior_mean};
use crate::distributions::InputDistribution;
use crate::error::{Error, Result};
use rand_chacha::rand_core::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;
use serde::Serialize;
use statrs::distribution::{ContinuousCDF, Normal};

/// Smallest accepted sample count; below this the normal-theory error bars
/// are not worth reporting.
pub const MIN_SAMPLES: u64 = 1_000;

/// Samples per stream batch. Each batch is an independent ChaCha stream.
const BATCH_SIZE: u64 = 1 << 14;

/// A Monte Carlo point estimate with its standard error and provenance.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct McEstimate {
    pub value: f64,
    pub stderr: f64,
    pub n_samples: u64,
    pub seed: u64,
}

/// Importance-sampling estimates of the posterior moments at one output
/// value: the conditional mean and the central moments of orders 2 through
/// 4, plus the effective sample size of the weighted ensemble.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SliceEstimate {
    pub mean: McEstimate,
    pub m2: McEstimate,
    pub m3: McEstimate,
    pub m4: McEstimate,
    pub ess: f64,
}

/// Uniform in the open interval (0, 1) with 53-bit resolution.
fn u01(rng: &mut ChaCha12Rng) -> f64 {
    ((rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / 9_007_199_254_740_992.0)
}

/// One mixture part prepared for sampling.
#[derive(Debug, Clone, Copy)]
enum SampledPart {
    Atom(f64),
    Component { mean: f64, sd: f64 },
}

/// Inverse-CDF sampler over the parts of an input distribution.
struct PartSampler {
    cuts: Vec<f64>,
    parts: Vec<SampledPart>,
}

impl PartSampler {
    fn new(dist: &InputDistribution) -> Self {
        let mut cuts = Vec::with_capacity(dist.part_count());
        let mut parts = Vec::with_capacity(dist.part_count());
        let mut acc = 0.0;
        for at in dist.atoms() {
            acc += at.weight;
            cuts.push(acc);
            parts.push(SampledPart::Atom(at.location));
        }
        for c in dist.components() {
            acc += c.weight;
            cuts.push(acc);
            parts.push(SampledPart::Component {
                mean: c.mean,
                sd: c.variance.sqrt(),
            });
        }
        PartSampler { cuts, parts }
    }

    /// Draw one variate. Exactly two uniforms are consumed by the caller
    /// for every sample: one selects the part, one shapes it (unused for
    /// atoms, to keep the draw count branch-free).
    fn sample(&self, u_select: f64, u_shape: f64, std_normal: &Normal) -> f64 {
        let total = *self.cuts.last().expect("nonempty distribution");
        let t = u_select * total;
        let idx = self.cuts.partition_point(|&c| c < t).min(self.parts.len() - 1);
        match self.parts[idx] {
            SampledPart::Atom(x) => x,
            SampledPart::Component { mean, sd } => mean + sd * std_normal.inverse_cdf(u_shape),
        }
    }
}

/// Run `per_batch` over the fixed batch partition of `n` samples, in
/// parallel, and return the partial results in batch order.
fn batch_map<P, F>(n: u64, seed: u64, per_batch: F) -> Result<Vec<P>>
where
    P: Send,
    F: Fn(u64, &mut ChaCha12Rng) -> Result<P> + Sync,
{
    let n_batches = n.div_ceil(BATCH_SIZE);
    (0..n_batches)
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha12Rng::seed_from_u64(seed);
            rng.set_stream(b);
            let len = BATCH_SIZE.min(n - b * BATCH_SIZE);
            per_batch(len, &mut rng)
        })
        .collect()
}

/// Merge per-batch (sum, sum of squares) pairs into a mean and its
/// standard error.
fn merge_mean(partials: &[(f64, f64)], n: u64, seed: u64) -> McEstimate {
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for &(s, s2) in partials {
        sum += s;
        sum_sq += s2;
    }
    let nf = n as f64;
    let value = sum / nf;
    let var = if n > 1 {
        ((sum_sq / nf - value * value) * nf / (nf - 1.0)).max(0.0)
    } else {
        0.0
    };
    McEstimate {
        value,
        stderr: (var / nf).sqrt(),
        n_samples: n,
        seed,
    }
}

fn validate_run(snr: f64, n_samples: u64) -> Result<()> {
    if !snr.is_finite() || snr < 0.0 {
        return Err(Error::BadSnr(snr));
    }
    if n_samples < MIN_SAMPLES {
        return Err(Error::InvalidParameter(format!(
            "n_samples = {n_samples} is below the minimum of {MIN_SAMPLES}"
        )));
    }
    Ok(())
}

/// Estimate the mean-square estimation error by direct simulation: draw
/// `X` from the prior and `N` standard normal, observe `Y`, and average
/// the squared residual of `X` against the analytic conditional mean.
pub fn mc_mmse(dist: &InputDistribution, snr: f64, n_samples: u64, seed: u64) -> Result<McEstimate> {
    validate_run(snr, n_samples)?;
    let a = snr.sqrt();
    let sampler = PartSampler::new(dist);
    let std_normal = Normal::new(0.0, 1.0).expect("standard normal is valid");
    let partials = batch_map(n_samples, seed, |len, rng| {
        let mut sum = 0.0;
        let mut sum_sq = 0.0;
        for _ in 0..len {
            let u_select = u01(rng);
            let u_shape = u01(rng);
            let u_noise = u01(rng);
            let x = sampler.sample(u_select, u_shape, &std_normal);
            let y = a * x + std_normal.inverse_cdf(u_noise);
            let r = x - posterior_mean(dist, y, snr)?;
            let sq = r * r;
            sum += sq;
            sum_sq += sq * sq;
        }
        Ok((sum, sum_sq))
    })?;
    Ok(merge_mean(&partials, n_samples, seed))
}

/// Estimate the mutual information between the input and the noisy
/// observation as the average of `ln[p(Y|X) / p(Y)]` over simulated
/// `(X, Y)` pairs, with the analytic output density in the denominator.
pub fn mc_mutual_information(
    dist: &InputDistribution,
    snr: f64,
    n_samples: u64,
    seed: u64,
) -> Result<McEstimate> {
    validate_run(snr, n_samples)?;
    let a = snr.sqrt();
    let sampler = PartSampler::new(dist);
    let std_normal = Normal::new(0.0, 1.0).expect("standard normal is valid");
    let partials = batch_map(n_samples, seed, |len, rng| {
        let mut sum = 0.0;
        let mut sum_sq = 0.0;
        for _ in 0..len {
            let u_select = u01(rng);
            let u_shape = u01(rng);
            let u_noise = u01(rng);
            let x = sampler.sample(u_select, u_shape, &std_normal);
            let y = a * x + std_normal.inverse_cdf(u_noise);
            let t = ln_normal_pdf(y, a * x, 1.0) - log_output_density(dist, y, a)?;
            sum += t;
            sum_sq += t * t;
        }
        Ok((sum, sum_sq))
    })?;
    Ok(merge_mean(&partials, n_samples, seed))
}

/// Raw importance sums for one batch of the slice estimator: the weight
/// sum and the weighted raw moments of orders 1 through 4.
type SliceSums = [f64; 5];

/// Squared-influence sums for one batch: the sum of squared weights and
/// the squared influence terms for the mean and the central moments of
/// orders 2 through 4.
type SliceInfluence = [f64; 5];

/// Estimate posterior moments at a fixed output value `y` by
/// self-normalized importance sampling with the prior as proposal and
/// weights `phi(y - sqrt(snr) x)`.
///
/// Standard errors come from the influence-function expansion of each
/// self-normalized ratio, evaluated in a second deterministic pass over
/// the same streams. They are first-order (delta-method) errors, exact in
/// the large-sample limit.
pub fn mc_posterior_slice(
    dist: &InputDistribution,
    y: f64,
    snr: f64,
    n_samples: u64,
    seed: u64,
) -> Result<SliceEstimate> {
    validate_run(snr, n_samples)?;
    if !y.is_finite() {
        return Err(Error::NonFiniteLocation(y));
    }
    let a = snr.sqrt();
    let sampler = PartSampler::new(dist);
    let std_normal = Normal::new(0.0, 1.0).expect("standard normal is valid");

    let draw = |rng: &mut ChaCha12Rng| -> f64 {
        let u_select = u01(rng);
        let u_shape = u01(rng);
        sampler.sample(u_select, u_shape, &std_normal)
    };

    let raw_partials: Vec<SliceSums> = batch_map(n_samples, seed, |len, rng| {
        let mut sums = [0.0; 5];
        for _ in 0..len {
            let x = draw(rng);
            let w = normal_pdf(y, a * x, 1.0);
            let mut p = w;
            sums[0] += w;
            for s in sums.iter_mut().skip(1) {
                p *= x;
                *s += p;
            }
        }
        Ok(sums)
    })?;
    let mut raw = [0.0; 5];
    for batch in &raw_partials {
        for (acc, term) in raw.iter_mut().zip(batch) {
            *acc += term;
        }
    }
    let w_total = raw[0];
    if !(w_total > 0.0) {
        return Err(Error::InvariantViolation(format!(
            "importance weights underflowed at y = {y}: the prior proposal cannot reach this slice"
        )));
    }
    let r: Vec<f64> = raw.iter().map(|s| s / w_total).collect();
    let mean = r[1];
    // Central moments via binomial recombination of the raw ratios.
    let central = |order: usize| -> f64 {
        let mut m = 0.0;
        for (j, rj) in r.iter().enumerate().take(order + 1) {
            m += binomial(order, j) * (-mean).powi((order - j) as i32) * rj;
        }
        m
    };
    let m2 = central(2).max(0.0);
    let m3 = central(3);
    let m4 = central(4);

    let moments = [0.0, m2, m3, m4];
    let infl_partials: Vec<SliceInfluence> = batch_map(n_samples, seed, |len, rng| {
        let mut sums = [0.0; 5];
        for _ in 0..len {
            let x = draw(rng);
            let w = normal_pdf(y, a * x, 1.0);
            let d = x - mean;
            sums[0] += w * w;
            sums[1] += (w * d).powi(2);
            for order in 2..=4usize {
                let g = d.powi(order as i32) - moments[order - 1]
                    - order as f64 * moments[order - 2] * d;
                sums[order] += (w * g).powi(2);
            }
        }
        Ok(sums)
    })?;
    let mut infl = [0.0; 5];
    for batch in &infl_partials {
        for (acc, term) in infl.iter_mut().zip(batch) {
            *acc += term;
        }
    }

    let wrap = |value: f64, influence_sq: f64| McEstimate {
        value,
        stderr: influence_sq.sqrt() / w_total,
        n_samples,
        seed,
    };
    Ok(SliceEstimate {
        mean: wrap(mean, infl[1]),
        m2: wrap(m2, infl[2]),
        m3: wrap(m3, infl[3]),
        m4: wrap(m4, infl[4]),
        ess: w_total * w_total / infl[0],
    })
}
