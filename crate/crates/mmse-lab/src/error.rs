//! Error type shared by every module of the crate.
//!
//! Variants split into two broad groups: invalid inputs (bad parameters,
//! malformed distributions, capability caps) and numerical failures
//! (quadrature non-convergence, tail fits over budget, violated internal
//! invariants). The CLI maps the first group to exit code 2 and the second
//! to exit code 3; `Error::is_numerical` encodes that split.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Everything that can go wrong while building distributions or running the
/// numerical routines.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("distribution has no atoms and no components")]
    EmptyDistribution,

    #[error("atom location {0} is not finite")]
    NonFiniteLocation(f64),

    #[error("weight {0} is not a finite probability > 0")]
    BadWeight(f64),

    #[error("weights sum to {0}, which is farther than {1} from 1")]
    WeightSum(f64, f64),

    #[error("variance {0} must be finite and > 0")]
    BadVariance(f64),

    #[error("moment order {k} exceeds the supported cap {cap}")]
    MomentCap { k: usize, cap: usize },

    #[error("kernel order {k} exceeds the supported cap {cap}")]
    KernelOrderCap { k: usize, cap: usize },

    #[error("posterior moment order {k} exceeds the supported cap {cap}")]
    PosteriorOrderCap { k: usize, cap: usize },

    #[error("convolution would need {needed} parts, over the budget {cap}")]
    PartBudget { needed: usize, cap: usize },

    #[error("iid sum count {n} exceeds the supported cap {cap} for discrete laws")]
    SumCountCap { n: usize, cap: usize },

    #[error("snr {0} must be finite and >= 0")]
    BadSnr(f64),

    #[error("snr pair ({snr1}, {snr2}) must satisfy snr1 >= snr2 >= 0")]
    SnrOrder { snr1: f64, snr2: f64 },

    #[error("power-split fraction {0} must lie in [0, 1]")]
    AlphaRange(f64),

    #[error("second moment {0} exceeds the unit power constraint")]
    PowerViolation(f64),

    #[error("operation requires a purely discrete distribution")]
    NotDiscrete,

    #[error("operation requires a purely continuous distribution")]
    NotContinuous,

    #[error("tail bound needs a > 0 (the zero-snr posterior equals the prior)")]
    ZeroSnrTailBound,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("finite-difference step schedule is unusable at snr {snr} for order {order}")]
    StepSchedule { snr: f64, order: usize },

    #[error("quadrature for {context} stalled at error {achieved:e} (requested {requested:e})")]
    Quadrature {
        context: String,
        achieved: f64,
        requested: f64,
    },

    #[error("integrand still {integrand:e} at gamma_max {gamma_max:e}; tail does not decay")]
    TailNonDecay { gamma_max: f64, integrand: f64 },

    #[error("tail fit residual {residual:e} exceeds the error budget {budget:e}")]
    TailFit { residual: f64, budget: f64 },

    #[error("{count} certified sign changes where at most one is possible")]
    CrossingAnomaly { count: usize },

    #[error("internal invariant violated: {0}")]
    InvariantViolation(String),

    #[error("distribution JSON is invalid: {0}")]
    Json(String),
}

impl Error {
    /// True for failures of the numerical machinery (as opposed to bad
    /// inputs). The CLI turns these into exit code 3.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Quadrature { .. }
                | Error::TailNonDecay { .. }
                | Error::TailFit { .. }
                | Error::CrossingAnomaly { .. }
                | Error::InvariantViolation(_)
        )
    }
}
