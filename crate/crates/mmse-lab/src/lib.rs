//! Conditional-mean estimation in additive Gaussian noise.
//!
//! The observation model throughout is `Y = sqrt(snr) X + N` with standard
//! Gaussian noise `N` independent of the input `X`. Around the minimum
//! mean-square error of that model the crate provides:
//!
//! * [`distributions`] — finite mixtures of point masses and Gaussian
//!   components, with moments, affine maps, convolution, normalized iid
//!   sums, and a JSON schema.
//! * [`channel`] — output densities, posterior means, central-moment
//!   summaries, posterior laws, and sub-Gaussian posterior tail bounds.
//! * [`mmse`] — the error curve itself: point evaluation with a quadrature
//!   error estimate, upper bounds, the affine transformation law, the
//!   two-look identity, and side-information variants.
//! * [`calculus`] — analytic derivatives of the curve up to order three,
//!   its expansion at zero, and a Richardson finite-difference engine.
//! * [`infotheory`] — mutual information, source and differential entropy
//!   through integrals of the error curve, and information derivatives.
//! * [`analysis`] — single-crossing scans against Gaussian reference
//!   curves, Gaussian dominance, mixture concavity, smoothing by sums, and
//!   blend inequalities.
//! * [`capacity`] — secrecy rates of the degraded eavesdropper pair, the
//!   two-user broadcast region with its converse chain, and the
//!   Gaussian-perturbation entropy-power check.
//! * [`oracle`] — seeded, bit-reproducible Monte Carlo estimators, the
//!   independent verification channel for every quadrature quantity.
//! * [`quadrature`] — shared trapezoid-doubling, adaptive-Simpson, and
//!   Gauss-Hermite machinery.
//! * [`corpus`] — named reference inputs used across tests and the
//!   command-line check suite.
//!
//! ```
//! use mmse_lab::mmse::mmse_at;
//! use mmse_lab::InputDistribution;
//!
//! // For a unit Gaussian input the error curve is exactly 1/(1 + snr).
//! let x = InputDistribution::make_gaussian(0.0, 1.0)?;
//! let (value, quad_err) = mmse_at(&x, 3.0)?;
//! assert!((value - 0.25).abs() < 1e-9 + quad_err);
//! # Ok::<(), mmse_lab::Error>(())
//! ```

pub mod analysis;
pub mod calculus;
pub mod capacity;
pub mod channel;
pub mod corpus;
pub mod distributions;
pub mod error;
pub mod infotheory;
pub mod mmse;
pub mod oracle;
pub mod quadrature;

pub use distributions::InputDistribution;
pub use error::{Error, Result};
