//! Competitive ("amplified") estimators for additive properties of discrete
//! distributions.
//!
//! Given `n` samples, the plug-in estimator `Σ f(N_i / n)` is biased in a way
//! that is exactly described by Bernstein polynomials. The estimators here
//! replace the plug-in on low-count symbols with unbiased falling-factorial
//! estimates of low-degree polynomials that track the Bernstein polynomial of
//! a *larger* sample, so that `n` samples behave like `n log n` of them
//! (entropy, Lipschitz properties such as ℓ1-distance) or `n log S` of them
//! (support size and coverage).
//!
//! Modules:
//!
//! * [`dist`] synthetic distribution families, exact property values, sampling.
//! * [`profile`] count vectors, fingerprints, falling factorials, Poisson tails.
//! * [`polyapprox`] Bernstein oracles, near-min-max approximation and the
//!   polynomial constructions behind the estimators.
//! * [`estimators`] plug-in baselines and competitive estimators.
//! * [`bench`] the experiment harness, result emitters and the CLI.
//!
//! All logarithms are natural; entropies are in nats.

pub mod bench;
pub mod dist;
pub mod error;
pub mod estimators;
pub mod numeric;
pub mod polyapprox;
pub mod profile;

pub use error::{Error, Result};
