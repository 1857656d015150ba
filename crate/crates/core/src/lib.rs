//! Achievable rates of rate-splitting multiple access (RSMA) under
//! finite-alphabet inputs and mismatched, Gaussian-approximating decoders.
//!
//! The crate covers conventional RSMA (with and without successive
//! interference cancellation) and codeword-segmentation RSMA:
//!
//! * [`alphabet`]: unit-power constellations and the transmission modes
//!   admissible under a decoding-complexity budget.
//! * [`channel`]: one-ring correlated Rayleigh channels sampled through their
//!   Karhunen-Loève representation.
//! * [`gmi`]: generalized mutual information (Monte-Carlo exact value,
//!   closed-form approximation and its gradient).
//! * [`rates`]: per-stream and per-user rates for each scheme.
//! * [`optimize`]: barrier-augmented subgradient ascent for sum rate and
//!   max-min fairness.
//! * [`harness`]: experiment configs, ergodic sweeps and CSV reports.

pub mod alphabet;
pub mod channel;
pub mod error;
pub mod gmi;
pub mod harness;
pub mod optimize;
pub mod rates;
pub mod seed;

pub use error::{Error, Result};

/// Complex sample type used throughout the crate.
pub type C64 = num_complex::Complex64;
