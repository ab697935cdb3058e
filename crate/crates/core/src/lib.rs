//! Blind separation of signal-bearing and noise-only samples in energy
//! detection frames, for transmitters that switch on and off mid-frame.
//!
//! The crate is organised around the processing chain:
//!
//! * [`siggen`] synthesizes labelled ON/OFF frames and reads recorded I/Q traces.
//! * [`rss`] is the rank-order-filter separator (energy vector, moving average,
//!   erosion/dilation size scan, derivative marking).
//! * [`baselines`] holds the two reference separators (FCME noise floor with a
//!   Welch periodogram, and a one-dimensional Fisher discriminant split).
//! * [`edmodel`] is the energy-detection model for intermittent signals and the
//!   mask-driven parameter estimator.
//! * [`bench`] computes separation metrics, runs parameter sweeps and timing
//!   comparisons, and writes CSV.

pub mod baselines;
pub mod bench;
pub mod edmodel;
mod error;
pub mod rss;
pub mod siggen;

pub use error::{Error, Result};
pub use rss::{separate, EnergyVector, SeparationConfig, SeparationResult};
pub use siggen::{ActivityMask, IqFrame, PuTrafficParams};
