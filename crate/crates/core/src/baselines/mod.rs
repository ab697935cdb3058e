//! Reference separators: a noise-floor-driven block energy detector (FCME
//! over a Welch periodogram) and a Fisher-discriminant energy split.

mod fcme;
mod lda;
mod welch;

pub use fcme::{fcme_noise_floor, fcme_separate, FcmeConfig};
pub use lda::{fisher_threshold, lda_separate, LdaConfig, LdaOutcome};
pub use welch::welch_periodogram;
