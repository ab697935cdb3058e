use serde::{Deserialize, Serialize};

use crate::rss::{energy_vector, moving_average};
use crate::siggen::{ActivityMask, IqFrame};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct LdaConfig {
    /// Width of the trailing moving average applied to `|x|^2` before the split.
    pub smoothing_len: usize,
}

impl Default for LdaConfig {
    fn default() -> Self {
        Self { smoothing_len: 16 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LdaOutcome {
    pub mask: ActivityMask,
    /// Chosen threshold; `None` when the feature is constant and no split exists.
    pub threshold: Option<f64>,
}

impl LdaOutcome {
    pub fn is_degenerate(&self) -> bool {
        self.threshold.is_none()
    }
}

/// Threshold `t` maximizing the Fisher criterion
/// `J(t) = (mean_hi - mean_lo)^2 / (var_lo + var_hi)` over the two classes
/// `{v <= t}` and `{v > t}`.
///
/// Every split between distinct sorted values is evaluated exactly with
/// prefix sums; ties in `J` go to the smallest threshold. A split with two
/// zero-variance classes scores infinity. Returns `None` for constant input.
pub fn fisher_threshold(values: &[f64]) -> Option<f64> {
    let n = values.len();
    if n < 2 {
        return None;
    }
    let mut sorted = values.to_vec();
    sorted.sort_unstable_by(f64::total_cmp);
    // Centering keeps the prefix-sum variances from cancelling.
    let center = sorted.iter().sum::<f64>() / n as f64;
    let total: f64 = sorted.iter().map(|v| v - center).sum();
    let total_sq: f64 = sorted.iter().map(|v| (v - center) * (v - center)).sum();

    let (mut s, mut sq) = (0.0, 0.0);
    let mut best: Option<(f64, f64)> = None;
    for i in 0..n - 1 {
        let d = sorted[i] - center;
        s += d;
        sq += d * d;
        if sorted[i] == sorted[i + 1] {
            continue;
        }
        let (n0, n1) = ((i + 1) as f64, (n - i - 1) as f64);
        let (m0, m1) = (s / n0, (total - s) / n1);
        let v0 = (sq / n0 - m0 * m0).max(0.0);
        let v1 = ((total_sq - sq) / n1 - m1 * m1).max(0.0);
        let num = (m1 - m0) * (m1 - m0);
        let j = if v0 + v1 > 0.0 { num / (v0 + v1) } else { f64::INFINITY };
        if best.is_none_or(|(bj, _)| j > bj) {
            best = Some((j, sorted[i]));
        }
    }
    best.map(|(_, t)| t)
}

/// Fisher-discriminant separation of the smoothed energy into two classes.
pub fn lda_separate(x: &IqFrame, cfg: &LdaConfig) -> Result<LdaOutcome> {
    if cfg.smoothing_len == 0 {
        return Err(Error::invalid("smoothing_len must be >= 1"));
    }
    if x.len() < 2 * cfg.smoothing_len {
        return Err(Error::invalid(format!(
            "frame of {} samples too short for smoothing length {}",
            x.len(),
            cfg.smoothing_len
        )));
    }
    let smoothed = moving_average(&energy_vector(x), cfg.smoothing_len)?;
    let threshold = fisher_threshold(&smoothed);
    let mask = match threshold {
        Some(t) => ActivityMask::new(smoothed.iter().map(|&v| v > t).collect()),
        None => ActivityMask::zeros(x.len()),
    };
    Ok(LdaOutcome { mask, threshold })
}
