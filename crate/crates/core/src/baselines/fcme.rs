use serde::{Deserialize, Serialize};

use super::welch::welch_periodogram;
use crate::edmodel::q_inverse;
use crate::rss::energy_vector;
use crate::siggen::{ActivityMask, IqFrame};
use crate::{Error, Result};

const MAX_ITERATIONS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FcmeConfig {
    /// Periodogram segment (and FFT) length.
    pub segment_len: usize,
    /// Energy-detection window as a fraction of the frame.
    pub ed_window_frac: f64,
    /// False-alarm probability of the block energy detector.
    pub pfa: f64,
    /// Clean-set threshold rate used by the excision loop.
    pub pfa_cme: f64,
    /// Fraction of the smallest bins that seeds the clean set.
    pub initial_clean_frac: f64,
}

impl Default for FcmeConfig {
    fn default() -> Self {
        Self { segment_len: 64, ed_window_frac: 0.05, pfa: 0.01, pfa_cme: 0.01, initial_clean_frac: 0.1 }
    }
}

impl FcmeConfig {
    fn validate(&self) -> Result<()> {
        let open_unit = |v: f64| v > 0.0 && v < 1.0;
        if self.segment_len == 0 {
            return Err(Error::invalid("segment_len must be >= 1"));
        }
        for (name, v) in [
            ("ed_window_frac", self.ed_window_frac),
            ("pfa", self.pfa),
            ("pfa_cme", self.pfa_cme),
            ("initial_clean_frac", self.initial_clean_frac),
        ] {
            if !open_unit(v) {
                return Err(Error::invalid(format!("{name} must lie in (0, 1), got {v}")));
            }
        }
        Ok(())
    }
}

/// Forward consecutive mean excision over spectrum bins.
///
/// Starting from the smallest bins, the clean set grows to every bin below
/// `-ln(pfa_cme)` times the clean-set mean until it stops growing; the floor
/// is the final clean-set mean.
pub fn fcme_noise_floor(p: &[f64], cfg: &FcmeConfig) -> Result<f64> {
    cfg.validate()?;
    if p.is_empty() {
        return Err(Error::Empty);
    }
    if p.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
        return Err(Error::invalid("spectrum bins must be finite and non-negative"));
    }
    let mut sorted = p.to_vec();
    sorted.sort_unstable_by(f64::total_cmp);
    if sorted[sorted.len() - 1] == 0.0 {
        return Err(Error::invalid("all-zero spectrum has no noise floor"));
    }

    let t_cme = -cfg.pfa_cme.ln();
    let mut count = ((cfg.initial_clean_frac * sorted.len() as f64).ceil() as usize).clamp(1, sorted.len());
    let mut sum: f64 = sorted[..count].iter().sum();
    for _ in 0..MAX_ITERATIONS {
        let threshold = t_cme * sum / count as f64;
        let below = sorted.partition_point(|&v| v < threshold);
        if below <= count {
            break;
        }
        sum += sorted[count..below].iter().sum::<f64>();
        count = below;
    }
    Ok(sum / count as f64)
}

/// Block energy detector on `|x|^2` against a threshold set from the FCME
/// noise floor.
///
/// Blocks are `W = ceil(ed_window_frac * N)` samples, non-overlapping (the
/// last one may be shorter), and a block is busy when its mean energy exceeds
/// `floor * (1 + Q^-1(pfa) / sqrt(W))`.
pub fn fcme_separate(x: &IqFrame, cfg: &FcmeConfig) -> Result<ActivityMask> {
    cfg.validate()?;
    let n = x.len();
    let w = ((cfg.ed_window_frac * n as f64).ceil() as usize).max(1);
    if n < cfg.segment_len || n < w {
        return Err(Error::invalid(format!("frame of {n} samples too short for FCME configuration")));
    }
    let floor = fcme_noise_floor(&welch_periodogram(x, cfg.segment_len)?, cfg)?;
    let z = q_inverse(cfg.pfa)?;
    let y = energy_vector(x);
    let mut bits = Vec::with_capacity(n);
    for block in y.chunks(w) {
        let len = block.len() as f64;
        let mean = block.iter().sum::<f64>() / len;
        let busy = mean > floor * (1.0 + z / len.sqrt());
        bits.resize(bits.len() + block.len(), busy);
    }
    Ok(ActivityMask::new(bits))
}
