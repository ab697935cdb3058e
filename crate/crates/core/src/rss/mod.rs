//! Rank-order-filter samples separation.
//!
//! Processing chain for one frame `x` of `N` samples:
//!
//! 1. energy `y[n] = |x[n]|^2`, smoothed by a short trailing average of
//!    width `m_init`;
//! 2. erosion/dilation size scan ([`rof_scan`]) choosing `m_sec`, the window
//!    with the largest relative energy drop;
//! 3. a second trailing average of width `m_sec`;
//! 4. derivative marking ([`mark_from_derivative`]) with minimal signal width
//!    `lambda_msw`.
//!
//! Inside the pipeline both averages shrink their window over the first
//! samples instead of padding with zeros: a zero-padded start ramps up like
//! a burst onset and would be marked on every frame. Only the sign of the
//! second average's first difference is used, so it is read off `y_bar`
//! directly instead of being materialized.

mod kernels;
mod marking;
mod scan;

use std::ops::Deref;

use serde::{Deserialize, Serialize};

use crate::siggen::{ActivityMask, IqFrame};
use crate::{Error, Result};

pub use kernels::{moving_average, sliding_max, sliding_min};
pub use marking::mark_from_derivative;
pub use scan::{opening_sums, rof_scan, rof_scan_with, ScanMode, ScanResult};

/// Squared magnitudes (or smoothed versions of them).
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyVector(Vec<f64>);

impl EnergyVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(i) = values.iter().position(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::invalid(format!("energy value at {i} is negative or non-finite")));
        }
        Ok(Self(values))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }
}

impl Deref for EnergyVector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

pub fn energy_vector(x: &IqFrame) -> EnergyVector {
    EnergyVector(x.samples().iter().map(|s| s.norm_sqr()).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeparationConfig {
    /// Width of the first (noise-reducing) moving average.
    pub m_init: usize,
    /// Minimal signal width: shortest rising run accepted as signal.
    pub lambda_msw: usize,
}

impl Default for SeparationConfig {
    /// Settings for 1024-sample frames.
    fn default() -> Self {
        Self::for_frame_len(1024)
    }
}

impl SeparationConfig {
    /// `m_init = 3N / 256` and `lambda_msw = ceil(0.05 N)`: 12 and 52 at N = 1024.
    pub fn for_frame_len(n: usize) -> Self {
        Self { m_init: (3 * n / 256).max(1), lambda_msw: n.div_ceil(20).max(1) }
    }

    pub fn validate(&self, frame_len: usize) -> Result<()> {
        if self.m_init == 0 {
            return Err(Error::invalid("m_init must be >= 1"));
        }
        if self.m_init.saturating_mul(8) > frame_len {
            return Err(Error::invalid(format!(
                "m_init {} too large for {frame_len}-sample frame (limit N/8)",
                self.m_init
            )));
        }
        if self.lambda_msw == 0 || self.lambda_msw.saturating_add(2) > frame_len {
            return Err(Error::invalid(format!(
                "lambda_msw {} out of range for {frame_len}-sample frame",
                self.lambda_msw
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeparationResult {
    pub mask: ActivityMask,
    /// Width of the second moving average chosen by the scan.
    pub m_sec: usize,
    /// Relative energy decrease; entry `i` is window size `k = i + 2`.
    pub energy_decrease: Vec<f64>,
}

impl SeparationResult {
    /// Splits `y` into (signal, noise) parts: `signal = y * mask`,
    /// `noise = y - signal`.
    pub fn split(&self, y: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        if y.len() != self.mask.len() {
            return Err(Error::LengthMismatch { expected: self.mask.len(), actual: y.len() });
        }
        Ok(y.iter().zip(self.mask.bits()).map(|(&v, &b)| if b { (v, 0.0) } else { (0.0, v) }).unzip())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&SeparationDoc::from(self))?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: SeparationDoc = serde_json::from_str(text)?;
        doc.try_into()
    }
}

/// Serialized form: the mask is stored as `[value, run length]` pairs.
#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SeparationDoc {
    mask: Vec<(u8, usize)>,
    m_sec: usize,
    energy_decrease: Vec<f64>,
}

impl From<&SeparationResult> for SeparationDoc {
    fn from(r: &SeparationResult) -> Self {
        Self { mask: r.mask.to_runs(), m_sec: r.m_sec, energy_decrease: r.energy_decrease.clone() }
    }
}

impl TryFrom<SeparationDoc> for SeparationResult {
    type Error = Error;

    fn try_from(doc: SeparationDoc) -> Result<Self> {
        let mask = ActivityMask::from_runs(&doc.mask).map_err(|e| Error::MalformedDocument(e.to_string()))?;
        if mask.is_empty() {
            return Err(Error::MalformedDocument("empty mask".into()));
        }
        if doc.m_sec < 2 {
            return Err(Error::MalformedDocument(format!("m_sec {} below 2", doc.m_sec)));
        }
        Ok(Self { mask, m_sec: doc.m_sec, energy_decrease: doc.energy_decrease })
    }
}

/// Separates signal-bearing from noise-only samples of `x`.
pub fn separate(x: &IqFrame, cfg: &SeparationConfig) -> Result<SeparationResult> {
    let n = x.len();
    cfg.validate(n)?;
    let y = energy_vector(x);
    let y_bar = kernels::moving_average_shrinking(&y, cfg.m_init)?;
    let scan = rof_scan(&y_bar)?;
    let mask = marking::mark_lagged(&y_bar, scan.m_sec, cfg.lambda_msw)?;
    Ok(SeparationResult { mask, m_sec: scan.m_sec, energy_decrease: scan.energy_decrease })
}
