//! Energy detection of an intermittent transmitter.
//!
//! The test statistic is a weighted mean of the idle-sample and busy-sample
//! energies, with weights `p0`, `p1` equal to the class fractions. Under a
//! Gaussian approximation of the mean energy over `N` samples,
//!
//! ```text
//! Pd = Q( sqrt(N) * (gamma/sigma2 - (1 + p1*rho)) / sqrt(1 + p1*(rho^2 + 2*rho)) )
//! Pf = Q( sqrt(N) * (gamma/sigma2 - 1) )
//! ```
//!
//! where `rho` is the linear SNR and `sigma2` the noise variance.

use serde::{Deserialize, Serialize};

use crate::siggen::ActivityMask;
use crate::{Error, Result};

/// Gaussian tail probability, `Q(x) = erfc(x / sqrt 2) / 2`.
pub fn q_function(x: f64) -> f64 {
    0.5 * libm::erfc(x / std::f64::consts::SQRT_2)
}

/// Inverse of [`q_function`] by bisection, to an argument tolerance of 1e-12.
pub fn q_inverse(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::invalid(format!("probability must lie in (0, 1), got {p}")));
    }
    // Q(-38.5) rounds to 1 and Q(38.5) is below 1e-300.
    let (mut lo, mut hi) = (-38.5f64, 38.5f64);
    while hi - lo > 1e-12 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if q_function(mid) > p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectionModel {
    /// Decision threshold on the mean energy.
    pub gamma: f64,
    pub noise_var: f64,
    /// Linear SNR.
    pub snr: f64,
    pub p0: f64,
    pub p1: f64,
    pub n_samples: usize,
}

impl DetectionModel {
    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return Err(Error::invalid(format!("gamma must be positive, got {}", self.gamma)));
        }
        if !(self.noise_var > 0.0 && self.noise_var.is_finite()) {
            return Err(Error::invalid(format!("noise_var must be positive, got {}", self.noise_var)));
        }
        if !(self.snr >= 0.0 && self.snr.is_finite()) {
            return Err(Error::invalid(format!("snr must be non-negative, got {}", self.snr)));
        }
        if !(0.0..=1.0).contains(&self.p0) || !(0.0..=1.0).contains(&self.p1) {
            return Err(Error::invalid("p0 and p1 must lie in [0, 1]"));
        }
        if (self.p0 + self.p1 - 1.0).abs() > 1e-12 {
            return Err(Error::invalid(format!("p0 + p1 = {} != 1", self.p0 + self.p1)));
        }
        if self.n_samples == 0 {
            return Err(Error::invalid("n_samples must be positive"));
        }
        Ok(())
    }
}

/// Probability of detection.
pub fn pd_theory(m: &DetectionModel) -> Result<f64> {
    m.validate()?;
    let n = (m.n_samples as f64).sqrt();
    let rho = m.snr;
    let arg = n * (m.gamma / m.noise_var - (1.0 + m.p1 * rho)) / (1.0 + m.p1 * (rho * rho + 2.0 * rho)).sqrt();
    Ok(q_function(arg))
}

/// Probability of false alarm.
pub fn pf_theory(m: &DetectionModel) -> Result<f64> {
    m.validate()?;
    let n = (m.n_samples as f64).sqrt();
    Ok(q_function(n * (m.gamma / m.noise_var - 1.0)))
}

/// Threshold giving false-alarm probability `target_pf`.
pub fn gamma_for_pf(target_pf: f64, noise_var: f64, n: usize) -> Result<f64> {
    if !(noise_var > 0.0 && noise_var.is_finite()) {
        return Err(Error::invalid(format!("noise_var must be positive, got {noise_var}")));
    }
    if n == 0 {
        return Err(Error::invalid("n must be positive"));
    }
    Ok(noise_var * (1.0 + q_inverse(target_pf)? / (n as f64).sqrt()))
}

fn check_lengths(y: &[f64], mask: &ActivityMask) -> Result<()> {
    if y.is_empty() {
        return Err(Error::Empty);
    }
    if y.len() != mask.len() {
        return Err(Error::LengthMismatch { expected: y.len(), actual: mask.len() });
    }
    Ok(())
}

/// Per-class energy sums and counts: `(idle sum, idle count, busy sum, busy count)`.
fn class_sums(y: &[f64], mask: &ActivityMask) -> (f64, usize, f64, usize) {
    y.iter().zip(mask.bits()).fold((0.0, 0, 0.0, 0), |(s0, n0, s1, n1), (&v, &b)| {
        if b {
            (s0, n0, s1 + v, n1 + 1)
        } else {
            (s0 + v, n0 + 1, s1, n1)
        }
    })
}

/// Test statistic `beta = p0 * mean(idle) + p1 * mean(busy)` with `p_i = N_i / N`.
/// An empty class contributes nothing.
pub fn test_statistic(y: &[f64], mask: &ActivityMask) -> Result<f64> {
    check_lengths(y, mask)?;
    let (s0, n0, s1, n1) = class_sums(y, mask);
    let n = y.len() as f64;
    let term = |s: f64, k: usize| if k == 0 { 0.0 } else { (k as f64 / n) * (s / k as f64) };
    Ok(term(s0, n0) + term(s1, n1))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimatedParams {
    pub noise_var_hat: f64,
    /// `-inf` when no sample is marked busy or the estimate is clamped to zero.
    pub snr_hat_db: f64,
    pub occupancy_hat: f64,
    pub n0: usize,
    pub n1: usize,
    /// The busy-class mean fell below the noise estimate and the SNR was clamped to 0.
    pub snr_clamped: bool,
}

/// Noise variance, SNR and occupancy implied by a separation mask.
pub fn estimate_parameters(y: &[f64], mask: &ActivityMask) -> Result<EstimatedParams> {
    check_lengths(y, mask)?;
    let (s0, n0, s1, n1) = class_sums(y, mask);
    if n0 == 0 {
        return Err(Error::NoNoiseReference);
    }
    let noise_var_hat = s0 / n0 as f64;
    let (snr_hat_db, snr_clamped) = if n1 == 0 {
        (f64::NEG_INFINITY, false)
    } else if noise_var_hat > 0.0 {
        let rho = s1 / n1 as f64 / noise_var_hat - 1.0;
        if rho > 0.0 {
            (10.0 * rho.log10(), false)
        } else {
            (f64::NEG_INFINITY, true)
        }
    } else {
        (f64::INFINITY, false)
    };
    Ok(EstimatedParams { noise_var_hat, snr_hat_db, occupancy_hat: n1 as f64 / y.len() as f64, n0, n1, snr_clamped })
}
