//! Labelled frame synthesis for an intermittent transmitter.
//!
//! Activity follows an alternating renewal process: OFF and ON holding times
//! are exponential with means `mean_off` and `mean_on` (in samples). Each ON
//! run becomes a constant-envelope pulse added to circularly-symmetric complex
//! Gaussian noise.

mod trace;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub use trace::{load_iq_trace, parse_csv, parse_f32le, write_csv, write_f32le, TraceFormat};

/// Sample rate assumed when none is given (5 MHz channel).
pub const DEFAULT_SAMPLE_RATE: f64 = 5.0e6;

/// Noise power used by default: the recorded noise level normalized to 1 mW.
pub const DEFAULT_NOISE_POWER: f64 = 1.0;

/// Stream used for the noise/phase generator, so that mask and noise draws
/// seeded with the same value never share a keystream.
const SYNTH_STREAM: u64 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PuTrafficParams {
    pub frame_len: usize,
    /// Mean ON (busy) holding time, samples.
    pub mean_on: f64,
    /// Mean OFF (idle) holding time, samples.
    pub mean_off: f64,
    /// Per-sample SNR in dB. `-inf` disables the signal entirely.
    pub snr_db: f64,
    pub noise_power: f64,
}

impl PuTrafficParams {
    /// Parameters for a frame of `frame_len` samples whose mean ON fraction is
    /// `occupancy`, with the holding-time means expressed relative to the frame.
    pub fn with_occupancy(frame_len: usize, occupancy: f64, snr_db: f64) -> Self {
        let n = frame_len as f64;
        Self {
            frame_len,
            mean_on: occupancy * n,
            mean_off: (1.0 - occupancy) * n,
            snr_db,
            noise_power: DEFAULT_NOISE_POWER,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.frame_len < 2 {
            return Err(Error::invalid(format!("frame_len must be >= 2, got {}", self.frame_len)));
        }
        if !(self.mean_on > 0.0 && self.mean_on.is_finite()) {
            return Err(Error::invalid(format!("mean_on must be positive, got {}", self.mean_on)));
        }
        if !(self.mean_off > 0.0 && self.mean_off.is_finite()) {
            return Err(Error::invalid(format!("mean_off must be positive, got {}", self.mean_off)));
        }
        if !(self.noise_power > 0.0 && self.noise_power.is_finite()) {
            return Err(Error::invalid(format!("noise_power must be positive, got {}", self.noise_power)));
        }
        if self.snr_db.is_nan() || self.snr_db == f64::INFINITY {
            return Err(Error::invalid(format!("snr_db must be finite or -inf, got {}", self.snr_db)));
        }
        Ok(())
    }

    /// Long-run fraction of busy samples, `mean_on / (mean_on + mean_off)`.
    pub fn occupancy(&self) -> f64 {
        self.mean_on / (self.mean_on + self.mean_off)
    }

    /// Pulse amplitude giving `a^2 / noise_power = 10^(snr_db/10)`.
    pub fn amplitude(&self) -> f64 {
        if self.snr_db == f64::NEG_INFINITY {
            0.0
        } else {
            (self.noise_power * 10f64.powf(self.snr_db / 10.0)).sqrt()
        }
    }
}

/// A frame of complex baseband samples.
#[derive(Debug, Clone, PartialEq)]
pub struct IqFrame {
    samples: Vec<Complex64>,
    sample_rate: f64,
}

impl IqFrame {
    pub fn new(samples: Vec<Complex64>, sample_rate: f64) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::Empty);
        }
        if !(sample_rate > 0.0 && sample_rate.is_finite()) {
            return Err(Error::invalid(format!("sample_rate must be positive, got {sample_rate}")));
        }
        if let Some(i) = samples.iter().position(|s| !(s.re.is_finite() && s.im.is_finite())) {
            return Err(Error::invalid(format!("non-finite sample at index {i}")));
        }
        Ok(Self { samples, sample_rate })
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn sample_rate(&self) -> f64 {
        self.sample_rate
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Multiplies every sample by `c`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        Self::new(self.samples.iter().map(|s| s * c).collect(), self.sample_rate)
    }

    pub fn into_samples(self) -> Vec<Complex64> {
        self.samples
    }
}

/// Per-sample busy/idle labels. `true` marks a signal-bearing sample.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ActivityMask {
    bits: Vec<bool>,
}

impl ActivityMask {
    pub fn new(bits: Vec<bool>) -> Self {
        Self { bits }
    }

    pub fn zeros(len: usize) -> Self {
        Self { bits: vec![false; len] }
    }

    pub fn ones(len: usize) -> Self {
        Self { bits: vec![true; len] }
    }

    pub fn from_u8(values: &[u8]) -> Result<Self> {
        values
            .iter()
            .map(|&v| match v {
                0 => Ok(false),
                1 => Ok(true),
                other => Err(Error::invalid(format!("mask value {other} is not 0 or 1"))),
            })
            .collect::<Result<Vec<_>>>()
            .map(Self::new)
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    /// Number of busy samples (N1).
    pub fn count_ones(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    /// Number of idle samples (N0).
    pub fn count_zeros(&self) -> usize {
        self.len() - self.count_ones()
    }

    pub fn occupancy(&self) -> f64 {
        if self.bits.is_empty() {
            0.0
        } else {
            self.count_ones() as f64 / self.len() as f64
        }
    }

    pub fn complement(&self) -> Self {
        Self::new(self.bits.iter().map(|b| !b).collect())
    }

    /// Run-length encoding as `(value, run length)` pairs, first run first.
    pub fn to_runs(&self) -> Vec<(u8, usize)> {
        let mut runs: Vec<(u8, usize)> = Vec::new();
        for &b in &self.bits {
            match runs.last_mut() {
                Some((v, n)) if *v == b as u8 => *n += 1,
                _ => runs.push((b as u8, 1)),
            }
        }
        runs
    }

    pub fn from_runs(runs: &[(u8, usize)]) -> Result<Self> {
        let mut bits = Vec::new();
        for &(v, n) in runs {
            let b = match v {
                0 => false,
                1 => true,
                other => return Err(Error::invalid(format!("run value {other} is not 0 or 1"))),
            };
            if n == 0 {
                return Err(Error::invalid("zero-length run"));
            }
            bits.resize(bits.len().checked_add(n).ok_or_else(|| Error::invalid("run overflow"))?, b);
        }
        Ok(Self::new(bits))
    }
}

fn check_seeded_exp(mean: f64) -> Result<Exp<f64>> {
    Exp::new(1.0 / mean).map_err(|e| Error::invalid(format!("exponential law with mean {mean}: {e}")))
}

/// Draws an ON/OFF activity pattern of `params.frame_len` samples.
///
/// The frame opens in the OFF state. Every run length (including the first
/// OFF run) is an exponential draw rounded up to at least one sample; the last
/// run is truncated at the frame end.
pub fn generate_on_off_mask(params: &PuTrafficParams, seed: u64) -> Result<ActivityMask> {
    params.validate()?;
    let on = check_seeded_exp(params.mean_on)?;
    let off = check_seeded_exp(params.mean_off)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let n = params.frame_len;
    let mut bits = Vec::with_capacity(n);
    let mut busy = false;
    while bits.len() < n {
        let draw: f64 = if busy { on.sample(&mut rng) } else { off.sample(&mut rng) };
        let run = run_length(draw).min(n - bits.len());
        bits.resize(bits.len() + run, busy);
        busy = !busy;
    }
    Ok(ActivityMask::new(bits))
}

fn run_length(draw: f64) -> usize {
    let r = draw.ceil();
    if r < 1.0 {
        1
    } else if r >= usize::MAX as f64 {
        usize::MAX
    } else {
        r as usize
    }
}

/// Builds `noise + signal` for a given activity mask.
///
/// Noise is CN(0, noise_power). Every ON run carries a constant complex
/// amplitude of magnitude [`PuTrafficParams::amplitude`] and a phase drawn
/// uniformly per pulse.
pub fn synthesize_frame(mask: &ActivityMask, params: &PuTrafficParams, seed: u64) -> Result<IqFrame> {
    params.validate()?;
    if mask.len() != params.frame_len {
        return Err(Error::LengthMismatch { expected: params.frame_len, actual: mask.len() });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(SYNTH_STREAM);

    let sigma = (params.noise_power / 2.0).sqrt();
    let amplitude = params.amplitude();
    let mut pulse = Complex64::new(0.0, 0.0);
    let mut prev = false;
    let samples = mask
        .bits()
        .iter()
        .map(|&busy| {
            if busy && !prev {
                let phase = rng.random::<f64>() * std::f64::consts::TAU;
                pulse = Complex64::from_polar(amplitude, phase);
            }
            prev = busy;
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            let noise = Complex64::new(sigma * re, sigma * im);
            if busy {
                noise + pulse
            } else {
                noise
            }
        })
        .collect();
    IqFrame::new(samples, DEFAULT_SAMPLE_RATE)
}

/// Convenience: mask and frame drawn from one seed.
pub fn labelled_frame(params: &PuTrafficParams, seed: u64) -> Result<(ActivityMask, IqFrame)> {
    let mask = generate_on_off_mask(params, seed)?;
    let frame = synthesize_frame(&mask, params, seed)?;
    Ok((mask, frame))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(n: usize, on: f64, off: f64, snr: f64) -> PuTrafficParams {
        PuTrafficParams { frame_len: n, mean_on: on, mean_off: off, snr_db: snr, noise_power: 1.0 }
    }

    #[test]
    fn rejects_invalid_params() {
        assert!(generate_on_off_mask(&params(0, 1.0, 1.0, 0.0), 1).is_err());
        assert!(generate_on_off_mask(&params(1, 1.0, 1.0, 0.0), 1).is_err());
        assert!(generate_on_off_mask(&params(16, 0.0, 1.0, 0.0), 1).is_err());
        assert!(generate_on_off_mask(&params(16, 1.0, -1.0, 0.0), 1).is_err());
        let mut p = params(16, 1.0, 1.0, f64::NAN);
        assert!(p.validate().is_err());
        p.snr_db = f64::NEG_INFINITY;
        assert!(p.validate().is_ok());
    }

    #[test]
    fn mask_is_deterministic_and_sized() {
        let p = params(4096, 50.0, 200.0, 0.0);
        let a = generate_on_off_mask(&p, 7).unwrap();
        let b = generate_on_off_mask(&p, 7).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 4096);
        assert_ne!(a, generate_on_off_mask(&p, 8).unwrap());
    }

    #[test]
    fn frame_starts_idle() {
        let p = params(1024, 100.0, 100.0, 0.0);
        for seed in 0..50 {
            assert!(!generate_on_off_mask(&p, seed).unwrap().bits()[0]);
        }
    }

    #[test]
    fn equal_means_give_half_occupancy() {
        let p = params(1 << 16, 64.0, 64.0, 0.0);
        let ones: usize = (0..20).map(|s| generate_on_off_mask(&p, s).unwrap().count_ones()).sum();
        let frac = ones as f64 / (20.0 * (1 << 16) as f64);
        assert!((frac - 0.5).abs() < 0.01, "{frac}");
    }

    #[test]
    fn long_run_occupancy_matches_ratio() {
        // ~1 renewal cycle per frame; 1000 frames keep the standard error near 0.004.
        let n = 1usize << 20;
        let p = params(n, 0.1 * n as f64, 0.9 * n as f64, 0.0);
        let ones: usize = (0..1000).map(|s| generate_on_off_mask(&p, s).unwrap().count_ones()).sum();
        let frac = ones as f64 / (1000.0 * n as f64);
        assert!((frac - p.occupancy()).abs() < 0.01, "{frac}");
    }

    #[test]
    fn noise_only_power() {
        let n = 100_000;
        let p = params(n, 10.0, 10.0, f64::NEG_INFINITY);
        let frame = synthesize_frame(&ActivityMask::ones(n), &p, 3).unwrap();
        let power = frame.samples().iter().map(|s| s.norm_sqr()).sum::<f64>() / n as f64;
        assert!((power - 1.0).abs() < 0.03, "{power}");
    }

    #[test]
    fn full_occupancy_zero_db_doubles_power() {
        let n = 100_000;
        let p = params(n, 10.0, 10.0, 0.0);
        let frame = synthesize_frame(&ActivityMask::ones(n), &p, 4).unwrap();
        let power = frame.samples().iter().map(|s| s.norm_sqr()).sum::<f64>() / n as f64;
        assert!((power - 2.0).abs() < 0.06, "{power}");
    }

    #[test]
    fn idle_positions_carry_noise_power() {
        let p = params(200_000, 300.0, 300.0, 10.0);
        let (mask, frame) = labelled_frame(&p, 11).unwrap();
        let (sum, count) = mask
            .bits()
            .iter()
            .zip(frame.samples())
            .filter(|(b, _)| !**b)
            .fold((0.0, 0usize), |(s, c), (_, x)| (s + x.norm_sqr(), c + 1));
        assert!(count > 50_000);
        let power = sum / count as f64;
        assert!((power - 1.0).abs() < 0.05, "{power}");
    }

    #[test]
    fn synthesize_rejects_length_mismatch() {
        let p = params(64, 4.0, 4.0, 0.0);
        assert!(matches!(
            synthesize_frame(&ActivityMask::zeros(63), &p, 0),
            Err(Error::LengthMismatch { expected: 64, actual: 63 })
        ));
    }

    #[test]
    fn synthesis_is_reproducible() {
        let p = params(1024, 100.0, 900.0, 5.0);
        let (m1, f1) = labelled_frame(&p, 99).unwrap();
        let (m2, f2) = labelled_frame(&p, 99).unwrap();
        assert_eq!(m1, m2);
        assert_eq!(f1, f2);
    }

    #[test]
    fn runs_round_trip() {
        let m = ActivityMask::from_u8(&[0, 0, 1, 1, 1, 0, 1]).unwrap();
        assert_eq!(m.to_runs(), vec![(0, 2), (1, 3), (0, 1), (1, 1)]);
        assert_eq!(ActivityMask::from_runs(&m.to_runs()).unwrap(), m);
        assert!(ActivityMask::from_runs(&[(2, 1)]).is_err());
        assert!(ActivityMask::from_runs(&[(1, 0)]).is_err());
        assert!(ActivityMask::from_u8(&[0, 3]).is_err());
    }

    #[test]
    fn frame_rejects_non_finite() {
        assert!(IqFrame::new(vec![Complex64::new(f64::NAN, 0.0)], 1.0).is_err());
        assert!(IqFrame::new(vec![], 1.0).is_err());
        assert!(IqFrame::new(vec![Complex64::new(1.0, 0.0)], 0.0).is_err());
    }
}
