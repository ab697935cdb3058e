use std::cell::RefCell;
use std::f64::consts::TAU;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::siggen::IqFrame;
use crate::{Error, Result};

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

/// Periodic Hann window of length `len`.
fn hann(len: usize) -> Vec<f64> {
    (0..len).map(|i| 0.5 - 0.5 * (TAU * i as f64 / len as f64).cos()).collect()
}

/// Welch power spectrum: Hann-windowed segments of `segment_len` samples at
/// 50% overlap, squared-magnitude DFTs averaged. Scaled by the window energy
/// so that white noise of power `P` gives bins with mean `P`.
pub fn welch_periodogram(x: &IqFrame, segment_len: usize) -> Result<Vec<f64>> {
    if segment_len == 0 {
        return Err(Error::invalid("segment_len must be >= 1"));
    }
    if x.len() < segment_len {
        return Err(Error::invalid(format!(
            "frame of {} samples is shorter than one {segment_len}-sample segment",
            x.len()
        )));
    }
    let window = hann(segment_len);
    let step = (segment_len / 2).max(1);
    let segments = (x.len() - segment_len) / step + 1;
    let fft = PLANNER.with(|p| p.borrow_mut().plan_fft_forward(segment_len));

    let mut acc = vec![0.0; segment_len];
    let mut buf = vec![Complex64::new(0.0, 0.0); segment_len];
    let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
    let samples = x.samples();
    for s in 0..segments {
        let seg = &samples[s * step..s * step + segment_len];
        for ((b, v), w) in buf.iter_mut().zip(seg).zip(&window) {
            *b = v * w;
        }
        fft.process_with_scratch(&mut buf, &mut scratch);
        for (a, b) in acc.iter_mut().zip(&buf) {
            *a += b.norm_sqr();
        }
    }
    let norm = 1.0 / (segments as f64 * window.iter().map(|w| w * w).sum::<f64>());
    acc.iter_mut().for_each(|a| *a *= norm);
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::siggen::{synthesize_frame, ActivityMask, PuTrafficParams};

    #[test]
    fn white_noise_mean_bin_is_power() {
        let n = 100_000;
        let p =
            PuTrafficParams { frame_len: n, mean_on: 1.0, mean_off: 1.0, snr_db: f64::NEG_INFINITY, noise_power: 2.0 };
        let x = synthesize_frame(&ActivityMask::zeros(n), &p, 8).unwrap();
        let pxx = welch_periodogram(&x, 64).unwrap();
        assert_eq!(pxx.len(), 64);
        let mean = pxx.iter().sum::<f64>() / 64.0;
        assert!((mean - 2.0).abs() < 0.1, "{mean}");
    }

    #[test]
    fn tone_concentrates() {
        let samples: Vec<Complex64> =
            (0..1024).map(|i| Complex64::from_polar(1.0, TAU * 5.0 * i as f64 / 64.0)).collect();
        let pxx = welch_periodogram(&IqFrame::new(samples, 1.0).unwrap(), 64).unwrap();
        let mut sorted = pxx.clone();
        sorted.sort_by(f64::total_cmp);
        let median = sorted[32];
        let peak = pxx.iter().copied().fold(0.0, f64::max);
        assert_eq!(pxx.iter().position(|&v| v == peak), Some(5));
        assert!(peak >= 10.0 * median);
    }

    #[test]
    fn zero_in_zero_out() {
        let x = IqFrame::new(vec![Complex64::new(0.0, 0.0); 256], 1.0).unwrap();
        assert!(welch_periodogram(&x, 64).unwrap().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn short_frame_rejected() {
        let x = IqFrame::new(vec![Complex64::new(1.0, 0.0); 32], 1.0).unwrap();
        assert!(welch_periodogram(&x, 64).is_err());
    }
}
