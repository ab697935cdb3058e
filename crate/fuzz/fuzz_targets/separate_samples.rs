#![no_main]

use burstsep::{separate, IqFrame, SeparationConfig};
use libfuzzer_sys::fuzz_target;
use num_complex::Complex64;

// Input: little-endian f64 pairs, one complex sample each.
fuzz_target!(|data: &[u8]| {
    let samples: Vec<Complex64> = data
        .chunks_exact(16)
        .map(|c| {
            let re = f64::from_le_bytes(c[..8].try_into().unwrap());
            let im = f64::from_le_bytes(c[8..].try_into().unwrap());
            Complex64::new(re, im)
        })
        .collect();
    let Ok(frame) = IqFrame::new(samples, 1.0) else { return };
    let cfg = SeparationConfig::for_frame_len(frame.len());
    if let Ok(result) = separate(&frame, &cfg) {
        assert_eq!(result.mask.len(), frame.len());
        assert!(result.m_sec >= 2 && result.m_sec <= frame.len() / 2);
    }
});
