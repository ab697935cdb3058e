use burstsep::bench::trial_seed;
use burstsep::rss::{energy_vector, moving_average, opening_sums, rof_scan_with, sliding_max, sliding_min, ScanMode};
use burstsep::siggen::labelled_frame;
use burstsep::PuTrafficParams;

fn direct(f: &[f64], k: usize) -> f64 {
    let eroded = sliding_min(f, k).unwrap();
    sliding_max(&eroded, k).unwrap().iter().sum()
}

#[test]
fn opening_sums_match_literal_filters_on_frames() {
    for t in 0..12u64 {
        let snr = -6.0 + 3.0 * (t % 6) as f64;
        let occ = [0.1, 0.2, 0.3][t as usize % 3];
        let p = PuTrafficParams::with_occupancy(512, occ, snr);
        let (_, x) = labelled_frame(&p, trial_seed(3, snr, occ, t)).unwrap();
        let y = moving_average(&energy_vector(&x), 6).unwrap();
        let sums = opening_sums(&y, 256);
        for (k, s) in sums.iter().enumerate().skip(1) {
            let d = direct(&y, k);
            assert!((s - d).abs() <= 1e-9 * d.abs(), "frame {t} k {k}: {s} vs {d}");
        }
    }
}

#[test]
fn scan_routes_agree_on_frames() {
    for t in 0..6u64 {
        let p = PuTrafficParams::with_occupancy(256, 0.2, 3.0);
        let (_, x) = labelled_frame(&p, trial_seed(4, 3.0, 0.2, t)).unwrap();
        let y = moving_average(&energy_vector(&x), 3).unwrap();
        let fast = rof_scan_with(&y, ScanMode::Granulometry).unwrap();
        let slow = rof_scan_with(&y, ScanMode::Serial).unwrap();
        for (a, b) in fast.energy.iter().zip(&slow.energy) {
            assert!((a - b).abs() <= 1e-9 * b.abs());
        }
        assert_eq!(fast.energy.len(), slow.energy.len());
    }
}
