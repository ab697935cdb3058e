//! Erosion/dilation size scan.
//!
//! For every window size `k = 2..=N/2` the smoothed energy vector is eroded
//! (moving minimum) and then dilated (moving maximum) with the same centered
//! window, and the mean of the result is `e_k`. The selected size is the `k`
//! with the largest relative drop `(e_{k-1} - e_k) / e_{k-1}`.
//!
//! Two routes compute the same curve. [`ScanMode::Serial`] and
//! [`ScanMode::Parallel`] run the erosion/dilation pair for each size, which
//! costs O(N) per size and O(N^2) in total. [`ScanMode::Granulometry`] gets
//! every `e_k` from one pass over the max-tree of the signal (see
//! [`opening_sums`]) in O(N). The separator uses the latter; the literal loop
//! is kept as its reference.

use rayon::prelude::*;

use super::kernels::{sliding_max, sliding_min};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ScanMode {
    /// Max-tree granulometry, O(N).
    #[default]
    Granulometry,
    /// Literal erosion/dilation per size, one size after another.
    Serial,
    /// Literal erosion/dilation per size, sizes spread over the rayon pool.
    Parallel,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanResult {
    /// Selected window size (argmax of the decrease curve, smallest on ties).
    pub m_sec: usize,
    /// `e_k` for `k = 1..=N/2`; entry `i` is size `k = i + 1`, and `e_1` is
    /// the plain mean.
    pub energy: Vec<f64>,
    /// `e'_k` for `k = 2..=N/2`; entry `i` is size `k = i + 2`.
    pub energy_decrease: Vec<f64>,
}

/// Runs the scan with the default (granulometry) route.
pub fn rof_scan(y_bar: &[f64]) -> Result<ScanResult> {
    rof_scan_with(y_bar, ScanMode::default())
}

pub fn rof_scan_with(y_bar: &[f64], mode: ScanMode) -> Result<ScanResult> {
    let n = y_bar.len();
    if n < 4 {
        return Err(Error::invalid(format!("scan needs at least 4 samples, got {n}")));
    }
    let (valid, peak) =
        y_bar.iter().fold((true, 0.0f64), |(ok, m), &v| (ok & (v >= 0.0) & v.is_finite(), if v > m { v } else { m }));
    if !valid {
        return Err(Error::invalid("energy values must be finite and non-negative"));
    }
    if peak == 0.0 {
        return Err(Error::ZeroEnergy);
    }
    let kmax = n / 2;
    let inv_n = 1.0 / n as f64;
    let mut energy = Vec::with_capacity(kmax);
    energy.push(y_bar.iter().sum::<f64>() * inv_n);
    match mode {
        ScanMode::Granulometry => {
            let sums = opening_sums(y_bar, kmax);
            energy.extend(sums[2..].iter().map(|s| s * inv_n));
        }
        ScanMode::Serial => {
            energy.extend((2..=kmax).map(|k| opening_mean(y_bar, k)));
        }
        ScanMode::Parallel => {
            let tail: Vec<f64> = (2..=kmax).into_par_iter().map(|k| opening_mean(y_bar, k)).collect();
            energy.extend(tail);
        }
    }

    let energy_decrease: Vec<f64> = energy
        .windows(2)
        // A zero previous energy means nothing is left to remove.
        .map(|w| if w[0] > 0.0 { (w[0] - w[1]) / w[0] } else { 0.0 })
        .collect();

    let mut best = 0;
    for (i, &d) in energy_decrease.iter().enumerate() {
        if d > energy_decrease[best] {
            best = i;
        }
    }
    if energy_decrease[best] == 0.0 && energy_decrease.iter().all(|&d| d == 0.0) {
        return Err(Error::FlatEnergyCurve);
    }
    Ok(ScanResult { m_sec: best + 2, energy, energy_decrease })
}

fn opening_mean(y: &[f64], k: usize) -> f64 {
    let eroded = sliding_min(y, k).expect("k >= 2");
    let opened = sliding_max(&eroded, k).expect("k >= 2");
    opened.iter().sum::<f64>() / y.len() as f64
}

/// Sum of `sliding_max(sliding_min(f, k), k)` for every `k` in `0..=kmax`
/// (entries 0 and 1 hold the plain sum), computed from the max-tree of `f`.
///
/// Each max-tree node is a maximal interval `[i, j]` on which `f >= h`, with
/// `h` strictly above its parent's level `h_p`. The filtered signal at `x` is
/// the level of the highest node whose coverage contains `x`, so its sum is
/// `sum over surviving nodes of (h - h_p) * |coverage|`. With
/// `a = k / 2` and `b = ceil(k / 2) - 1` (window `[x - a, x + b]`) and
/// `s = a - b` (1 for even `k`), a node of length `L`:
///
/// * interior: survives iff `L >= k`, covers `[i + s, j + s]` (`L` samples);
/// * touching the left edge: survives iff `L >= b + 1`, covers `L + s`;
/// * touching the right edge: survives iff `L >= a + 1`, covers `L - s`;
/// * the whole frame (root): always survives, covers `N`.
///
/// The parity shift comes from using the same left-leaning window for both
/// filters, which makes the even-size composition an opening shifted by one
/// sample.
pub fn opening_sums(f: &[f64], kmax: usize) -> Vec<f64> {
    if kmax == 0 {
        return vec![f.iter().sum()];
    }
    let n = f.len();
    let mut all = vec![0.0; kmax + 2];
    let mut even = vec![0.0; kmax + 2];
    // Node stack (level, start) with two -inf sentinels at the bottom. Each
    // step either pops one node or consumes one sample; both outcomes are
    // computed and selected without branching, since the pop/push pattern of
    // noisy input is unpredictable.
    let mut levels = vec![f64::NEG_INFINITY; n + 3];
    let mut starts = vec![0usize; n + 3];
    let (mut top, mut x, mut start) = (1usize, 0usize, 0usize);
    while x < n {
        let v = f[x];
        let h = levels[top];
        let s = starts[top];
        let below = levels[top - 1];
        let pop = h > v;
        let parent = if below > v { below } else { v };
        let c = if pop { h - parent } else { 0.0 };
        // Nodes closed here end before the frame does: one starting at the
        // left edge survives up to width 2L, any other up to width L.
        let len = x - s;
        let left = usize::from(s == 0);
        let t = (len << left).min(kmax);
        all[t] += c * len as f64;
        even[t] += c * left as f64;
        levels[top + 1] = v;
        starts[top + 1] = start;
        let grow = usize::from(h < v);
        top = if pop { top - 1 } else { top + grow };
        start = if pop { s } else { x + 1 };
        x += usize::from(!pop);
    }

    // Nodes still open touch the right edge; the last one is the root.
    let mut root = 0.0;
    while top > 1 {
        let (h, s) = (levels[top], starts[top]);
        top -= 1;
        if top == 1 {
            root = h * n as f64;
            break;
        }
        let c = h - levels[top];
        let len = n - s;
        if s == 0 {
            let t = (2 * len).min(kmax);
            all[t] += c * len as f64;
            even[t] += c;
        } else {
            let t = (2 * len - 1).min(kmax);
            all[t] += c * len as f64;
            even[t] -= c;
        }
    }

    let mut sums = vec![0.0; kmax + 1];
    let (mut acc_all, mut acc_even) = (0.0, 0.0);
    for k in (1..=kmax).rev() {
        acc_all += all[k];
        acc_even += even[k];
        sums[k] = root + acc_all + if k % 2 == 0 { acc_even } else { 0.0 };
    }
    sums[0] = sums[1];
    sums
}
