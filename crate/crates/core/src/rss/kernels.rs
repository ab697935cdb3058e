//! Streaming kernels used by the separator: trailing moving average and
//! centered moving minimum/maximum.

use std::collections::VecDeque;

use crate::{Error, Result};

/// Trailing mean of width `m`; samples before the start count as zero, so the
/// first `m - 1` outputs ramp up. Output length equals input length.
///
/// Window sums are differences of a running prefix sum carried as an
/// unevaluated pair `hi + lo` (error-free two-sum per sample). For
/// non-negative input this stays within a few ulps of direct window summation
/// however large the dynamic range.
pub fn moving_average(y: &[f64], m: usize) -> Result<Vec<f64>> {
    if m == 0 {
        return Err(Error::invalid("moving-average width must be >= 1"));
    }
    if m > y.len() {
        return Err(Error::invalid(format!("moving-average width {m} exceeds input length {}", y.len())));
    }
    let (hi, lo) = prefix_sums(y);
    let scale = 1.0 / m as f64;
    let mut out = vec![0.0; y.len()];
    let (head, tail) = out.split_at_mut(m - 1);
    for ((o, h), l) in head.iter_mut().zip(&hi[1..]).zip(&lo[1..]) {
        *o = (h + l) * scale;
    }
    let windows = hi[m..].iter().zip(&hi[..]).zip(lo[m..].iter().zip(&lo[..]));
    for (o, ((h1, h0), (l1, l0))) in tail.iter_mut().zip(windows) {
        *o = ((h1 - h0) + (l1 - l0)) * scale;
    }
    Ok(out)
}

/// Trailing mean of width `m` whose first `m - 1` windows shrink to the
/// samples available instead of padding with zeros.
pub(crate) fn moving_average_shrinking(y: &[f64], m: usize) -> Result<Vec<f64>> {
    let mut out = moving_average(y, m)?;
    for (n, v) in out.iter_mut().enumerate().take(m - 1) {
        *v *= m as f64 / (n + 1) as f64;
    }
    Ok(out)
}

/// Prefix sums `P[j] = y[0] + ... + y[j - 1]` as `hi[j] + lo[j]`.
fn prefix_sums(y: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let mut hi = vec![0.0; y.len() + 1];
    let mut lo = vec![0.0; y.len() + 1];
    let (mut h, mut l) = (0.0f64, 0.0f64);
    for ((&v, hj), lj) in y.iter().zip(&mut hi[1..]).zip(&mut lo[1..]) {
        let t = h + v;
        let b = t - h;
        l += (h - (t - b)) + (v - b);
        h = t;
        *hj = h;
        *lj = l;
    }
    (hi, lo)
}

/// Index span `[n - before, n + after]` of a centered window of nominal width `k`.
/// Even widths lean left, so width 2 covers the previous and the current sample.
#[inline]
pub(crate) fn window_offsets(k: usize) -> (usize, usize) {
    (k / 2, k.div_ceil(2) - 1)
}

/// Moving minimum (erosion) over a centered window of width `k`, shrunk at the
/// edges.
pub fn sliding_min(y: &[f64], k: usize) -> Result<Vec<f64>> {
    sliding_extremum(y, k, |incoming, queued| incoming <= queued)
}

/// Moving maximum (dilation) over a centered window of width `k`, shrunk at
/// the edges.
pub fn sliding_max(y: &[f64], k: usize) -> Result<Vec<f64>> {
    sliding_extremum(y, k, |incoming, queued| incoming >= queued)
}

/// Monotonic-queue window extremum. `dominates(a, b)` is true when a newer
/// value `a` makes an older queued value `b` useless.
fn sliding_extremum(y: &[f64], k: usize, dominates: impl Fn(f64, f64) -> bool) -> Result<Vec<f64>> {
    if k == 0 {
        return Err(Error::invalid("window width must be >= 1"));
    }
    let n = y.len();
    let (before, after) = window_offsets(k);
    let mut queue: VecDeque<usize> = VecDeque::with_capacity(k.min(n));
    let mut out = Vec::with_capacity(n);
    let mut next = 0;
    for i in 0..n {
        let right = (i + after).min(n - 1);
        while next <= right {
            while queue.back().is_some_and(|&j| dominates(y[next], y[j])) {
                queue.pop_back();
            }
            queue.push_back(next);
            next += 1;
        }
        let left = i.saturating_sub(before);
        while queue.front().is_some_and(|&j| j < left) {
            queue.pop_front();
        }
        out.push(y[queue[0]]);
    }
    Ok(out)
}
