use crate::siggen::ActivityMask;
use crate::{Error, Result};

/// Marks signal samples from the sign of the first difference of the doubly
/// smoothed energy `y_bb`.
///
/// Sample `n` is rising when `y_bb[n] > y_bb[n - 1]`. Single non-rising
/// samples between two rising ones are bridged, and every rising run longer
/// than `lambda_msw` samples is marked in full.
pub fn mark_from_derivative(y_bb: &[f64], lambda_msw: usize) -> Result<ActivityMask> {
    check_width(y_bb.len(), lambda_msw)?;
    let rising: Vec<bool> = (0..y_bb.len()).map(|i| i >= 1 && y_bb[i] > y_bb[i - 1]).collect();
    Ok(mark_rising(&rising, lambda_msw))
}

/// [`mark_from_derivative`] applied to the shrinking-start trailing mean of
/// `y_bar` with width `m`, without forming that mean: once the window is full
/// it rises at `n` exactly when `y_bar[n] > y_bar[n - m]`, and before that
/// when `y_bar[n]` exceeds the mean of the samples before it.
pub(crate) fn mark_lagged(y_bar: &[f64], m: usize, lambda_msw: usize) -> Result<ActivityMask> {
    let n = y_bar.len();
    check_width(n, lambda_msw)?;
    if m == 0 || m > n {
        return Err(Error::invalid(format!("averaging width {m} out of range for {n} samples")));
    }
    let mut rising = vec![false; n];
    let mut head = 0.0;
    for i in 1..m {
        head += y_bar[i - 1];
        rising[i] = y_bar[i] > head / i as f64;
    }
    for ((r, &now), &then) in rising[m..].iter_mut().zip(&y_bar[m..]).zip(y_bar) {
        *r = now > then;
    }
    Ok(mark_rising(&rising, lambda_msw))
}

fn check_width(n: usize, lambda_msw: usize) -> Result<()> {
    if lambda_msw >= n || n < lambda_msw + 2 {
        return Err(Error::invalid(format!(
            "minimal signal width {lambda_msw} needs at least {} samples, got {n}",
            lambda_msw.saturating_add(2)
        )));
    }
    Ok(())
}

/// Bridges single gaps in `rising` and marks every run longer than
/// `lambda_msw` in full.
fn mark_rising(rising: &[bool], lambda_msw: usize) -> ActivityMask {
    let n = rising.len();
    let mut bits = vec![false; n];
    let mut run = 0usize;
    // Everything before `marked` is already final.
    let mut marked = 0usize;
    for i in 0..n {
        let inner = i >= 1 && i + 1 < n;
        let bridged = rising[i] | (inner && rising[i - 1] & rising[i + 1]);
        run = (run + 1) * usize::from(bridged);
        if run > lambda_msw {
            let from = (i - lambda_msw).max(marked);
            bits[from..=i].fill(true);
            marked = i + 1;
        }
    }
    ActivityMask::new(bits)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Step-by-step replay of the marking loops on a binarized difference
    /// vector `d` (index `j` holds `y_bb[j + 1] - y_bb[j]`), mutating in place.
    fn replay(y_bb: &[f64], lambda: usize) -> Vec<bool> {
        let mut d: Vec<i64> = y_bb.windows(2).map(|w| (w[1] > w[0]) as i64).collect();
        for l in 2..d.len() {
            if d[l] > 0 {
                d[l] = 1;
                if d[l - 2] > 0 {
                    d[l - 1] = 1;
                }
            } else {
                d[l] = 0;
            }
        }
        for i in 1..d.len() {
            if d[i] != 0 {
                d[i] = d[i - 1] + 1;
            }
        }
        let mut mark = vec![false; d.len()];
        for (n, &count) in d.iter().enumerate() {
            if count > lambda as i64 {
                for m in mark.iter_mut().take(n + 1).skip(n.saturating_sub(lambda)) {
                    *m = true;
                }
            }
        }
        // Difference j belongs to sample j + 1; sample 0 has no predecessor.
        std::iter::once(false).chain(mark).collect()
    }

    #[test]
    fn decreasing_gives_nothing() {
        let y: Vec<f64> = (0..100).map(|i| 100.0 - i as f64).collect();
        assert_eq!(mark_from_derivative(&y, 5).unwrap().count_ones(), 0);
    }

    #[test]
    fn single_rise_marked_through_its_end() {
        // Flat, a 60-sample rise over indices 101..=160, then a decline.
        let mut y = vec![1.0; 101];
        y.extend((1..=60).map(|i| 1.0 + i as f64));
        y.extend((1..=100).map(|i| 61.0 - 0.5 * i as f64));
        let mask = mark_from_derivative(&y, 51).unwrap();
        let runs: Vec<_> = mask.to_runs().into_iter().filter(|r| r.0 == 1).collect();
        assert_eq!(runs.len(), 1);
        assert!(runs[0].1 >= 52);
        assert!(mask.bits()[160]);
        assert!(!mask.bits()[161]);
        assert_eq!(mask.bits().iter().rposition(|&b| b), Some(160));
    }

    #[test]
    fn short_rise_ignored() {
        let mut y = vec![1.0; 50];
        y.extend((1..=10).map(|i| 1.0 + i as f64));
        y.extend(vec![0.0; 50]);
        assert_eq!(mark_from_derivative(&y, 10).unwrap().count_ones(), 0);
        assert_eq!(mark_from_derivative(&y, 9).unwrap().count_ones(), 10);
    }

    #[test]
    fn sawtooth_bridges_into_one_run() {
        // Rise of two, fall of one: every non-rising sample is isolated.
        let mut y = vec![0.0];
        for i in 0..60 {
            let last = *y.last().unwrap();
            y.push(if i % 2 == 0 { last + 2.0 } else { last - 1.0 });
        }
        let mask = mark_from_derivative(&y, 20).unwrap();
        assert_eq!(mask.bits(), &replay(&y, 20)[..]);
        assert!(mask.count_ones() >= 55);
    }

    #[test]
    fn rejects_wide_lambda() {
        assert!(mark_from_derivative(&[1.0; 10], 10).is_err());
        assert!(mark_from_derivative(&[1.0; 10], 9).is_err());
        assert!(mark_from_derivative(&[1.0; 10], 8).is_ok());
    }

    #[test]
    fn ramp_marked_from_second_sample() {
        let y: Vec<f64> = (0..100).map(|i| i as f64).collect();
        let mask = mark_from_derivative(&y, 10).unwrap();
        assert!(!mask.bits()[0]);
        assert_eq!(mask.count_ones(), 99);
    }

    proptest! {
        #[test]
        fn lagged_matches_materialized_mean(
            y in prop::collection::vec(0u8..6, 8..200),
            m in 1usize..20,
            lambda in 0usize..10,
        ) {
            // Small integers keep every window sum exact, and one division per
            // mean keeps distinct means ordered.
            let y: Vec<f64> = y.into_iter().map(f64::from).collect();
            prop_assume!(m <= y.len() && y.len() >= lambda + 2);
            let y_bb: Vec<f64> = (0..y.len())
                .map(|i| {
                    let lo = (i + 1).saturating_sub(m);
                    y[lo..=i].iter().sum::<f64>() / (i + 1 - lo) as f64
                })
                .collect();
            let direct = mark_from_derivative(&y_bb, lambda).unwrap();
            prop_assert_eq!(mark_lagged(&y, m, lambda).unwrap(), direct);
        }

        #[test]
        fn matches_replay(y in prop::collection::vec(0u8..4, 3..200), lambda in 0usize..12) {
            let y: Vec<f64> = y.into_iter().map(f64::from).collect();
            prop_assume!(y.len() >= lambda + 2);
            let mask = mark_from_derivative(&y, lambda).unwrap();
            prop_assert_eq!(mask.bits(), &replay(&y, lambda)[..]);
        }
    }
}
