//! Deterministic multiscale pulse-peak detection.
//!
//! The detector scores every sample as a strict local maximum across a range
//! of neighbourhood scales and keeps the samples that win at every scale up
//! to the globally most informative one. It is a fully deterministic variant
//! of automatic multiscale peak detection: the original formulation fills a
//! scalogram with random values and selects via row minima, which reduces to
//! plain boolean local-maxima tests and row counts once the randomness is
//! stripped out.
//!
//! Samples closer than the selected scale to either end of the window cannot
//! be compared at every scale and are therefore never reported; callers that
//! need near-edge beats should detect over longer windows.

use crate::error::{Error, Result};
use crate::model::PeakList;

/// Default scale cap: two seconds of samples, the longest plausible
/// inter-beat interval at rest.
pub fn default_max_scale(fs_hz: f64) -> usize {
    (2.0 * fs_hz).round() as usize
}

/// Detect pulse peaks in one window of samples taken at `fs_hz`.
///
/// The window is linearly detrended first. For every scale `k = 1..=L` with
/// `L = min(max_scale, ceil(n/2) - 1)`, sample `i` is a scale-`k` maximum
/// when `x[i] > x[i-k]` and `x[i] > x[i+k]` (out-of-range comparisons count
/// as failures). The scale `lambda` with the most maxima wins (smallest on
/// ties), and the peaks are exactly the samples that are maxima at every
/// scale up to `lambda`. Runs in O(n * L) time and O(n) extra memory.
pub fn detect_peaks(window: &[f64], fs_hz: f64, max_scale: usize) -> Result<PeakList> {
    let n = window.len();
    if n < 8 {
        return Err(Error::SignalTooShort { len: n, min: 8 });
    }
    if max_scale == 0 {
        return Err(Error::invalid("max_scale must be at least 1"));
    }
    let x = linear_detrend(window);
    let l = max_scale.min(n.div_ceil(2) - 1);

    // Pass 1: count scale-k maxima per row and pick the most populated scale.
    let mut lambda = 1usize;
    let mut best = 0usize;
    for k in 1..=l {
        let mut count = 0usize;
        for i in k..n - k {
            if x[i] > x[i - k] && x[i] > x[i + k] {
                count += 1;
            }
        }
        if count > best {
            best = count;
            lambda = k;
        }
    }

    // Pass 2: keep samples that are maxima at every scale 1..=lambda.
    let mut indices = Vec::new();
    'candidates: for i in lambda..n - lambda {
        for k in 1..=lambda {
            if !(x[i] > x[i - k] && x[i] > x[i + k]) {
                continue 'candidates;
            }
        }
        indices.push(i);
    }

    PeakList::new(fs_hz, indices)
}

/// Subtract the least-squares line fitted over sample index.
fn linear_detrend(window: &[f64]) -> Vec<f64> {
    let n = window.len() as f64;
    let t_mean = (n - 1.0) / 2.0;
    let x_mean = window.iter().sum::<f64>() / n;
    let mut num = 0.0;
    let mut den = 0.0;
    for (i, v) in window.iter().enumerate() {
        let dt = i as f64 - t_mean;
        num += dt * (v - x_mean);
        den += dt * dt;
    }
    let slope = if den > 0.0 { num / den } else { 0.0 };
    window
        .iter()
        .enumerate()
        .map(|(i, v)| v - (x_mean + slope * (i as f64 - t_mean)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    #[test]
    fn default_scale_is_two_seconds_of_samples() {
        assert_eq!(default_max_scale(34.0), 68);
        assert_eq!(default_max_scale(256.0), 512);
        assert_eq!(default_max_scale(1.0), 2);
    }

    #[test]
    fn sinusoid_yields_one_peak_per_cycle_near_the_true_maximum() {
        let n = 1020;
        let period = 34.0;
        let phase = 0.37;
        let x: Vec<f64> = (0..n)
            .map(|i| (2.0 * PI * (i as f64 / period + phase)).cos())
            .collect();
        let peaks = detect_peaks(&x, 34.0, default_max_scale(34.0)).unwrap();
        let cycles = (n as f64 / period).floor() as isize;
        let got = peaks.len() as isize;
        assert!(
            (got - cycles).abs() <= 1,
            "expected {cycles} +- 1 peaks, got {got}"
        );
        // Each detected peak must sit within one sample of the argmax of its
        // own cycle, located independently here.
        for &p in peaks.indices() {
            let c = (p as f64 / period).floor() as usize;
            let lo = (c as f64 * period).ceil() as usize;
            let hi = (((c + 1) as f64 * period).floor() as usize).min(n - 1);
            let argmax = (lo..=hi)
                .max_by(|a, b| x[*a].total_cmp(&x[*b]))
                .unwrap();
            assert!(
                (p as isize - argmax as isize).abs() <= 1,
                "peak {p} vs cycle argmax {argmax}"
            );
        }
    }

    #[test]
    fn strictly_monotone_ramp_has_no_peaks() {
        // Dyadic step so the ramp (and hence its detrend residual, exactly
        // zero) is computed without rounding.
        let x: Vec<f64> = (0..1020).map(|i| i as f64 * 0.25).collect();
        let peaks = detect_peaks(&x, 34.0, 68).unwrap();
        assert!(peaks.is_empty(), "ramp produced {:?}", peaks.indices());
    }

    #[test]
    fn constant_window_has_no_peaks() {
        let x = vec![1.0; 256];
        let peaks = detect_peaks(&x, 34.0, 68).unwrap();
        assert!(peaks.is_empty());
    }

    #[test]
    fn single_impulse_is_the_only_peak() {
        let mut x = vec![0.0; 1020];
        x[517] = 1.0;
        let peaks = detect_peaks(&x, 34.0, 68).unwrap();
        assert_eq!(peaks.indices(), &[517]);
    }

    #[test]
    fn windows_shorter_than_eight_samples_are_rejected() {
        let err = detect_peaks(&[1.0; 7], 34.0, 68).unwrap_err();
        match err {
            Error::SignalTooShort { len, min } => assert_eq!((len, min), (7, 8)),
            other => panic!("expected SignalTooShort, got {other:?}"),
        }
    }

    #[test]
    fn zero_max_scale_is_rejected() {
        assert!(detect_peaks(&[0.0; 64], 34.0, 0).is_err());
    }

    #[test]
    fn detection_is_deterministic() {
        let x: Vec<f64> = (0..600)
            .map(|i| (i as f64 * 0.21).sin() + 0.3 * (i as f64 * 0.041).cos())
            .collect();
        let a = detect_peaks(&x, 34.0, 68).unwrap();
        let b = detect_peaks(&x, 34.0, 68).unwrap();
        assert_eq!(a, b);
    }

    /// Deterministic pseudo-noise from the golden-ratio sequence.
    fn pseudo_noise(i: usize) -> f64 {
        let v = (i as f64 * 0.618033988749895).fract();
        v - 0.5
    }

    proptest! {
        /// Every reported peak is a strict +-1 local maximum of the
        /// independently detrended window, and indices strictly increase.
        #[test]
        fn peaks_are_strict_local_maxima_of_the_detrended_window(
            seed in 0usize..1000,
            n in 64usize..400,
        ) {
            let x: Vec<f64> = (0..n)
                .map(|i| {
                    (2.0 * PI * i as f64 / 23.0).sin()
                        + 0.4 * pseudo_noise(i.wrapping_mul(seed + 1))
                        + 0.002 * i as f64
                })
                .collect();
            let peaks = detect_peaks(&x, 34.0, 68).unwrap();

            // Independent detrend: plain two-pass least squares.
            let nf = n as f64;
            let tm = (nf - 1.0) / 2.0;
            let xm = x.iter().sum::<f64>() / nf;
            let (mut num, mut den) = (0.0, 0.0);
            for (i, v) in x.iter().enumerate() {
                num += (i as f64 - tm) * (v - xm);
                den += (i as f64 - tm) * (i as f64 - tm);
            }
            let slope = num / den;
            let d: Vec<f64> = x
                .iter()
                .enumerate()
                .map(|(i, v)| v - (xm + slope * (i as f64 - tm)))
                .collect();

            let idx = peaks.indices();
            for w in idx.windows(2) {
                prop_assert!(w[1] > w[0]);
            }
            for &p in idx {
                prop_assert!(p >= 1 && p + 1 < n);
                prop_assert!(d[p] > d[p - 1] && d[p] > d[p + 1],
                    "index {} is not a strict local maximum", p);
            }
        }
    }
}
