//! PPG preprocessing chain.
//!
//! The fixed order of operations is: zero-phase low-pass filtering at the
//! native rate (anti-aliasing), linear-interpolation downsampling, outlier
//! clipping at `k` standard deviations, then z-score normalization. Filtering
//! must precede resampling, and clipping must precede normalization; the
//! chain is exposed both as individual operations and as
//! [`preprocess_record`].

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::model::{Biquad, FilterCoefficients, PpgRecord};
use crate::stats::mean_std;

/// Parameters of the preprocessing chain. Defaults implement the standard
/// recipe: 8th-order Chebyshev type II low-pass with the stopband starting at
/// 8 Hz and 40 dB of stopband attenuation, downsampling to 34 Hz, clipping at
/// three standard deviations.
#[derive(Debug, Clone)]
pub struct PreprocessConfig {
    pub filter_order: usize,
    pub stopband_edge_hz: f64,
    pub stopband_atten_db: f64,
    pub target_fs_hz: f64,
    pub clip_sigma: f64,
}

impl Default for PreprocessConfig {
    fn default() -> Self {
        PreprocessConfig {
            filter_order: 8,
            stopband_edge_hz: 8.0,
            stopband_atten_db: 40.0,
            target_fs_hz: 34.0,
            clip_sigma: 3.0,
        }
    }
}

// ---------------------------------------------------------------------------
// Filter design
// ---------------------------------------------------------------------------

/// Design a Chebyshev type II (inverse Chebyshev) digital low-pass filter.
///
/// `edge_hz` is the stopband edge: the response is equiripple at or below
/// `-atten_db` for all frequencies from the edge to Nyquist, and
/// monotonically approaches unity gain at DC. The analog prototype is mapped
/// through the bilinear transform with the stopband edge prewarped, then
/// factored into stable second-order sections.
///
/// Only even orders are supported (every pole/zero pairs off conjugate).
pub fn design_cheby2_lowpass(
    order: usize,
    edge_hz: f64,
    atten_db: f64,
    fs_hz: f64,
) -> Result<FilterCoefficients> {
    if !fs_hz.is_finite() || fs_hz <= 0.0 {
        return Err(Error::InvalidSamplingRate { fs_hz });
    }
    if order == 0 || !order.is_multiple_of(2) {
        return Err(Error::FilterDesign {
            message: format!("order must be even and positive, got {order}"),
        });
    }
    if !edge_hz.is_finite() || edge_hz <= 0.0 || edge_hz >= fs_hz / 2.0 {
        return Err(Error::FilterDesign {
            message: format!(
                "stopband edge {edge_hz} Hz must lie strictly between 0 and the Nyquist rate {} Hz",
                fs_hz / 2.0
            ),
        });
    }
    if !atten_db.is_finite() || atten_db <= 0.0 {
        return Err(Error::FilterDesign {
            message: format!("stopband attenuation must be positive, got {atten_db} dB"),
        });
    }

    let n = order;
    // Analog prototype, normalized so the stopband starts at omega = 1 rad/s.
    let de = 1.0 / (10f64.powf(0.1 * atten_db) - 1.0).sqrt();
    let mu = (1.0 / de).asinh() / n as f64;

    let mut zeros = Vec::with_capacity(n);
    let mut poles = Vec::with_capacity(n);
    for i in 0..n {
        let m = (2 * i as i64 + 1) - n as i64; // -n+1, -n+3, ..., n-1
        let theta = PI * m as f64 / (2.0 * n as f64);
        // Transfer-function zeros sit on the imaginary axis at 1/sin(theta).
        zeros.push(Complex64::new(0.0, 1.0 / theta.sin()));
        // Chebyshev-I style poles on an ellipse, then inverted for type II.
        let p = Complex64::new(mu.sinh() * -theta.cos(), mu.cosh() * -theta.sin());
        poles.push(p.inv());
    }
    let num: Complex64 = poles.iter().map(|p| -p).product();
    let den: Complex64 = zeros.iter().map(|z| -z).product();
    let mut gain = (num / den).re;

    // Scale the prototype so the (prewarped) stopband edge lands correctly
    // after the bilinear transform.
    let warped = 2.0 * fs_hz * (PI * edge_hz / fs_hz).tan();
    for z in &mut zeros {
        *z *= warped;
    }
    for p in &mut poles {
        *p *= warped;
    }
    // Pole and zero counts are equal, so the low-pass scaling leaves the gain
    // unchanged.

    // Bilinear transform s -> 2*fs*(z-1)/(z+1).
    let fs2 = Complex64::new(2.0 * fs_hz, 0.0);
    let znum: Complex64 = zeros.iter().map(|z| fs2 - z).product();
    let zden: Complex64 = poles.iter().map(|p| fs2 - p).product();
    gain *= (znum / zden).re;
    let zeros_z: Vec<Complex64> = zeros.iter().map(|z| (fs2 + z) / (fs2 - z)).collect();
    let poles_z: Vec<Complex64> = poles.iter().map(|p| (fs2 + p) / (fs2 - p)).collect();

    let sections = pair_into_sections(&zeros_z, &poles_z, order)?;
    let coeffs = FilterCoefficients { sections, gain };
    if !coeffs.is_stable() {
        return Err(Error::FilterDesign {
            message: "designed cascade is not stable".to_string(),
        });
    }
    Ok(coeffs)
}

/// Group conjugate pole/zero pairs into biquads. Pole pairs are processed
/// from closest to the unit circle outward and each takes the nearest
/// remaining zero pair, which keeps the per-section response well scaled.
fn pair_into_sections(
    zeros: &[Complex64],
    poles: &[Complex64],
    order: usize,
) -> Result<Vec<Biquad>> {
    let mut zero_reps: Vec<Complex64> = zeros.iter().copied().filter(|z| z.im > 0.0).collect();
    let mut pole_reps: Vec<Complex64> = poles.iter().copied().filter(|p| p.im > 0.0).collect();
    if zero_reps.len() != order / 2 || pole_reps.len() != order / 2 {
        return Err(Error::FilterDesign {
            message: "expected poles and zeros in conjugate pairs".to_string(),
        });
    }
    pole_reps.sort_by(|a, b| b.norm().total_cmp(&a.norm()));

    let mut sections = Vec::with_capacity(order / 2);
    for p in pole_reps {
        let nearest = zero_reps
            .iter()
            .enumerate()
            .min_by(|(_, a), (_, b)| (*a - p).norm().total_cmp(&(*b - p).norm()))
            .map(|(i, _)| i)
            .expect("one zero pair per pole pair");
        let z = zero_reps.swap_remove(nearest);
        sections.push(Biquad {
            b0: 1.0,
            b1: -2.0 * z.re,
            b2: z.norm_sqr(),
            a1: -2.0 * p.re,
            a2: p.norm_sqr(),
        });
    }
    Ok(sections)
}

// ---------------------------------------------------------------------------
// Filtering
// ---------------------------------------------------------------------------

/// Run the cascade once, forward, over `buf` in place (transposed direct
/// form II per section).
///
/// Each section starts from its steady-state response to a step at the first
/// buffer value, so a constant signal passes through without a start-up
/// transient; for a stable section `1 + a1 + a2 > 0`, making that state well
/// defined.
fn filter_forward_in_place(buf: &mut [f64], coeffs: &FilterCoefficients) {
    if buf.is_empty() {
        return;
    }
    for v in buf.iter_mut() {
        *v *= coeffs.gain;
    }
    for s in &coeffs.sections {
        let x0 = buf[0];
        let y0 = x0 * (s.b0 + s.b1 + s.b2) / (1.0 + s.a1 + s.a2);
        let mut s1 = y0 - s.b0 * x0;
        let mut s2 = s.b2 * x0 - s.a2 * y0;
        for v in buf.iter_mut() {
            let x = *v;
            let y = s.b0 * x + s1;
            s1 = s.b1 * x - s.a1 * y + s2;
            s2 = s.b2 * x - s.a2 * y;
            *v = y;
        }
    }
}

/// Zero-phase filtering: forward pass, reverse, filter again, reverse.
///
/// The effective magnitude response is |H(f)|^2 with exactly zero phase,
/// which preserves pulse-peak timing. Edge transients are mitigated by
/// reflecting `3 * order` samples at each end before filtering; the padding
/// is stripped from the result. Signals must be longer than `3 * order`
/// samples.
pub fn filter_zero_phase(signal: &[f64], coeffs: &FilterCoefficients) -> Result<Vec<f64>> {
    let pad = 3 * coeffs.order();
    if signal.len() <= pad {
        return Err(Error::SignalTooShort {
            len: signal.len(),
            min: pad + 1,
        });
    }
    let n = signal.len();
    let mut buf = Vec::with_capacity(n + 2 * pad);
    buf.extend((1..=pad).rev().map(|i| signal[i]));
    buf.extend_from_slice(signal);
    buf.extend((1..=pad).rev().map(|i| signal[n - 1 - i]));

    filter_forward_in_place(&mut buf, coeffs);
    buf.reverse();
    filter_forward_in_place(&mut buf, coeffs);
    buf.reverse();

    Ok(buf[pad..pad + n].to_vec())
}

// ---------------------------------------------------------------------------
// Resampling, clipping, normalization
// ---------------------------------------------------------------------------

/// Downsample by linear interpolation. Output sample `j` is the input
/// evaluated at time `j / to_hz`; the output has
/// `floor((n - 1) * to_hz / from_hz) + 1` samples, so its duration differs
/// from the input's by less than one output sample period.
pub fn resample_linear(signal: &[f64], from_hz: f64, to_hz: f64) -> Result<Vec<f64>> {
    if signal.is_empty() {
        return Err(Error::empty("resample_linear input".to_string()));
    }
    if !from_hz.is_finite() || !to_hz.is_finite() || to_hz <= 0.0 || from_hz <= to_hz {
        return Err(Error::InvalidResampleRates { from_hz, to_hz });
    }
    let n = signal.len();
    let n_out = ((n - 1) as f64 * to_hz / from_hz).floor() as usize + 1;
    let step = from_hz / to_hz;
    let last = (n - 1) as f64;
    let mut out = Vec::with_capacity(n_out);
    for j in 0..n_out {
        let pos = (j as f64 * step).min(last);
        let i = pos.floor() as usize;
        let frac = pos - i as f64;
        let value = if frac == 0.0 {
            signal[i]
        } else {
            signal[i] * (1.0 - frac) + signal[i + 1] * frac
        };
        out.push(value);
    }
    Ok(out)
}

/// Clamp samples to `mean ± k * std` where the statistics come from the
/// input itself (population standard deviation). A constant signal (std 0)
/// passes through unchanged.
pub fn clip_outliers(signal: &[f64], k: f64) -> Result<Vec<f64>> {
    if signal.is_empty() {
        return Err(Error::empty("clip_outliers input".to_string()));
    }
    if is_constant(signal) {
        return Ok(signal.to_vec());
    }
    let (m, s) = mean_std(signal);
    Ok(clip_with_stats(signal, m, s, k))
}

/// True when every sample equals the first; used instead of `std == 0`
/// because the floating-point mean of identical values need not reproduce
/// them bit for bit.
fn is_constant(signal: &[f64]) -> bool {
    signal.iter().all(|v| *v == signal[0])
}

/// Clamp samples to `mean ± k * std` for externally supplied statistics.
/// Re-clipping a clipped signal with the original statistics is a no-op.
pub fn clip_with_stats(signal: &[f64], mean: f64, std: f64, k: f64) -> Vec<f64> {
    if std == 0.0 {
        return signal.to_vec();
    }
    let lo = mean - k * std;
    let hi = mean + k * std;
    signal.iter().map(|x| x.clamp(lo, hi)).collect()
}

/// Z-score normalization with the population standard deviation. A constant
/// signal maps to all zeros rather than dividing by zero.
pub fn zscore(signal: &[f64]) -> Result<Vec<f64>> {
    if signal.is_empty() {
        return Err(Error::empty("zscore input".to_string()));
    }
    if is_constant(signal) {
        return Ok(vec![0.0; signal.len()]);
    }
    let (m, s) = mean_std(signal);
    if s == 0.0 {
        return Ok(vec![0.0; signal.len()]);
    }
    Ok(signal.iter().map(|x| (x - m) / s).collect())
}

// ---------------------------------------------------------------------------
// Chain
// ---------------------------------------------------------------------------

/// Apply the full preprocessing chain to a recording: low-pass filter at the
/// native rate, downsample to the target rate, clip outliers, z-score. The
/// returned record carries the target sampling rate.
pub fn preprocess_record(record: &PpgRecord, config: &PreprocessConfig) -> Result<PpgRecord> {
    let coeffs = design_cheby2_lowpass(
        config.filter_order,
        config.stopband_edge_hz,
        config.stopband_atten_db,
        record.fs_hz(),
    )?;
    let filtered = filter_zero_phase(record.samples(), &coeffs)?;
    let resampled = resample_linear(&filtered, record.fs_hz(), config.target_fs_hz)?;
    let clipped = clip_outliers(&resampled, config.clip_sigma)?;
    let normalized = zscore(&clipped)?;
    PpgRecord::new(record.subject_id(), config.target_fs_hz, normalized)
}
