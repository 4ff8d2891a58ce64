use std::f64::consts::PI;

use num_complex::Complex64;

use super::biquad::{apply_in_place, design_coeffs, BiquadCoeffs, FilterKind};
use super::clamp_freq;
use super::params::EqParams;
use crate::audio::AudioBuffer;
use crate::fft;

/// Fixed Q of the shelving bands (Butterworth-like slope).
pub const SHELF_Q: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// Band kind, gain, frequency and Q for each of the six sections.
pub(crate) fn band_settings(eq: &EqParams) -> [(FilterKind, f64, f64, f64); 6] {
    let p = &eq.peaks;
    [
        (FilterKind::LowShelf, eq.low_shelf.gain_db, eq.low_shelf.cutoff_hz, SHELF_Q),
        (FilterKind::Peaking, p[0].gain_db, p[0].center_hz, p[0].q),
        (FilterKind::Peaking, p[1].gain_db, p[1].center_hz, p[1].q),
        (FilterKind::Peaking, p[2].gain_db, p[2].center_hz, p[2].q),
        (FilterKind::Peaking, p[3].gain_db, p[3].center_hz, p[3].q),
        (FilterKind::HighShelf, eq.high_shelf.gain_db, eq.high_shelf.cutoff_hz, SHELF_Q),
    ]
}

/// Coefficients of the six sections at sample rate `fs`. Frequencies above
/// `0.49 * fs` are clamped.
pub fn eq_biquads(eq: &EqParams, fs: f64) -> [BiquadCoeffs; 6] {
    band_settings(eq).map(|(kind, g, f, q)| {
        let (f, _) = clamp_freq(f, fs);
        let (b, a) = design_coeffs(kind, g, f, q, fs);
        BiquadCoeffs { b, a }
    })
}

/// True when every section has `b == a`, i.e. the cascade is exactly unity.
pub fn eq_is_identity(eq: &EqParams, fs: f64) -> bool {
    eq_biquads(eq, fs).iter().all(|c| c.b == c.a)
}

/// Time-domain cascade of the six biquads.
pub fn apply_eq_td(x: &AudioBuffer, eq: &EqParams) -> AudioBuffer {
    let mut y = x.samples().to_vec();
    for c in eq_biquads(eq, x.sample_rate() as f64) {
        apply_in_place(&mut y, &c);
    }
    AudioBuffer::from_parts(y, x.sample_rate())
}

/// Cascade response on `n_bins` frequencies linearly spaced over `[0, pi]`.
pub fn eq_response(eq: &EqParams, n_bins: usize, fs: f64) -> Vec<Complex64> {
    assert!(n_bins >= 2, "need at least two bins");
    let bands = eq_biquads(eq, fs);
    let step = PI / (n_bins - 1) as f64;
    (0..n_bins)
        .map(|m| {
            let w = m as f64 * step;
            bands.iter().fold(Complex64::new(1.0, 0.0), |h, c| h * c.response(w))
        })
        .collect()
}

/// Cascade response at arbitrary frequencies in Hz.
pub fn eq_response_at(eq: &EqParams, freqs_hz: &[f64], fs: f64) -> Vec<Complex64> {
    let bands = eq_biquads(eq, fs);
    freqs_hz
        .iter()
        .map(|f| {
            let w = 2.0 * PI * f / fs;
            bands.iter().fold(Complex64::new(1.0, 0.0), |h, c| h * c.response(w))
        })
        .collect()
}

/// Frequency-sampled filtering: zero-pad to `F = 2^ceil(log2(2N - 1))`,
/// multiply the one-sided spectrum by `response(F / 2 + 1)`, invert and keep
/// the first `N` samples.
pub fn fir_filter_freq<R>(x: &AudioBuffer, response: R) -> AudioBuffer
where
    R: FnOnce(usize) -> Vec<Complex64>,
{
    let n = x.len();
    if n == 0 {
        return x.clone();
    }
    let f = fft::linear_conv_len(n);
    let mut spec = fft::rfft_padded(x.samples(), f);
    let h = response(spec.len());
    assert_eq!(h.len(), spec.len(), "response length must be F/2 + 1");
    for (s, hk) in spec.iter_mut().zip(&h) {
        *s *= hk;
    }
    let y = fft::irfft_raw(&mut spec, f);
    let scale = 1.0 / f as f64;
    AudioBuffer::from_parts(y[..n].iter().map(|v| v * scale).collect(), x.sample_rate())
}
