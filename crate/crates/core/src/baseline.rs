//! Rule-based style transfer: a spectrum-matching linear-phase FIR followed
//! by a compressor whose threshold is lowered until the loudness matches.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::audio::{stft, AudioBuffer};
use crate::effects::{compressor_reference, CompParams};
use crate::error::{Error, Result};
use crate::fft;
use crate::objective::lufs_integrated;

pub const SPECTRUM_WINDOW: usize = 65536;
pub const SPECTRUM_HOP: usize = 16384;
pub const SAVGOL_WINDOW: usize = 1025;
pub const SAVGOL_ORDER: usize = 2;
pub const FIR_TAPS: usize = 63;
const SPECTRUM_FLOOR: f64 = 1e-8;
const MAX_GAIN_DB: f64 = 24.0;
const THRESHOLD_STEP_DB: f64 = 0.5;
const THRESHOLD_FLOOR_DB: f64 = -80.0;
const LUFS_TOLERANCE: f64 = 0.5;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HaltReason {
    /// Loudness gap fell below the tolerance.
    Tolerance,
    /// Threshold reached -80 dB.
    Floor,
    /// The uncompressed render was already quieter than the reference by
    /// more than the tolerance; lowering the threshold cannot help.
    ReferenceLouder,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BaselineReport {
    pub fir_taps: Vec<f64>,
    pub final_threshold_db: f64,
    pub iterations: usize,
    /// `LUFS(out) - LUFS(ref)` of the returned render.
    pub final_lufs_gap: f64,
    pub halted_on: HaltReason,
    pub makeup_db: f64,
    /// Rendered loudness after each iteration, starting at threshold 0 dB.
    pub lufs_trace: Vec<f64>,
}

/// Compressor settings held fixed while the threshold descends.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DescentSettings {
    pub ratio: f64,
    pub attack_s: f64,
    pub release_s: f64,
    pub knee_db: f64,
}

impl Default for DescentSettings {
    fn default() -> Self {
        Self {
            ratio: 3.0,
            attack_s: 0.005,
            release_s: 0.05,
            knee_db: 6.0,
        }
    }
}

/// Frame-averaged Hann STFT magnitude (65536-point window, hop 16384).
pub fn average_spectrum(x: &AudioBuffer) -> Vec<f64> {
    let spec = stft(x, SPECTRUM_WINDOW, SPECTRUM_HOP).expect("fixed valid stft size");
    let mut avg = vec![0.0; spec.num_bins()];
    for frame in &spec.frames {
        for (a, c) in avg.iter_mut().zip(frame) {
            *a += c.norm();
        }
    }
    let k = 1.0 / spec.num_frames() as f64;
    avg.iter_mut().for_each(|a| *a *= k);
    avg
}

/// Weights that evaluate a least-squares polynomial of `order` at offset 0
/// from samples at integer `offsets`.
fn fit_weights(offsets: &[f64], order: usize) -> Vec<f64> {
    let p = order + 1;
    let scale = offsets.iter().fold(1.0f64, |m, t| m.max(t.abs()));
    let mut m = vec![vec![0.0; p]; p];
    for &t in offsets {
        let u = t / scale;
        let pw: Vec<f64> = (0..2 * p).map(|k| u.powi(k as i32)).collect();
        for (r, row) in m.iter_mut().enumerate() {
            for (c, v) in row.iter_mut().enumerate() {
                *v += pw[r + c];
            }
        }
    }
    // solve M z = e0 by Gauss-Jordan with partial pivoting
    let mut rhs = vec![0.0; p];
    rhs[0] = 1.0;
    for col in 0..p {
        let piv = (col..p)
            .max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs()))
            .unwrap();
        m.swap(col, piv);
        rhs.swap(col, piv);
        let d = m[col][col];
        for c in 0..p {
            m[col][c] /= d;
        }
        rhs[col] /= d;
        for r in 0..p {
            if r != col {
                let f = m[r][col];
                for c in 0..p {
                    m[r][c] -= f * m[col][c];
                }
                rhs[r] -= f * rhs[col];
            }
        }
    }
    offsets
        .iter()
        .map(|&t| {
            let u = t / scale;
            (0..p).map(|k| rhs[k] * u.powi(k as i32)).sum()
        })
        .collect()
}

/// Savitzky-Golay smoothing (window 1025, order 2). Near the edges the
/// polynomial is fitted on the part of the window that exists. Output is
/// floored at 1e-8.
pub fn savgol_smooth(spec: &[f64]) -> Vec<f64> {
    let n = spec.len();
    let half = (SAVGOL_WINDOW / 2) as isize;
    let dot = |w: &[f64], lo: usize| -> f64 {
        w.iter().zip(&spec[lo..]).map(|(a, b)| a * b).sum::<f64>()
    };
    let interior: Vec<f64> = fit_weights(
        &(-half..=half).map(|t| t as f64).collect::<Vec<_>>(),
        SAVGOL_ORDER,
    );
    (0..n)
        .map(|i| {
            let lo = (i as isize - half).max(0) as usize;
            let hi = ((i as isize + half) as usize).min(n - 1);
            let v = if hi - lo + 1 == SAVGOL_WINDOW {
                dot(&interior, lo)
            } else if hi - lo < SAVGOL_ORDER {
                spec[i]
            } else {
                let offs: Vec<f64> = (lo..=hi).map(|j| j as f64 - i as f64).collect();
                dot(&fit_weights(&offs, SAVGOL_ORDER), lo)
            };
            v.max(SPECTRUM_FLOOR)
        })
        .collect()
}

/// Linear-phase FIR whose magnitude follows `ref_spec / input_spec`
/// (clamped to +-24 dB), designed by frequency sampling on a
/// `2^ceil(log2(n_taps)) + 1` point grid and a symmetric Hann window.
pub fn design_match_fir(input_spec: &[f64], ref_spec: &[f64], n_taps: usize) -> Result<Vec<f64>> {
    if input_spec.len() != ref_spec.len() || input_spec.len() < 2 {
        return Err(Error::LengthMismatch(input_spec.len(), ref_spec.len()));
    }
    if n_taps < 3 || n_taps % 2 == 0 {
        return Err(Error::InvalidParam(format!("FIR length {n_taps} must be odd and >= 3")));
    }
    let lim = 10f64.powf(MAX_GAIN_DB / 20.0);
    let bins = input_spec.len();
    let nfreqs = fft::next_pow2(n_taps) + 1;
    let nfft = 2 * (nfreqs - 1);
    let delay = (n_taps - 1) as f64 / 2.0;
    let mut grid: Vec<Complex64> = (0..nfreqs)
        .map(|g| {
            // linear interpolation of the desired magnitude onto the grid
            let pos = g as f64 * (bins - 1) as f64 / (nfreqs - 1) as f64;
            let k = (pos.floor() as usize).min(bins - 2);
            let t = pos - k as f64;
            let ratio = |k: usize| (ref_spec[k] / input_spec[k].max(SPECTRUM_FLOOR)).clamp(1.0 / lim, lim);
            let mag = ratio(k) * (1.0 - t) + ratio(k + 1) * t;
            Complex64::from_polar(mag, -PI * delay * g as f64 / (nfreqs - 1) as f64)
        })
        .collect();
    let h = fft::irfft_raw(&mut grid, nfft);
    let taps = (0..n_taps)
        .map(|i| {
            let w = 0.5 - 0.5 * (2.0 * PI * i as f64 / (n_taps - 1) as f64).cos();
            w * h[i] / nfft as f64
        })
        .collect();
    Ok(taps)
}

/// Frequency response of an FIR at normalized angular frequency `w`.
pub fn fir_response(taps: &[f64], w: f64) -> Complex64 {
    taps.iter()
        .enumerate()
        .map(|(n, &h)| Complex64::from_polar(h, -w * n as f64))
        .sum()
}

/// Convolve with a linear-phase FIR and drop its `(len - 1) / 2` sample
/// delay so the output aligns with the input and keeps its length.
pub fn apply_fir(x: &AudioBuffer, taps: &[f64]) -> AudioBuffer {
    let d = (taps.len() - 1) / 2;
    let s = x.samples();
    let n = s.len();
    let out = (0..n)
        .map(|i| {
            let m = i + d;
            let k_lo = m.saturating_sub(n - 1);
            let k_hi = m.min(taps.len() - 1);
            (k_lo..=k_hi).map(|k| taps[k] * s[m - k]).sum()
        })
        .collect();
    AudioBuffer::from_parts(out, x.sample_rate())
}

fn descent_comp(threshold_db: f64, makeup_db: f64, s: &DescentSettings) -> CompParams {
    CompParams {
        threshold_db,
        ratio: s.ratio,
        attack_s: s.attack_s,
        release_s: s.release_s,
        knee_db: s.knee_db,
        makeup_db,
    }
}

fn loudness(x: &AudioBuffer) -> Result<f64> {
    lufs_integrated(x).ok_or(Error::Unmeasurable)
}

/// Lower the compressor threshold in 0.5 dB steps from 0 dB until the
/// rendered loudness is within 0.5 LU of the reference, or -80 dB.
pub fn threshold_descent(
    x: &AudioBuffer,
    reference: &AudioBuffer,
    settings: &DescentSettings,
) -> Result<(AudioBuffer, BaselineReport)> {
    let l_ref = loudness(reference)?;
    let l_x = loudness(x)?;
    let l_zero = loudness(&compressor_reference(x, &descent_comp(0.0, 0.0, settings)))?;
    let makeup_db = l_x - l_zero;
    let steps = (-THRESHOLD_FLOOR_DB / THRESHOLD_STEP_DB).round() as usize;
    let mut trace = Vec::new();
    for i in 0..=steps {
        let t = -THRESHOLD_STEP_DB * i as f64;
        let out = compressor_reference(x, &descent_comp(t, makeup_db, settings));
        let l = loudness(&out)?;
        trace.push(l);
        let gap = l - l_ref;
        let halt = if gap.abs() < LUFS_TOLERANCE {
            Some(HaltReason::Tolerance)
        } else if gap < 0.0 {
            Some(HaltReason::ReferenceLouder)
        } else if i == steps {
            Some(HaltReason::Floor)
        } else {
            None
        };
        if let Some(halted_on) = halt {
            return Ok((
                out,
                BaselineReport {
                    fir_taps: Vec::new(),
                    final_threshold_db: t,
                    iterations: i,
                    final_lufs_gap: gap,
                    halted_on,
                    makeup_db,
                    lufs_trace: trace,
                },
            ));
        }
    }
    unreachable!("loop halts at the floor")
}

/// Spectrum-matching FIR stage followed by the threshold descent.
pub fn rb_style_transfer(x: &AudioBuffer, reference: &AudioBuffer) -> Result<(AudioBuffer, BaselineReport)> {
    rb_style_transfer_with(x, reference, &DescentSettings::default())
}

pub fn rb_style_transfer_with(
    x: &AudioBuffer,
    reference: &AudioBuffer,
    settings: &DescentSettings,
) -> Result<(AudioBuffer, BaselineReport)> {
    if x.is_empty() || reference.is_empty() {
        return Err(Error::Empty);
    }
    let xs = savgol_smooth(&average_spectrum(x));
    let rs = savgol_smooth(&average_spectrum(reference));
    let taps = design_match_fir(&xs, &rs, FIR_TAPS)?;
    let filtered = apply_fir(x, &taps);
    let (out, mut report) = threshold_descent(&filtered, reference, settings)?;
    report.fir_taps = taps;
    Ok((out, report))
}
