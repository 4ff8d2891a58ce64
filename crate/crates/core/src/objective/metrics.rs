//! Evaluation metrics between a processed signal and its target.

use serde::{Deserialize, Serialize};

use super::loss::mrstft;
use super::loudness::{lufs_integrated, metric_lufs};
use crate::audio::{frame_count, stft, AudioBuffer};
use crate::error::{Error, Result};

const MSD_WINDOW: usize = 65536;
const MSD_HOP: usize = 32768;
const MEL_BANDS: usize = 128;
const MEL_FMIN: f64 = 20.0;
const MEL_FMAX_RATIO: f64 = 0.45;
const MEL_FLOOR: f64 = 1e-7;
const SCE_WINDOW: usize = 4096;
const SCE_HOP: usize = 2048;
const RMS_FRAME: usize = 1024;
const RMS_EPS: f64 = 1e-8;

/// Full-reference metrics of one (estimate, target) pair.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub mrstft: f64,
    pub msd: f64,
    pub sce: f64,
    pub rms_err: f64,
    pub lufs_err: f64,
}

/// Metrics that compare two signals of unrelated content.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NonIntrusiveReport {
    pub sce: f64,
    pub rms_err: f64,
    pub lufs_err: f64,
    pub output_lufs: f64,
    pub reference_lufs: f64,
    pub output_centroid_hz: f64,
    pub reference_centroid_hz: f64,
}

fn hz_to_mel(f: f64) -> f64 {
    2595.0 * (1.0 + f / 700.0).log10()
}

fn mel_to_hz(m: f64) -> f64 {
    700.0 * (10f64.powf(m / 2595.0) - 1.0)
}

fn check_len(a: &AudioBuffer, b: &AudioBuffer) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch(a.len(), b.len()));
    }
    Ok(())
}

/// Triangular HTK-mel filters mapping `n_fft / 2 + 1` bins to `n_bands`
/// bands, each weighted by `2 / (upper - lower)` so the triangles have equal
/// area in Hz.
pub fn mel_filterbank(n_bands: usize, n_fft: usize, fs: f64) -> Vec<Vec<f64>> {
    let fmax = MEL_FMAX_RATIO * fs;
    let (m0, m1) = (hz_to_mel(MEL_FMIN), hz_to_mel(fmax));
    let edges: Vec<f64> = (0..n_bands + 2)
        .map(|i| mel_to_hz(m0 + (m1 - m0) * i as f64 / (n_bands + 1) as f64))
        .collect();
    let bins = n_fft / 2 + 1;
    let bin_hz = fs / n_fft as f64;
    (0..n_bands)
        .map(|b| {
            let (lo, c, hi) = (edges[b], edges[b + 1], edges[b + 2]);
            let norm = 2.0 / (hi - lo);
            (0..bins)
                .map(|k| {
                    let f = k as f64 * bin_hz;
                    let w = if f <= lo || f >= hi {
                        0.0
                    } else if f <= c {
                        (f - lo) / (c - lo)
                    } else {
                        (hi - f) / (hi - c)
                    };
                    w * norm
                })
                .collect()
        })
        .collect()
}

/// Sparse (first bin, weights) form of the filterbank.
fn sparse_bank(bank: &[Vec<f64>]) -> Vec<(usize, Vec<f64>)> {
    bank.iter()
        .map(|row| {
            let first = row.iter().position(|&w| w > 0.0).unwrap_or(0);
            let last = row.iter().rposition(|&w| w > 0.0).map_or(first, |l| l + 1);
            (first, row[first..last].to_vec())
        })
        .collect()
}

fn log_mel(x: &AudioBuffer, bank: &[(usize, Vec<f64>)]) -> Result<Vec<f64>> {
    let spec = stft(x, MSD_WINDOW, MSD_HOP)?;
    let mut out = Vec::with_capacity(spec.num_frames() * bank.len());
    for frame in &spec.frames {
        for (first, w) in bank {
            let e: f64 = w
                .iter()
                .zip(&frame[*first..])
                .map(|(wk, c)| wk * c.norm())
                .sum();
            out.push(e.max(MEL_FLOOR).ln());
        }
    }
    Ok(out)
}

/// Mean absolute log-mel difference (128 bands, 65536-point window).
pub fn metric_msd(a: &AudioBuffer, b: &AudioBuffer) -> Result<f64> {
    check_len(a, b)?;
    a.check_compatible(b)?;
    let bank = sparse_bank(&mel_filterbank(MEL_BANDS, MSD_WINDOW, a.sample_rate() as f64));
    let (la, lb) = (log_mel(a, &bank)?, log_mel(b, &bank)?);
    debug_assert_eq!(la.len(), frame_count(a.len(), MSD_WINDOW, MSD_HOP) * MEL_BANDS);
    Ok(la.iter().zip(&lb).map(|(x, y)| (x - y).abs()).sum::<f64>() / la.len() as f64)
}

/// Frame-averaged spectral centroid in Hz; silent frames are skipped and a
/// fully silent signal has centroid 0.
pub fn spectral_centroid(x: &AudioBuffer) -> f64 {
    let spec = stft(x, SCE_WINDOW, SCE_HOP).expect("fixed valid stft size");
    let (mut sum, mut count) = (0.0, 0usize);
    for frame in &spec.frames {
        let (mut num, mut den) = (0.0, 0.0);
        for (k, c) in frame.iter().enumerate() {
            let m = c.norm();
            num += spec.bin_hz(k) * m;
            den += m;
        }
        if den > 0.0 {
            sum += num / den;
            count += 1;
        }
    }
    if count == 0 {
        0.0
    } else {
        sum / count as f64
    }
}

pub fn metric_sce(a: &AudioBuffer, b: &AudioBuffer) -> Result<f64> {
    check_len(a, b)?;
    Ok((spectral_centroid(a) - spectral_centroid(b)).abs())
}

fn frame_rms_db(x: &[f64]) -> impl Iterator<Item = f64> + '_ {
    x.chunks(RMS_FRAME).map(|c| {
        let ms = c.iter().map(|v| v * v).sum::<f64>() / c.len() as f64;
        20.0 * (ms.sqrt() + RMS_EPS).log10()
    })
}

/// Mean per-frame RMS level difference in dB over 1024-sample frames.
pub fn metric_rms(a: &AudioBuffer, b: &AudioBuffer) -> Result<f64> {
    check_len(a, b)?;
    if a.is_empty() {
        return Ok(0.0);
    }
    let n = a.len().div_ceil(RMS_FRAME);
    let total: f64 = frame_rms_db(a.samples())
        .zip(frame_rms_db(b.samples()))
        .map(|(x, y)| (x - y).abs())
        .sum();
    Ok(total / n as f64)
}

pub fn metric_report(est: &AudioBuffer, target: &AudioBuffer) -> Result<MetricReport> {
    Ok(MetricReport {
        mrstft: mrstft(est, target)?,
        msd: metric_msd(est, target)?,
        sce: metric_sce(est, target)?,
        rms_err: metric_rms(est, target)?,
        lufs_err: metric_lufs(est, target)?,
    })
}

fn level_db(x: &AudioBuffer) -> f64 {
    20.0 * (x.rms() + RMS_EPS).log10()
}

/// Centroid, RMS level and loudness differences between signals that need
/// not share content or length.
pub fn non_intrusive_report(out: &AudioBuffer, reference: &AudioBuffer) -> Result<NonIntrusiveReport> {
    let lo = lufs_integrated(out).ok_or(Error::Unmeasurable)?;
    let lr = lufs_integrated(reference).ok_or(Error::Unmeasurable)?;
    let (co, cr) = (spectral_centroid(out), spectral_centroid(reference));
    Ok(NonIntrusiveReport {
        sce: (co - cr).abs(),
        rms_err: (level_db(out) - level_db(reference)).abs(),
        lufs_err: (lo - lr).abs(),
        output_lufs: lo,
        reference_lufs: lr,
        output_centroid_hz: co,
        reference_centroid_hz: cr,
    })
}
