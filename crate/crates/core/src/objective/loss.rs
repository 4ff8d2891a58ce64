//! Audio-domain training loss: multi-resolution STFT distance plus a
//! weighted time-domain MAE.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::audio::{frame_count, AudioBuffer, Window};
use crate::error::{Error, Result};
use crate::fft;

/// STFT window sizes; hop is half the window.
pub const MRSTFT_WINDOWS: [usize; 6] = [32, 128, 512, 2048, 8192, 32768];
/// Magnitudes are clamped from below before the logarithm.
pub const MRSTFT_LOG_FLOOR: f64 = 1e-7;
/// Weight of the time-domain term.
pub const TIME_WEIGHT: f64 = 100.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LossBreakdown {
    pub freq: f64,
    pub time: f64,
    pub overall: f64,
}

impl LossBreakdown {
    pub fn compose(freq: f64, time: f64) -> Self {
        Self {
            freq,
            time,
            overall: freq + TIME_WEIGHT * time,
        }
    }
}

#[inline]
fn sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

pub fn mae_time(a: &AudioBuffer, b: &AudioBuffer) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch(a.len(), b.len()));
    }
    if a.is_empty() {
        return Ok(0.0);
    }
    Ok(mae_slices(a.samples(), b.samples()))
}

pub(crate) fn mae_slices(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>() / a.len() as f64
}

/// Cached magnitudes of one resolution of the reference signal.
#[derive(Clone, Debug)]
struct Resolution {
    window: usize,
    hop: usize,
    win: Vec<f64>,
    frames: usize,
    mags: Vec<f64>,
    logs: Vec<f64>,
}

impl Resolution {
    fn bins(&self) -> usize {
        self.window / 2 + 1
    }
}

/// MR-STFT distance to a fixed reference, with the reference analysis
/// computed once. Supports the loss value and its gradient with respect to
/// the estimate's samples.
#[derive(Clone, Debug)]
pub struct MrStftTarget {
    len: usize,
    resolutions: Vec<Resolution>,
}

fn frame_into(signal: &[f64], start: usize, win: &[f64], out: &mut [f64]) {
    for (i, slot) in out.iter_mut().enumerate() {
        *slot = signal.get(start + i).copied().unwrap_or(0.0) * win[i];
    }
}

impl MrStftTarget {
    pub fn new(reference: &[f64]) -> Self {
        let resolutions = MRSTFT_WINDOWS
            .iter()
            .map(|&window| {
                let hop = window / 2;
                let win = Window::Hann.coefficients(window);
                let frames = frame_count(reference.len(), window, hop);
                let plan = fft::forward_plan(window);
                let bins = window / 2 + 1;
                let mut mags = Vec::with_capacity(frames * bins);
                let mut buf = vec![0.0; window];
                let mut spec = plan.make_output_vec();
                for f in 0..frames {
                    frame_into(reference, f * hop, &win, &mut buf);
                    plan.process(&mut buf, &mut spec).expect("fft sizes");
                    mags.extend(spec.iter().map(|c| c.norm().max(MRSTFT_LOG_FLOOR)));
                }
                let logs = mags.iter().map(|m| m.ln()).collect();
                Resolution {
                    window,
                    hop,
                    win,
                    frames,
                    mags,
                    logs,
                }
            })
            .collect();
        Self {
            len: reference.len(),
            resolutions,
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Distance between `est` and the reference.
    pub fn loss(&self, est: &[f64]) -> f64 {
        assert_eq!(est.len(), self.len);
        let mut total = 0.0;
        for r in &self.resolutions {
            let plan = fft::forward_plan(r.window);
            let bins = r.bins();
            let mut buf = vec![0.0; r.window];
            let mut spec = plan.make_output_vec();
            let (mut lin, mut log) = (0.0, 0.0);
            for f in 0..r.frames {
                frame_into(est, f * r.hop, &r.win, &mut buf);
                plan.process(&mut buf, &mut spec).expect("fft sizes");
                let rm = &r.mags[f * bins..(f + 1) * bins];
                let rl = &r.logs[f * bins..(f + 1) * bins];
                for k in 0..bins {
                    let s = spec[k].norm().max(MRSTFT_LOG_FLOOR);
                    lin += (s - rm[k]).abs();
                    log += (s.ln() - rl[k]).abs();
                }
            }
            total += (lin + log) / (r.frames * bins) as f64;
        }
        total
    }

    /// Distance and its gradient with respect to every sample of `est`.
    /// Clamped (below-floor) bins and ties contribute zero gradient.
    pub fn loss_and_grad(&self, est: &[f64]) -> (f64, Vec<f64>) {
        assert_eq!(est.len(), self.len);
        let n = est.len();
        let mut grad = vec![0.0; n];
        let mut total = 0.0;
        for r in &self.resolutions {
            let plan = fft::forward_plan(r.window);
            let inv = fft::inverse_plan(r.window);
            let bins = r.bins();
            let scale = 1.0 / (r.frames * bins) as f64;
            let mut buf = vec![0.0; r.window];
            let mut spec = plan.make_output_vec();
            let mut gspec = vec![Complex64::new(0.0, 0.0); bins];
            let mut back = vec![0.0; r.window];
            let (mut lin, mut log) = (0.0, 0.0);
            for f in 0..r.frames {
                let start = f * r.hop;
                frame_into(est, start, &r.win, &mut buf);
                plan.process(&mut buf, &mut spec).expect("fft sizes");
                let rm = &r.mags[f * bins..(f + 1) * bins];
                let rl = &r.logs[f * bins..(f + 1) * bins];
                for k in 0..bins {
                    let m = spec[k].norm();
                    let s = m.max(MRSTFT_LOG_FLOOR);
                    let ls = s.ln();
                    let dl = s - rm[k];
                    let dg = ls - rl[k];
                    lin += dl.abs();
                    log += dg.abs();
                    let g = if m > MRSTFT_LOG_FLOOR {
                        let gs = (sign(dl) + sign(dg) / s) * scale;
                        let mut c = spec[k] * (gs / m);
                        // one-sided spectrum adjoint: interior bins appear twice
                        // in the hermitian inverse
                        if k != 0 && k != bins - 1 {
                            c *= 0.5;
                        }
                        c
                    } else {
                        Complex64::new(0.0, 0.0)
                    };
                    gspec[k] = g;
                }
                gspec[0].im = 0.0;
                gspec[bins - 1].im = 0.0;
                inv.process(&mut gspec, &mut back).expect("ifft sizes");
                let end = (start + r.window).min(n);
                for (i, gi) in grad[start..end].iter_mut().enumerate() {
                    *gi += back[i] * r.win[i];
                }
            }
            total += (lin + log) * scale;
        }
        (total, grad)
    }
}

/// Sum over resolutions of mean linear-magnitude and mean log-magnitude L1
/// distances between Hann-windowed STFTs.
pub fn mrstft(a: &AudioBuffer, b: &AudioBuffer) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch(a.len(), b.len()));
    }
    Ok(MrStftTarget::new(b.samples()).loss(a.samples()))
}

/// `freq + 100 * time`.
pub fn overall_loss(a: &AudioBuffer, b: &AudioBuffer) -> Result<LossBreakdown> {
    let time = mae_time(a, b)?;
    let freq = mrstft(a, b)?;
    Ok(LossBreakdown::compose(freq, time))
}
