//! Feedforward log-domain compressor (and the downward expander used for
//! data generation).
//!
//! Signal flow: `x_dB = 20 log10(|x| + eps)`, static gain computer `y_G`,
//! gain reduction `x_L = x_dB - y_G`, ballistics smoothing `y_L`, and a
//! linear gain `10^(-y_L / 20)` times makeup.

use std::f64::consts::{LN_10, PI};

use num_complex::Complex64;

use super::eq::fir_filter_freq;
use super::params::CompParams;
use crate::audio::AudioBuffer;
use crate::dual::Real;

/// Level detector floor added before the logarithm.
pub const LEVEL_FLOOR: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CompMode {
    Compress,
    /// Downward expansion: slope `ratio` below threshold, hard knee.
    Expand,
}

#[inline]
pub fn level_db(x: f64) -> f64 {
    20.0 * (x.abs() + LEVEL_FLOOR).log10()
}

/// Static curve for one level. On the knee boundaries the knee branch is
/// used, so derivatives there are the knee branch's one-sided ones.
#[inline]
pub fn gain_computer_scalar<T: Real>(x_db: T, threshold: T, ratio: T, knee: T, mode: CompMode) -> T {
    let d = x_db.value() - threshold.value();
    match mode {
        CompMode::Compress => {
            let w = knee.value();
            if w > 0.0 && 2.0 * d.abs() <= w {
                let u = x_db - threshold + knee * 0.5;
                let slope = T::cst(1.0) / ratio - 1.0;
                x_db + slope * u * u / (knee * 2.0)
            } else if d <= 0.0 {
                x_db
            } else {
                threshold + (x_db - threshold) / ratio
            }
        }
        CompMode::Expand => {
            if d < 0.0 {
                threshold + (x_db - threshold) * ratio
            } else {
                x_db
            }
        }
    }
}

pub fn gain_computer(x_db: &[f64], comp: &CompParams, mode: CompMode) -> Vec<f64> {
    x_db.iter()
        .map(|&x| gain_computer_scalar(x, comp.threshold_db, comp.ratio, comp.knee_db, mode))
        .collect()
}

/// Output level for a steady input level (gain computer plus makeup).
pub fn static_curve(x_db: f64, comp: &CompParams) -> f64 {
    gain_computer_scalar(x_db, comp.threshold_db, comp.ratio, comp.knee_db, CompMode::Compress)
        + comp.makeup_db
}

/// One-pole coefficient `exp(-1 / (tau * fs))`.
pub fn time_constant(tau_s: f64, fs: f64) -> f64 {
    (-1.0 / (tau_s * fs)).exp()
}

/// Combined attack/release constant of the differentiable path, from the
/// geometric mean of the two times.
pub fn diff_time_constant(attack_s: f64, release_s: f64, fs: f64) -> f64 {
    time_constant((attack_s * release_s).sqrt(), fs)
}

/// Branching attack/release smoothing with zero initial state.
pub fn smooth_branching(x_l: &[f64], alpha_a: f64, alpha_r: f64) -> Vec<f64> {
    let mut prev = 0.0;
    x_l.iter()
        .map(|&x| {
            let a = if x > prev { alpha_a } else { alpha_r };
            prev = a * prev + (1.0 - a) * x;
            prev
        })
        .collect()
}

/// Single-constant recursive smoothing with zero initial state.
pub fn smooth_one_pole(x_l: &[f64], alpha: f64) -> Vec<f64> {
    let mut prev = 0.0;
    x_l.iter()
        .map(|&x| {
            prev = alpha * prev + (1.0 - alpha) * x;
            prev
        })
        .collect()
}

/// `(1 - a) / (1 - a e^{-jw})` sampled on `n_bins` points over `[0, pi]`.
pub fn one_pole_response(alpha: f64, n_bins: usize) -> Vec<Complex64> {
    let step = PI / (n_bins - 1) as f64;
    (0..n_bins)
        .map(|m| {
            let z = Complex64::from_polar(1.0, -(m as f64) * step);
            Complex64::new(1.0 - alpha, 0.0) / (Complex64::new(1.0, 0.0) - z * alpha)
        })
        .collect()
}

fn gain_reduction_input(x: &[f64], comp: &CompParams, mode: CompMode) -> Vec<f64> {
    x.iter()
        .map(|&s| {
            let xd = level_db(s);
            xd - gain_computer_scalar(xd, comp.threshold_db, comp.ratio, comp.knee_db, mode)
        })
        .collect()
}

fn apply_gain(x: &AudioBuffer, y_l: &[f64], makeup_db: f64) -> AudioBuffer {
    let makeup = 10f64.powf(makeup_db / 20.0);
    let k = -LN_10 / 20.0;
    AudioBuffer::from_parts(
        x.samples()
            .iter()
            .zip(y_l)
            .map(|(s, yl)| s * (k * yl).exp() * makeup)
            .collect(),
        x.sample_rate(),
    )
}

/// Smoothed gain reduction `y_L` of the reference (branching) compressor.
pub fn gain_reduction_reference(x: &AudioBuffer, comp: &CompParams, mode: CompMode) -> Vec<f64> {
    let fs = x.sample_rate() as f64;
    let x_l = gain_reduction_input(x.samples(), comp, mode);
    smooth_branching(&x_l, time_constant(comp.attack_s, fs), time_constant(comp.release_s, fs))
}

/// Smoothed gain reduction `y_L` of the differentiable compressor.
pub fn gain_reduction_diff(x: &AudioBuffer, comp: &CompParams) -> Vec<f64> {
    let fs = x.sample_rate() as f64;
    let x_l = AudioBuffer::from_parts(
        gain_reduction_input(x.samples(), comp, CompMode::Compress),
        x.sample_rate(),
    );
    let alpha = diff_time_constant(comp.attack_s, comp.release_s, fs);
    fir_filter_freq(&x_l, |n| one_pole_response(alpha, n)).into_samples()
}

pub fn compressor_reference(x: &AudioBuffer, comp: &CompParams) -> AudioBuffer {
    compressor_reference_mode(x, comp, CompMode::Compress)
}

/// Reference ballistics in either compression or expansion mode.
pub fn compressor_reference_mode(x: &AudioBuffer, comp: &CompParams, mode: CompMode) -> AudioBuffer {
    let y_l = gain_reduction_reference(x, comp, mode);
    apply_gain(x, &y_l, comp.makeup_db)
}

pub fn compressor_diff(x: &AudioBuffer, comp: &CompParams) -> AudioBuffer {
    let y_l = gain_reduction_diff(x, comp);
    apply_gain(x, &y_l, comp.makeup_db)
}
