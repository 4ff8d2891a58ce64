//! Integrated loudness per ITU-R BS.1770.

use std::f64::consts::PI;

use crate::audio::AudioBuffer;
use crate::effects::BiquadCoeffs;
use crate::error::{Error, Result};

pub const ABSOLUTE_GATE_LUFS: f64 = -70.0;
const RELATIVE_GATE_LU: f64 = -10.0;
const OFFSET: f64 = -0.691;
const BLOCK_S: f64 = 0.4;
const STEP_S: f64 = 0.1;
/// Channel weight for a mono signal played on both loudspeakers of a stereo
/// pair. With it a full-scale-referenced sine at -18 dBFS reads -18 LUFS.
const DUAL_MONO_WEIGHT: f64 = 2.0;

/// K-weighting at `fs`: high-shelf pre-filter and RLB high-pass, derived
/// from the analog prototypes by the bilinear transform.
pub fn k_weighting(fs: f64) -> [BiquadCoeffs; 2] {
    let f0 = 1681.974450955533;
    let g = 3.999843853973347;
    let q = 0.7071752369554196;
    let k = (PI * f0 / fs).tan();
    let vh = 10f64.powf(g / 20.0);
    let vb = vh.powf(0.4996667741545416);
    let a0 = 1.0 + k / q + k * k;
    let pre = BiquadCoeffs {
        b: [
            (vh + vb * k / q + k * k) / a0,
            2.0 * (k * k - vh) / a0,
            (vh - vb * k / q + k * k) / a0,
        ],
        a: [1.0, 2.0 * (k * k - 1.0) / a0, (1.0 - k / q + k * k) / a0],
    };

    let f0 = 38.13547087602444;
    let q = 0.5003270373238773;
    let k = (PI * f0 / fs).tan();
    let a0 = 1.0 + k / q + k * k;
    let rlb = BiquadCoeffs {
        b: [1.0, -2.0, 1.0],
        a: [1.0, 2.0 * (k * k - 1.0) / a0, (1.0 - k / q + k * k) / a0],
    };
    [pre, rlb]
}

fn block_loudness(mean_square: f64) -> f64 {
    OFFSET + 10.0 * (DUAL_MONO_WEIGHT * mean_square).log10()
}

/// K-weighted mean square of each 400 ms block, stepped by 100 ms.
fn block_powers(x: &AudioBuffer) -> Vec<f64> {
    let fs = x.sample_rate() as f64;
    let block = (BLOCK_S * fs).round() as usize;
    let step = (STEP_S * fs).round() as usize;
    if x.len() < block || block == 0 {
        return Vec::new();
    }
    let mut y = x.samples().to_vec();
    for c in k_weighting(fs) {
        crate::effects::biquad_in_place(&mut y, &c);
    }
    let sq: Vec<f64> = y.iter().map(|v| v * v).collect();
    let n_blocks = (x.len() - block) / step + 1;
    (0..n_blocks)
        .map(|j| sq[j * step..j * step + block].iter().sum::<f64>() / block as f64)
        .collect()
}

/// Ungated loudness of each 400 ms block in LUFS (silent blocks give -inf).
pub fn momentary_loudness(x: &AudioBuffer) -> Vec<f64> {
    block_powers(x)
        .into_iter()
        .map(|m| if m > 0.0 { block_loudness(m) } else { f64::NEG_INFINITY })
        .collect()
}

/// Gated integrated loudness in LUFS; `None` when the signal is shorter than
/// one block or every block falls under the gates.
pub fn lufs_integrated(x: &AudioBuffer) -> Option<f64> {
    let z = block_powers(x);
    let above_abs: Vec<f64> = z
        .iter()
        .copied()
        .filter(|&m| m > 0.0 && block_loudness(m) > ABSOLUTE_GATE_LUFS)
        .collect();
    if above_abs.is_empty() {
        return None;
    }
    let rel_gate =
        block_loudness(above_abs.iter().sum::<f64>() / above_abs.len() as f64) + RELATIVE_GATE_LU;
    let gated: Vec<f64> = above_abs
        .into_iter()
        .filter(|&m| block_loudness(m) > rel_gate)
        .collect();
    if gated.is_empty() {
        return None;
    }
    Some(block_loudness(gated.iter().sum::<f64>() / gated.len() as f64))
}

/// Loudest momentary block minus integrated loudness, in LU.
pub fn loudness_crest(x: &AudioBuffer) -> Option<f64> {
    let peak = momentary_loudness(x).into_iter().fold(f64::NEG_INFINITY, f64::max);
    lufs_integrated(x).map(|l| peak - l)
}

/// Absolute loudness difference in LU.
pub fn metric_lufs(a: &AudioBuffer, b: &AudioBuffer) -> Result<f64> {
    let la = lufs_integrated(a).ok_or(Error::Unmeasurable)?;
    let lb = lufs_integrated(b).ok_or(Error::Unmeasurable)?;
    Ok((la - lb).abs())
}
