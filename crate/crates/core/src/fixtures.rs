//! Deterministic synthetic recordings for tests, benches and the gradient
//! check.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::audio::AudioBuffer;
use crate::effects::{biquad_in_place, BiquadCoeffs};

/// Uniform white noise in `[-amp, amp)`.
pub fn white_noise(len: usize, fs: u32, amp: f64, seed: u64) -> AudioBuffer {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    AudioBuffer::from_parts((0..len).map(|_| rng.random_range(-amp..amp)).collect(), fs)
}

pub fn sine(freq: f64, amp: f64, len: usize, fs: u32) -> AudioBuffer {
    AudioBuffer::from_parts(
        (0..len)
            .map(|i| amp * (2.0 * PI * freq * i as f64 / fs as f64).sin())
            .collect(),
        fs,
    )
}

/// First three formants (Hz) of a few vowels.
const VOWELS: [[f64; 3]; 5] = [
    [730.0, 1090.0, 2440.0],
    [270.0, 2290.0, 3010.0],
    [570.0, 840.0, 2410.0],
    [300.0, 870.0, 2240.0],
    [530.0, 1840.0, 2480.0],
];

fn bandpass(f: f64, q: f64, fs: f64) -> BiquadCoeffs {
    let w0 = 2.0 * PI * f / fs;
    let alpha = w0.sin() / (2.0 * q);
    let a0 = 1.0 + alpha;
    BiquadCoeffs {
        b: [alpha / a0, 0.0, -alpha / a0],
        a: [1.0, -2.0 * w0.cos() / a0, (1.0 - alpha) / a0],
    }
}

fn highpass(f: f64, fs: f64) -> BiquadCoeffs {
    let w0 = 2.0 * PI * f / fs;
    let alpha = w0.sin() / (2.0 * std::f64::consts::FRAC_1_SQRT_2);
    let (a0, c) = (1.0 + alpha, w0.cos());
    BiquadCoeffs {
        b: [(1.0 + c) / 2.0 / a0, -(1.0 + c) / a0, (1.0 + c) / 2.0 / a0],
        a: [1.0, -2.0 * c / a0, (1.0 - alpha) / a0],
    }
}

/// Speech-like signal: a band-limited glottal pulse train with a wandering
/// pitch, shaped by per-syllable formant resonators, with fricative noise
/// bursts and short pauses. Peak is normalized to 0.5.
pub fn speech_like(len: usize, fs: u32, seed: u64) -> AudioBuffer {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let fsf = fs as f64;
    let base_f0 = rng.random_range(95.0..210.0);
    let mut out = vec![0.0; len];
    let mut pos = 0usize;
    let mut phase = 0.0f64;
    while pos < len {
        let syl = ((rng.random_range(0.12..0.32) * fsf) as usize).min(len - pos);
        let gap = (rng.random_range(0.02..0.15) * fsf) as usize;
        let level = 10f64.powf(rng.random_range(-12.0..0.0) / 20.0);
        let vowel = VOWELS[rng.random_range(0..VOWELS.len())];
        let glide = rng.random_range(-0.25..0.25);
        let mut voiced = vec![0.0; syl];
        let n_harm = ((0.45 * fsf) / (base_f0 * 1.3)) as usize;
        for (i, v) in voiced.iter_mut().enumerate() {
            let t = i as f64 / syl as f64;
            let f0 = base_f0 * (1.0 + glide * (t - 0.5)) * (1.0 + 0.03 * (2.0 * PI * 5.0 * t).sin());
            phase += 2.0 * PI * f0 / fsf;
            if phase > 2.0 * PI {
                phase -= 2.0 * PI;
            }
            let s: f64 = (1..=n_harm)
                .map(|h| (h as f64 * phase).sin() / (h * h) as f64)
                .sum();
            let env = (PI * t).sin().powf(0.6);
            *v = s * env * level;
        }
        let mut shaped = vec![0.0; syl];
        for (k, &f) in vowel.iter().enumerate() {
            let bp = bandpass(f.min(0.45 * fsf), [6.0, 8.0, 10.0][k], fsf);
            let mut y = voiced.clone();
            biquad_in_place(&mut y, &bp);
            let gain = [1.0, 0.6, 0.3][k];
            for (o, v) in shaped.iter_mut().zip(&y) {
                *o += gain * v;
            }
        }
        for (o, s) in out[pos..pos + syl].iter_mut().zip(&shaped) {
            *o += s;
        }
        pos += syl;
        // fricative burst into the gap
        if rng.random_bool(0.4) && pos < len {
            let n = (gap.max(1)).min(len - pos);
            let mut burst: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            let hpf = highpass((0.25 * fsf).min(5000.0), fsf);
            biquad_in_place(&mut burst, &hpf);
            let amp = 0.05 * level;
            for (i, (o, b)) in out[pos..pos + n].iter_mut().zip(&burst).enumerate() {
                *o += amp * b * (PI * i as f64 / n as f64).sin();
            }
        }
        pos += gap;
    }
    // low-level room noise keeps pauses from being digital silence
    for o in out.iter_mut() {
        *o += rng.random_range(-1e-4..1e-4);
    }
    let peak = out.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if peak > 0.0 {
        for o in out.iter_mut() {
            *o *= 0.5 / peak;
        }
    }
    AudioBuffer::from_parts(out, fs)
}
