//! Self-supervised training pairs and the realistic style presets.
//!
//! A segment is augmented, peak-normalized and split in half. One half is
//! corrupted by a random EQ and expander to give the input; both raw halves
//! are then processed by one random chain, giving the reference (other half)
//! and the target (input's half).

use std::fmt;
use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::audio::{read_wav, AudioBuffer, Resampler};
use crate::effects::{
    apply_eq_td, compressor_reference_mode, denormalize, process_chain, CompMode, CompParams,
    EffectParams, EqParams, NormalizedParams, Path as ChainPath, NUM_PARAMS, PARAM_SPECS,
};
use crate::error::{Error, Result};

/// About ten seconds at 24 kHz.
pub const SEGMENT_LEN: usize = 262_144;
/// Segments whose mean energy is at or below this are rejected.
pub const ENERGY_THRESHOLD: f64 = 0.001;
pub const ATTEMPTS_PER_FILE: usize = 100;
pub const TOTAL_ATTEMPTS: usize = 1000;
pub const PEAK_DBFS: f64 = -12.0;
const SEMITONE_RANGE: f64 = 2.0;
const STRETCH_RANGE: (f64, f64) = (0.9, 1.1);
const GRAIN_S: f64 = 0.05;
const INPUT_EQ_GAIN_DB: f64 = 12.0;
const EXPANDER_THRESHOLD_DB: (f64, f64) = (-40.0, -10.0);
const EXPANDER_RATIO: (f64, f64) = (1.0, 2.0);

fn mean_energy(x: &[f64]) -> f64 {
    if x.is_empty() {
        0.0
    } else {
        x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64
    }
}

/// Where a segment came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SegmentOrigin {
    pub file_index: usize,
    pub offset: usize,
}

/// Draw a non-silent segment from in-memory recordings. Files shorter than
/// `length` are zero-padded.
pub fn sample_segment_from(corpus: &[AudioBuffer], length: usize, seed: u64) -> Result<AudioBuffer> {
    sample_segment_origin(corpus, length, seed).map(|(seg, _)| seg)
}

/// As [`sample_segment_from`], also reporting the file and offset used.
pub fn sample_segment_origin(
    corpus: &[AudioBuffer],
    length: usize,
    seed: u64,
) -> Result<(AudioBuffer, SegmentOrigin)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sample_with(corpus.len(), length, &mut rng, |i| Ok(corpus[i].clone()))
}

/// Draw a non-silent segment from WAV files. A random file is chosen, then
/// random offsets within it until one passes the energy test; after 100
/// failures another file is drawn, up to 1000 attempts overall.
pub fn sample_segment(corpus: &[PathBuf], length: usize, seed: u64) -> Result<AudioBuffer> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sample_with(corpus.len(), length, &mut rng, |i| read_wav(&corpus[i])).map(|(seg, _)| seg)
}

fn sample_with<F>(
    n_files: usize,
    length: usize,
    rng: &mut ChaCha8Rng,
    mut load: F,
) -> Result<(AudioBuffer, SegmentOrigin)>
where
    F: FnMut(usize) -> Result<AudioBuffer>,
{
    if n_files == 0 {
        return Err(Error::Empty);
    }
    if length == 0 {
        return Err(Error::InvalidParam("segment length 0".into()));
    }
    let mut attempts = 0;
    while attempts < TOTAL_ATTEMPTS {
        let file_index = rng.random_range(0..n_files);
        let file = load(file_index)?;
        for _ in 0..ATTEMPTS_PER_FILE.min(TOTAL_ATTEMPTS - attempts) {
            attempts += 1;
            let max_off = file.len().saturating_sub(length);
            let offset = rng.random_range(0..=max_off);
            let seg = file.slice(offset, (offset + length).min(file.len())).fit_to(length);
            if mean_energy(seg.samples()) > ENERGY_THRESHOLD {
                return Ok((seg, SegmentOrigin { file_index, offset }));
            }
        }
    }
    Err(Error::NoSegment(TOTAL_ATTEMPTS))
}

/// Scale so the largest absolute sample is `10^(target_dbfs / 20)`.
pub fn peak_normalize(x: &AudioBuffer, target_dbfs: f64) -> Result<AudioBuffer> {
    let peak = x.peak();
    if peak == 0.0 {
        return Err(Error::Silent);
    }
    Ok(x.scaled(10f64.powf(target_dbfs / 20.0) / peak))
}

/// Overlap-add of 50 ms Hann grains read at `1 / factor` speed, giving
/// `round(len * factor)` samples.
pub fn time_stretch(x: &AudioBuffer, factor: f64) -> AudioBuffer {
    let fs = x.sample_rate();
    let grain = ((GRAIN_S * fs as f64).round() as usize).max(4) & !1;
    let hop_out = grain / 2;
    let hop_in = hop_out as f64 / factor;
    let out_len = (x.len() as f64 * factor).round() as usize;
    let win: Vec<f64> = (0..grain)
        .map(|i| 0.5 - 0.5 * (2.0 * std::f64::consts::PI * i as f64 / grain as f64).cos())
        .collect();
    let s = x.samples();
    let mut out = vec![0.0; out_len + grain];
    let mut norm = vec![0.0; out_len + grain];
    let mut j = 0usize;
    while j * hop_out < out_len {
        let start_in = (j as f64 * hop_in).round() as usize;
        let start_out = j * hop_out;
        for i in 0..grain {
            let v = s.get(start_in + i).copied().unwrap_or(0.0);
            out[start_out + i] += v * win[i];
            norm[start_out + i] += win[i];
        }
        j += 1;
    }
    out.truncate(out_len);
    for (o, w) in out.iter_mut().zip(&norm) {
        if *w > 1e-3 {
            *o /= w;
        }
    }
    AudioBuffer::from_parts(out, fs)
}

/// Pitch shift by `semitones` and time stretch by `stretch`, then trim or
/// zero-pad back to the input length. The identity setting returns the
/// input unchanged.
pub fn augment_with(x: &AudioBuffer, semitones: f64, stretch: f64) -> Result<AudioBuffer> {
    if semitones == 0.0 && stretch == 1.0 {
        return Ok(x.clone());
    }
    let r = 2f64.powf(semitones / 12.0);
    // resampling to len / r raises the pitch by r when played at the same rate
    let down = (1000.0 * r).round() as u64;
    let res = Resampler::new(1000, down)?;
    let n_res = ((x.len() as f64) * 1000.0 / down as f64).round() as usize;
    let shifted = AudioBuffer::from_parts(res.process(x.samples(), n_res), x.sample_rate());
    let factor = stretch * x.len() as f64 / n_res.max(1) as f64;
    Ok(time_stretch(&shifted, factor).fit_to(x.len()))
}

/// Random pitch shift within +-2 semitones and stretch within [0.9, 1.1].
pub fn augment(x: &AudioBuffer, seed: u64) -> Result<AudioBuffer> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let semitones = rng.random_range(-SEMITONE_RANGE..=SEMITONE_RANGE);
    let stretch = rng.random_range(STRETCH_RANGE.0..=STRETCH_RANGE.1);
    augment_with(x, semitones, stretch)
}

fn random_normalized(rng: &mut ChaCha8Rng) -> NormalizedParams {
    let mut v = [0.0; NUM_PARAMS];
    for x in v.iter_mut() {
        *x = rng.random_range(0.0..=1.0);
    }
    NormalizedParams::clamped(v)
}

/// Random EQ with band gains limited to +-12 dB.
fn random_input_eq(rng: &mut ChaCha8Rng) -> EqParams {
    let mut eq = denormalize(&random_normalized(rng)).eq;
    let mut g = || rng.random_range(-INPUT_EQ_GAIN_DB..=INPUT_EQ_GAIN_DB);
    eq.low_shelf.gain_db = g();
    for p in eq.peaks.iter_mut() {
        p.gain_db = g();
    }
    eq.high_shelf.gain_db = g();
    eq
}

/// Hard-knee downward expander settings.
fn random_expander(rng: &mut ChaCha8Rng) -> CompParams {
    let base = denormalize(&random_normalized(rng)).comp;
    CompParams {
        threshold_db: rng.random_range(EXPANDER_THRESHOLD_DB.0..=EXPANDER_THRESHOLD_DB.1),
        ratio: rng.random_range(EXPANDER_RATIO.0..=EXPANDER_RATIO.1),
        attack_s: base.attack_s,
        release_s: base.release_s,
        knee_db: 0.0,
        makeup_db: 0.0,
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StylePair {
    pub input: AudioBuffer,
    pub reference: AudioBuffer,
    pub target: AudioBuffer,
    pub truth_params: EffectParams,
    /// The uncorrupted half the target was rendered from.
    pub source_half: AudioBuffer,
    /// True when the input comes from the first half of the segment.
    pub input_first_half: bool,
    pub seed: u64,
}

/// Build an (input, reference, target) triple from one recording.
pub fn make_pair(x: &AudioBuffer, seed: u64) -> Result<StylePair> {
    let min_len = 2 * x.sample_rate() as usize;
    if x.len() < min_len || x.len() % 2 != 0 {
        return Err(Error::InvalidParam(format!(
            "pair source needs an even length of at least {min_len} samples, got {}",
            x.len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let aug_seed = rng.random::<u64>();
    let src = peak_normalize(&augment(x, aug_seed)?, PEAK_DBFS)?;
    let half = x.len() / 2;
    let (a, b) = (src.slice(0, half), src.slice(half, x.len()));
    let input_first_half = rng.random::<bool>();
    let (own, other) = if input_first_half { (a, b) } else { (b, a) };

    let truth_params = denormalize(&random_normalized(&mut rng));
    let eq = random_input_eq(&mut rng);
    let exp = random_expander(&mut rng);
    let corrupted = compressor_reference_mode(&apply_eq_td(&own, &eq), &exp, CompMode::Expand);
    let input = peak_normalize(&corrupted, PEAK_DBFS)?;
    let reference = process_chain(&other, &truth_params, ChainPath::Reference);
    let target = process_chain(&own, &truth_params, ChainPath::Reference);
    Ok(StylePair {
        input,
        reference,
        target,
        truth_params,
        source_half: own,
        input_first_half,
        seed,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum StyleName {
    Telephone,
    Warm,
    Bright,
    Neutral,
    Broadcast,
}

impl StyleName {
    pub const ALL: [StyleName; 5] = [
        StyleName::Telephone,
        StyleName::Warm,
        StyleName::Bright,
        StyleName::Neutral,
        StyleName::Broadcast,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            StyleName::Telephone => "telephone",
            StyleName::Warm => "warm",
            StyleName::Bright => "bright",
            StyleName::Neutral => "neutral",
            StyleName::Broadcast => "broadcast",
        }
    }
}

impl fmt::Display for StyleName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for StyleName {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        StyleName::ALL
            .into_iter()
            .find(|n| n.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidParam(format!("unknown style '{s}'")))
    }
}

/// Per-parameter `(lo, hi)` bounds in physical units, vector layout order.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StylePreset {
    pub name: StyleName,
    pub ranges: [(f64, f64); NUM_PARAMS],
}

/// Index of the peaking band the presets drive.
const PRESET_PEAK: usize = 1;

impl StylePreset {
    pub fn new(name: StyleName) -> Self {
        type R = (f64, f64);
        let fixed = |v: f64| (v, v);
        // (ls gain, ls freq, peak gain, peak freq, hs gain, hs freq, threshold, ratio, attack, release)
        let rows: [R; 10] = match name {
            StyleName::Telephone => [
                (-26.0, -20.0),
                (200.0, 400.0),
                (12.0, 16.0),
                (1000.0, 2000.0),
                (-26.0, -20.0),
                (4000.0, 6000.0),
                (-30.0, -10.0),
                (1.5, 3.0),
                (0.001, 0.006),
                (0.010, 0.020),
            ],
            StyleName::Warm => [
                (20.0, 26.0),
                (200.0, 400.0),
                fixed(0.0),
                fixed(1000.0),
                (-26.0, -20.0),
                (8000.0, 10000.0),
                fixed(0.0),
                fixed(1.0),
                fixed(0.050),
                fixed(0.100),
            ],
            StyleName::Bright => [
                (-26.0, -20.0),
                (200.0, 400.0),
                fixed(0.0),
                fixed(1000.0),
                (20.0, 26.0),
                (8000.0, 10000.0),
                fixed(0.0),
                fixed(1.0),
                fixed(0.050),
                fixed(0.100),
            ],
            StyleName::Neutral => [
                (1.0, 3.0),
                (80.0, 200.0),
                fixed(0.0),
                fixed(1000.0),
                (1.0, 3.0),
                (6000.0, 8000.0),
                (-30.0, -20.0),
                (1.5, 2.0),
                (0.005, 0.025),
                (0.020, 0.025),
            ],
            StyleName::Broadcast => [
                (2.0, 6.0),
                (80.0, 200.0),
                fixed(0.0),
                fixed(1000.0),
                (2.0, 6.0),
                (6000.0, 8000.0),
                (-50.0, -40.0),
                (4.0, 6.0),
                (0.001, 0.005),
                (0.020, 0.025),
            ],
        };
        let mut ranges = [(0.0, 0.0); NUM_PARAMS];
        ranges[0] = rows[0];
        ranges[1] = rows[1];
        let idle_centers = [250.0, 1000.0, 2500.0, 6000.0];
        for b in 0..4 {
            ranges[2 + 3 * b] = fixed(0.0);
            ranges[3 + 3 * b] = fixed(idle_centers[b]);
            ranges[4 + 3 * b] = fixed(0.707);
        }
        ranges[2 + 3 * PRESET_PEAK] = rows[2];
        ranges[3 + 3 * PRESET_PEAK] = rows[3];
        ranges[14] = rows[4];
        ranges[15] = rows[5];
        ranges[16] = rows[6];
        ranges[17] = rows[7];
        ranges[18] = rows[8];
        ranges[19] = rows[9];
        ranges[20] = fixed(6.0);
        ranges[21] = fixed(0.0);
        StylePreset { name, ranges }
    }

    pub fn all() -> [StylePreset; 5] {
        StyleName::ALL.map(StylePreset::new)
    }

    pub fn validate(&self) -> Result<()> {
        for (i, &(lo, hi)) in self.ranges.iter().enumerate() {
            let spec = &PARAM_SPECS[i];
            if lo > hi || !spec.contains(lo) || !spec.contains(hi) {
                return Err(Error::InvalidParam(format!(
                    "{} preset range for {} is [{lo}, {hi}]",
                    self.name, spec.name
                )));
            }
        }
        Ok(())
    }

    /// Uniform draw from every range.
    pub fn sample(&self, rng: &mut impl Rng) -> EffectParams {
        let mut v = [0.0; NUM_PARAMS];
        for (x, &(lo, hi)) in v.iter_mut().zip(&self.ranges) {
            *x = if lo == hi { lo } else { rng.random_range(lo..=hi) };
        }
        EffectParams::from_vector(&v)
    }
}

/// Render `x` through a random draw of `preset` on the reference path.
pub fn render_style(x: &AudioBuffer, preset: &StylePreset, seed: u64) -> Result<(AudioBuffer, EffectParams)> {
    preset.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let p = preset.sample(&mut rng);
    Ok((process_chain(x, &p, ChainPath::Reference), p))
}

/// One line of a dataset manifest. Paths are relative to the manifest.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairRecord {
    pub source: String,
    /// Sample offset of the segment within `source`.
    pub offset: usize,
    pub seed: u64,
    pub truth_params: EffectParams,
    pub input: String,
    pub reference: String,
    pub target: String,
}

pub fn write_manifest<W: Write>(mut w: W, records: &[PairRecord]) -> Result<()> {
    for r in records {
        serde_json::to_writer(&mut w, r).map_err(|e| Error::InvalidParam(e.to_string()))?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_manifest<R: BufRead>(r: R) -> Result<Vec<PairRecord>> {
    let mut out = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(
            serde_json::from_str(&line)
                .map_err(|e| Error::InvalidParam(format!("manifest line {}: {e}", i + 1)))?,
        );
    }
    Ok(out)
}

/// Resolve a manifest path against the manifest's directory.
pub fn resolve(manifest: &Path, rel: &str) -> PathBuf {
    manifest.parent().unwrap_or(Path::new(".")).join(rel)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::audio::stft;
    use crate::effects::EffectParams;
    use crate::objective::{loudness_crest, metric_lufs, spectral_centroid};
    use std::f64::consts::PI;

    fn noise(n: usize, seed: u64, amp: f64) -> AudioBuffer {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        AudioBuffer::new((0..n).map(|_| rng.random_range(-amp..amp)).collect(), 24000).unwrap()
    }

    /// Harmonic tone with a syllable-rate envelope.
    fn voiced(n: usize, seed: u64) -> AudioBuffer {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f0 = rng.random_range(100.0..200.0);
        let fs = 24000.0;
        let x = (0..n)
            .map(|i| {
                let t = i as f64 / fs;
                let env = (0.5 + 0.5 * (2.0 * PI * 4.0 * t).sin()).powi(2);
                let s: f64 = (1..20)
                    .map(|h| (2.0 * PI * f0 * h as f64 * t).sin() / h as f64)
                    .sum();
                0.3 * env * s + rng.random_range(-0.01..0.01)
            })
            .collect();
        AudioBuffer::new(x, 24000).unwrap()
    }

    fn dominant_hz(x: &AudioBuffer) -> f64 {
        let spec = stft(x, 8192, 4096).unwrap();
        let mut acc = vec![0.0; spec.num_bins()];
        for f in &spec.frames {
            for (a, c) in acc.iter_mut().zip(f) {
                *a += c.norm();
            }
        }
        let k = acc.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).unwrap().0;
        spec.bin_hz(k)
    }

    #[test]
    fn segment_sampling() {
        let silent = vec![AudioBuffer::zeros(50000, 24000); 2];
        assert!(matches!(sample_segment_from(&silent, 1000, 1), Err(Error::NoSegment(_))));
        let loud = vec![noise(50000, 2, 1.0)];
        let s = sample_segment_from(&loud, 1000, 1).unwrap();
        assert_eq!(s.len(), 1000);
        let dc = |e: f64| vec![AudioBuffer::new(vec![e.sqrt(); 3000], 24000).unwrap()];
        assert!(sample_segment_from(&dc(0.9 * ENERGY_THRESHOLD), 1000, 3).is_err());
        assert!(sample_segment_from(&dc(1.1 * ENERGY_THRESHOLD), 1000, 3).is_ok());
        assert!(sample_segment_from(&[], 1000, 3).is_err());
        assert_eq!(
            sample_segment_from(&loud, 1000, 9).unwrap(),
            sample_segment_from(&loud, 1000, 9).unwrap()
        );
    }

    #[test]
    fn segment_from_files() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("a.wav");
        crate::audio::write_wav(&noise(30000, 4, 0.5), &p, crate::audio::WavFormat::Float32).unwrap();
        let s = sample_segment(&[p], 5000, 0).unwrap();
        assert_eq!(s.len(), 5000);
        assert!(sample_segment(&[dir.path().join("missing.wav")], 10, 0).is_err());
    }

    #[test]
    fn peak_normalize_examples() {
        let x = AudioBuffer::new(vec![0.9, -0.3, 0.1], 24000).unwrap();
        let y = peak_normalize(&x, -12.0).unwrap();
        assert!((y.peak() - 0.251188643150958).abs() < 1e-9);
        let z = peak_normalize(&y, -12.0).unwrap();
        for (a, b) in y.samples().iter().zip(z.samples()) {
            assert!((a - b).abs() < 1e-9);
        }
        assert!(peak_normalize(&AudioBuffer::zeros(10, 24000), -12.0).is_err());
    }

    #[test]
    fn augment_examples() {
        let x = voiced(24000, 1);
        assert_eq!(augment_with(&x, 0.0, 1.0).unwrap(), x);
        let sine = AudioBuffer::new(
            (0..48000).map(|i| 0.5 * (2.0 * PI * 440.0 * i as f64 / 24000.0).sin()).collect(),
            24000,
        )
        .unwrap();
        let up = augment_with(&sine, 12.0, 1.0).unwrap();
        let f = dominant_hz(&up);
        assert!((f - 880.0).abs() < 0.02 * 880.0, "{f}");
        for s in 0..20 {
            assert_eq!(augment(&x, s).unwrap().len(), x.len());
        }
        let st = time_stretch(&sine, 1.1);
        assert_eq!(st.len(), 52800);
        assert!((dominant_hz(&st) - 440.0).abs() < 0.02 * 440.0);
    }

    #[test]
    fn pair_shape_and_determinism() {
        let x = voiced(48000, 5);
        let p = make_pair(&x, 3).unwrap();
        assert_eq!(p.input.len(), 24000);
        assert_eq!(p.reference.len(), 24000);
        assert_eq!(p.target.len(), 24000);
        assert!((p.input.peak() - 10f64.powf(-0.6)).abs() < 1e-9);
        assert_eq!(make_pair(&x, 3).unwrap(), p);
        assert_ne!(make_pair(&x, 4).unwrap().truth_params, p.truth_params);
        p.truth_params.validate().unwrap();
        assert!(make_pair(&x.slice(0, 47999), 3).is_err());
        assert!(make_pair(&x.slice(0, 40000), 3).is_err());
    }

    #[test]
    fn target_matches_rendered_half() {
        let x = voiced(48000, 6);
        let p = make_pair(&x, 8).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let aug_seed = rng.random::<u64>();
        let src = peak_normalize(&augment(&x, aug_seed).unwrap(), PEAK_DBFS).unwrap();
        let half = if p.input_first_half { src.slice(0, 24000) } else { src.slice(24000, 48000) };
        assert_eq!(half, p.source_half);
        assert_eq!(process_chain(&half, &p.truth_params, ChainPath::Reference), p.target);
    }

    #[test]
    fn target_is_closer_in_loudness_than_input() {
        let (mut dt, mut di) = (0.0, 0.0);
        let mut n = 0;
        for s in 0..100 {
            let x = voiced(48000, 100 + s);
            let p = make_pair(&x, s).unwrap();
            if let (Ok(t), Ok(i)) = (metric_lufs(&p.target, &p.reference), metric_lufs(&p.input, &p.reference)) {
                dt += t;
                di += i;
                n += 1;
            }
        }
        assert!(n > 90);
        assert!(dt / (n as f64) < di / (n as f64), "{dt} {di}");
    }

    #[test]
    fn presets_follow_table() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for preset in StylePreset::all() {
            preset.validate().unwrap();
            for _ in 0..10000 {
                let p = preset.sample(&mut rng);
                p.validate().unwrap();
                assert_eq!(p.comp.knee_db, 6.0);
                assert_eq!(p.comp.makeup_db, 0.0);
                match preset.name {
                    StyleName::Telephone => {
                        assert!((-26.0..=-20.0).contains(&p.eq.low_shelf.gain_db));
                        let pk = p.eq.peaks[PRESET_PEAK];
                        assert!((12.0..=16.0).contains(&pk.gain_db));
                        assert!((1000.0..=2000.0).contains(&pk.center_hz));
                    }
                    StyleName::Broadcast => {
                        assert!((4.0..=6.0).contains(&p.comp.ratio));
                        assert!((-50.0..=-40.0).contains(&p.comp.threshold_db));
                    }
                    StyleName::Warm => assert_eq!(p.comp.ratio, 1.0),
                    _ => {}
                }
            }
        }
        for _ in 0..10000 {
            denormalize(&random_normalized(&mut rng)).validate().unwrap();
            let eq = random_input_eq(&mut rng);
            EffectParams { eq, comp: random_expander(&mut rng) }.validate().unwrap();
        }
        assert_eq!("Broadcast".parse::<StyleName>().unwrap(), StyleName::Broadcast);
        assert!("loud".parse::<StyleName>().is_err());
    }

    #[test]
    fn presets_are_distinguishable() {
        // phrases at 0, -6 and -12 dB
        let v = voiced(96000, 9);
        let phrased: Vec<f64> = v
            .samples()
            .iter()
            .enumerate()
            .map(|(i, s)| s * 10f64.powf(-0.3 * ((i / 12000) % 3) as f64))
            .collect();
        let x = peak_normalize(&AudioBuffer::new(phrased, 24000).unwrap(), PEAK_DBFS).unwrap();
        let mean = |name: StyleName, f: &dyn Fn(&AudioBuffer) -> f64| {
            let preset = StylePreset::new(name);
            (0..50)
                .map(|s| f(&render_style(&x, &preset, s).unwrap().0))
                .sum::<f64>()
                / 50.0
        };
        let (tel, bri) = (mean(StyleName::Telephone, &spectral_centroid), mean(StyleName::Bright, &spectral_centroid));
        assert!(tel < bri, "{tel} {bri}");
        let crest = |y: &AudioBuffer| loudness_crest(y).unwrap();
        let (bc, wa) = (mean(StyleName::Broadcast, &crest), mean(StyleName::Warm, &crest));
        assert!(bc < wa, "{bc} {wa}");
    }

    #[test]
    fn manifest_roundtrip() {
        let rec = PairRecord {
            source: "a.wav".into(),
            offset: 12,
            seed: 7,
            truth_params: EffectParams::neutral(),
            input: "pair_0000_input.wav".into(),
            reference: "pair_0000_reference.wav".into(),
            target: "pair_0000_target.wav".into(),
        };
        let mut buf = Vec::new();
        write_manifest(&mut buf, &[rec.clone(), rec.clone()]).unwrap();
        assert_eq!(String::from_utf8(buf.clone()).unwrap().lines().count(), 2);
        assert_eq!(read_manifest(&buf[..]).unwrap(), vec![rec.clone(), rec]);
        assert!(read_manifest(&b"{not json}\n"[..]).is_err());
        assert_eq!(resolve(Path::new("/d/m.jsonl"), "x.wav"), PathBuf::from("/d/x.wav"));
    }
}
