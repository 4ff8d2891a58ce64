//! Mono signal container, WAV persistence, resampling and STFT analysis.

use std::f64::consts::PI;
use std::path::Path;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fft;

/// Mono audio at a fixed sample rate. Samples are full-scale ±1.0 and always
/// finite.
#[derive(Clone, Debug, PartialEq)]
pub struct AudioBuffer {
    samples: Vec<f64>,
    sample_rate: u32,
}

impl AudioBuffer {
    pub fn new(samples: Vec<f64>, sample_rate: u32) -> Result<Self> {
        if sample_rate == 0 {
            return Err(Error::InvalidRate(sample_rate));
        }
        if let Some(i) = samples.iter().position(|s| !s.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        Ok(Self {
            samples,
            sample_rate,
        })
    }

    pub fn zeros(len: usize, sample_rate: u32) -> Self {
        assert!(sample_rate > 0);
        Self {
            samples: vec![0.0; len],
            sample_rate,
        }
    }

    /// Internal constructor for results of already-validated arithmetic.
    pub(crate) fn from_parts(samples: Vec<f64>, sample_rate: u32) -> Self {
        debug_assert!(samples.iter().all(|s| s.is_finite()));
        Self {
            samples,
            sample_rate,
        }
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_s(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate as f64
    }

    pub fn peak(&self) -> f64 {
        self.samples.iter().fold(0.0, |m, s| m.max(s.abs()))
    }

    pub fn rms(&self) -> f64 {
        if self.samples.is_empty() {
            return 0.0;
        }
        (self.samples.iter().map(|s| s * s).sum::<f64>() / self.samples.len() as f64).sqrt()
    }

    /// Multiply every sample by `k`.
    pub fn scaled(&self, k: f64) -> Self {
        Self::from_parts(self.samples.iter().map(|s| s * k).collect(), self.sample_rate)
    }

    /// Samples `[start, end)` as a new buffer.
    pub fn slice(&self, start: usize, end: usize) -> Self {
        Self::from_parts(self.samples[start..end].to_vec(), self.sample_rate)
    }

    /// Truncate or zero-pad to exactly `len` samples.
    pub fn fit_to(&self, len: usize) -> Self {
        let mut s = self.samples.clone();
        s.resize(len, 0.0);
        Self::from_parts(s, self.sample_rate)
    }

    pub fn check_compatible(&self, other: &AudioBuffer) -> Result<()> {
        if self.len() != other.len() {
            return Err(Error::LengthMismatch(self.len(), other.len()));
        }
        if self.sample_rate != other.sample_rate {
            return Err(Error::RateMismatch(self.sample_rate, other.sample_rate));
        }
        Ok(())
    }
}

/// Sample encoding for [`write_wav`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WavFormat {
    Pcm16,
    Float32,
}

impl std::str::FromStr for WavFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pcm16" => Ok(WavFormat::Pcm16),
            "float32" => Ok(WavFormat::Float32),
            other => Err(Error::UnsupportedEncoding(other.to_string())),
        }
    }
}

/// Read a PCM16, PCM24 or float32 WAV file, averaging channels to mono.
pub fn read_wav(path: impl AsRef<Path>) -> Result<AudioBuffer> {
    let mut reader = hound::WavReader::open(path)?;
    let spec = reader.spec();
    let channels = spec.channels.max(1) as usize;
    let interleaved: Vec<f64> = match (spec.sample_format, spec.bits_per_sample) {
        (hound::SampleFormat::Float, 32) => reader
            .samples::<f32>()
            .map(|s| s.map(f64::from))
            .collect::<std::result::Result<_, _>>()?,
        (hound::SampleFormat::Int, 16) => reader
            .samples::<i32>()
            .map(|s| s.map(|v| v as f64 / 32768.0))
            .collect::<std::result::Result<_, _>>()?,
        (hound::SampleFormat::Int, 24) => reader
            .samples::<i32>()
            .map(|s| s.map(|v| v as f64 / 8_388_608.0))
            .collect::<std::result::Result<_, _>>()?,
        (fmt, bits) => {
            return Err(Error::UnsupportedEncoding(format!("{fmt:?} {bits}-bit")));
        }
    };
    if interleaved.len() < channels {
        return Err(Error::Empty);
    }
    let mono: Vec<f64> = if channels == 1 {
        interleaved
    } else {
        interleaved
            .chunks_exact(channels)
            .map(|frame| frame.iter().sum::<f64>() / channels as f64)
            .collect()
    };
    AudioBuffer::new(mono, spec.sample_rate)
}

/// Write a mono WAV file. The file is written to a sibling temporary path and
/// renamed into place.
pub fn write_wav(buf: &AudioBuffer, path: impl AsRef<Path>, format: WavFormat) -> Result<()> {
    if buf.is_empty() {
        return Err(Error::Empty);
    }
    if let Some(i) = buf.samples.iter().position(|s| !s.is_finite()) {
        return Err(Error::NonFinite(i));
    }
    let path = path.as_ref();
    let (bits, sample_format) = match format {
        WavFormat::Pcm16 => (16, hound::SampleFormat::Int),
        WavFormat::Float32 => (32, hound::SampleFormat::Float),
    };
    let spec = hound::WavSpec {
        channels: 1,
        sample_rate: buf.sample_rate,
        bits_per_sample: bits,
        sample_format,
    };
    let tmp = tmp_path(path);
    {
        let mut writer = hound::WavWriter::create(&tmp, spec)?;
        match format {
            WavFormat::Pcm16 => {
                const MAX: f64 = 1.0 - 1.0 / 32768.0;
                for &s in &buf.samples {
                    let v = (s.clamp(-1.0, MAX) * 32768.0).round() as i16;
                    writer.write_sample(v)?;
                }
            }
            WavFormat::Float32 => {
                for &s in &buf.samples {
                    writer.write_sample(s as f32)?;
                }
            }
        }
        writer.finalize()?;
    }
    std::fs::rename(&tmp, path)?;
    Ok(())
}

fn tmp_path(path: &Path) -> std::path::PathBuf {
    let mut name = path
        .file_name()
        .map(|n| n.to_os_string())
        .unwrap_or_default();
    name.push(".tmp");
    path.with_file_name(name)
}

// ---------------------------------------------------------------------------
// Resampling

const RESAMPLE_TAPS: usize = 64;
const KAISER_BETA: f64 = 8.6;
/// Passband edge as a fraction of the lower Nyquist frequency.
const RESAMPLE_ROLLOFF: f64 = 0.9;

/// Zeroth-order modified Bessel function of the first kind.
pub(crate) fn bessel_i0(x: f64) -> f64 {
    let mut sum = 1.0;
    let mut term = 1.0;
    let q = x * x / 4.0;
    for k in 1..200 {
        term *= q / (k as f64 * k as f64);
        sum += term;
        if term < sum * 1e-17 {
            break;
        }
    }
    sum
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Rational-ratio polyphase windowed-sinc resampler (Kaiser window, 64 taps
/// per phase). Output sample `m` sits at input time `m * down / up`.
#[derive(Clone, Debug)]
pub struct Resampler {
    up: usize,
    down: usize,
    /// `up` phases of `RESAMPLE_TAPS` taps each; each phase sums to one.
    table: Vec<f64>,
}

impl Resampler {
    /// Resample by the ratio `up / down` (output rate over input rate).
    pub fn new(up: u64, down: u64) -> Result<Self> {
        if up == 0 || down == 0 {
            return Err(Error::InvalidParam("resampling ratio must be positive".into()));
        }
        let g = gcd(up, down);
        let (up, down) = ((up / g) as usize, (down / g) as usize);
        // Cutoff in cycles per input sample.
        let fc = 0.5 * RESAMPLE_ROLLOFF * (up as f64 / down as f64).min(1.0);
        let half = (RESAMPLE_TAPS / 2) as f64;
        let i0b = bessel_i0(KAISER_BETA);
        let mut table = vec![0.0; up * RESAMPLE_TAPS];
        for p in 0..up {
            let frac = p as f64 / up as f64;
            let row = &mut table[p * RESAMPLE_TAPS..(p + 1) * RESAMPLE_TAPS];
            for (j, w) in row.iter_mut().enumerate() {
                // tap j covers input offset k = j - 31 relative to floor(t)
                let tau = (j as f64 - (half - 1.0)) - frac;
                let r = tau / half;
                let win = if r.abs() >= 1.0 {
                    0.0
                } else {
                    bessel_i0(KAISER_BETA * (1.0 - r * r).sqrt()) / i0b
                };
                let x = 2.0 * fc * tau;
                let sinc = if x.abs() < 1e-12 {
                    1.0
                } else {
                    (PI * x).sin() / (PI * x)
                };
                *w = 2.0 * fc * sinc * win;
            }
            let sum: f64 = row.iter().sum();
            for w in row.iter_mut() {
                *w /= sum;
            }
        }
        Ok(Self { up, down, table })
    }

    /// Resample a raw sample slice to `out_len` samples.
    pub fn process(&self, input: &[f64], out_len: usize) -> Vec<f64> {
        let n = input.len() as i64;
        let offset = (RESAMPLE_TAPS / 2 - 1) as i64;
        (0..out_len)
            .map(|m| {
                let pos = m as u128 * self.down as u128;
                let base = (pos / self.up as u128) as i64;
                let phase = (pos % self.up as u128) as usize;
                let row = &self.table[phase * RESAMPLE_TAPS..(phase + 1) * RESAMPLE_TAPS];
                let start = base - offset;
                let mut acc = 0.0;
                if start >= 0 && start + RESAMPLE_TAPS as i64 <= n {
                    let seg = &input[start as usize..start as usize + RESAMPLE_TAPS];
                    for (w, x) in row.iter().zip(seg) {
                        acc += w * x;
                    }
                } else {
                    for (j, w) in row.iter().enumerate() {
                        let idx = start + j as i64;
                        if idx >= 0 && idx < n {
                            acc += w * input[idx as usize];
                        }
                    }
                }
                acc
            })
            .collect()
    }
}

/// Band-limited resampling to `target_rate`. Output length is
/// `round(len * target / source)`.
pub fn resample(buf: &AudioBuffer, target_rate: u32) -> Result<AudioBuffer> {
    if target_rate == 0 {
        return Err(Error::InvalidRate(target_rate));
    }
    if target_rate == buf.sample_rate {
        return Ok(buf.clone());
    }
    let out_len =
        (buf.len() as f64 * target_rate as f64 / buf.sample_rate as f64).round() as usize;
    let rs = Resampler::new(target_rate as u64, buf.sample_rate as u64)?;
    Ok(AudioBuffer::from_parts(rs.process(&buf.samples, out_len), target_rate))
}

// ---------------------------------------------------------------------------
// STFT

/// Analysis window shape.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Window {
    Hann,
    Rectangular,
}

impl Window {
    /// Periodic window of `n` points.
    pub fn coefficients(self, n: usize) -> Vec<f64> {
        match self {
            Window::Hann => (0..n)
                .map(|i| 0.5 - 0.5 * (2.0 * PI * i as f64 / n as f64).cos())
                .collect(),
            Window::Rectangular => vec![1.0; n],
        }
    }
}

/// Number of frames for an `n`-sample signal: frames advance by `hop` until
/// every sample is covered, the last frame zero-padded. At least one frame.
pub fn frame_count(n: usize, window: usize, hop: usize) -> usize {
    if n <= window {
        1
    } else {
        1 + (n - window).div_ceil(hop)
    }
}

/// Complex one-sided STFT, frame-major.
#[derive(Clone, Debug)]
pub struct Spectrogram {
    pub frames: Vec<Vec<Complex64>>,
    pub window_size: usize,
    pub hop_size: usize,
    pub sample_rate: u32,
}

impl Spectrogram {
    pub fn num_bins(&self) -> usize {
        self.window_size / 2 + 1
    }

    pub fn num_frames(&self) -> usize {
        self.frames.len()
    }

    /// Center frequency of bin `k` in Hz.
    pub fn bin_hz(&self, k: usize) -> f64 {
        k as f64 * self.sample_rate as f64 / self.window_size as f64
    }

    pub fn magnitudes(&self) -> Vec<Vec<f64>> {
        self.frames
            .iter()
            .map(|f| f.iter().map(|c| c.norm()).collect())
            .collect()
    }
}

fn check_stft_args(window_size: usize, hop_size: usize) -> Result<()> {
    if window_size < 2 || !window_size.is_power_of_two() {
        return Err(Error::InvalidParam(format!(
            "window size {window_size} is not a power of two"
        )));
    }
    if hop_size == 0 || hop_size > window_size {
        return Err(Error::InvalidParam(format!(
            "hop size {hop_size} must be in 1..={window_size}"
        )));
    }
    Ok(())
}

/// Hann-windowed STFT.
pub fn stft(buf: &AudioBuffer, window_size: usize, hop_size: usize) -> Result<Spectrogram> {
    stft_windowed(buf, Window::Hann, window_size, hop_size)
}

/// STFT with an explicit window shape.
pub fn stft_windowed(
    buf: &AudioBuffer,
    window: Window,
    window_size: usize,
    hop_size: usize,
) -> Result<Spectrogram> {
    check_stft_args(window_size, hop_size)?;
    let win = window.coefficients(window_size);
    let plan = fft::forward_plan(window_size);
    let n_frames = frame_count(buf.len(), window_size, hop_size);
    let mut input = vec![0.0; window_size];
    let mut frames = Vec::with_capacity(n_frames);
    for f in 0..n_frames {
        let start = f * hop_size;
        for (i, slot) in input.iter_mut().enumerate() {
            *slot = buf.samples.get(start + i).copied().unwrap_or(0.0) * win[i];
        }
        let mut out = plan.make_output_vec();
        plan.process(&mut input, &mut out)
            .expect("stft buffer sizes");
        frames.push(out);
    }
    Ok(Spectrogram {
        frames,
        window_size,
        hop_size,
        sample_rate: buf.sample_rate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sine(freq: f64, fs: u32, n: usize, amp: f64) -> AudioBuffer {
        AudioBuffer::new(
            (0..n)
                .map(|i| amp * (2.0 * PI * freq * i as f64 / fs as f64).sin())
                .collect(),
            fs,
        )
        .unwrap()
    }

    #[test]
    fn rejects_bad_buffers() {
        assert!(matches!(AudioBuffer::new(vec![0.0], 0), Err(Error::InvalidRate(0))));
        assert!(matches!(
            AudioBuffer::new(vec![0.0, f64::NAN], 8000),
            Err(Error::NonFinite(1))
        ));
    }

    #[test]
    fn pcm16_full_scale_scaling() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("one.wav");
        let spec = hound::WavSpec {
            channels: 1,
            sample_rate: 8000,
            bits_per_sample: 16,
            sample_format: hound::SampleFormat::Int,
        };
        let mut w = hound::WavWriter::create(&p, spec).unwrap();
        w.write_sample(32767i16).unwrap();
        w.finalize().unwrap();
        let b = read_wav(&p).unwrap();
        assert_eq!(b.samples(), &[32767.0 / 32768.0]);
    }

    #[test]
    fn pcm24_and_stereo_downmix() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("st.wav");
        let spec = hound::WavSpec {
            channels: 2,
            sample_rate: 8000,
            bits_per_sample: 24,
            sample_format: hound::SampleFormat::Int,
        };
        let mut w = hound::WavWriter::create(&p, spec).unwrap();
        for _ in 0..4 {
            w.write_sample(4_194_304i32).unwrap();
            w.write_sample(-4_194_304i32).unwrap();
        }
        w.finalize().unwrap();
        let b = read_wav(&p).unwrap();
        assert_eq!(b.len(), 4);
        assert!(b.samples().iter().all(|&s| s == 0.0));
    }

    #[test]
    fn unsupported_and_malformed() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("u8.wav");
        let spec = hound::WavSpec {
            channels: 1,
            sample_rate: 8000,
            bits_per_sample: 8,
            sample_format: hound::SampleFormat::Int,
        };
        let mut w = hound::WavWriter::create(&p, spec).unwrap();
        w.write_sample(3i8).unwrap();
        w.finalize().unwrap();
        assert!(matches!(read_wav(&p), Err(Error::UnsupportedEncoding(_))));

        let bad = dir.path().join("bad.wav");
        std::fs::write(&bad, b"RIFF\x00\x00\x00\x00JUNKJUNK").unwrap();
        assert!(matches!(read_wav(&bad), Err(Error::Wav(_))));

        let empty = dir.path().join("empty.wav");
        let spec = hound::WavSpec {
            channels: 1,
            sample_rate: 8000,
            bits_per_sample: 16,
            sample_format: hound::SampleFormat::Int,
        };
        hound::WavWriter::create(&empty, spec).unwrap().finalize().unwrap();
        assert!(matches!(read_wav(&empty), Err(Error::Empty)));
    }

    #[test]
    fn pcm16_clamps_and_writes_zeros() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.wav");
        let b = AudioBuffer::new(vec![1.5, -2.0, 0.0], 8000).unwrap();
        write_wav(&b, &p, WavFormat::Pcm16).unwrap();
        let r = read_wav(&p).unwrap();
        assert_eq!(r.samples(), &[32767.0 / 32768.0, -1.0, 0.0]);

        let z = AudioBuffer::zeros(16, 8000);
        write_wav(&z, &p, WavFormat::Float32).unwrap();
        assert_eq!(read_wav(&p).unwrap(), z);
        assert!(matches!(
            write_wav(&AudioBuffer::zeros(0, 8000), &p, WavFormat::Pcm16),
            Err(Error::Empty)
        ));
    }

    #[test]
    fn resample_identity_and_dc() {
        let b = sine(100.0, 48000, 1000, 0.5);
        assert_eq!(resample(&b, 48000).unwrap(), b);
        let dc = AudioBuffer::new(vec![1.0; 4800], 48000).unwrap();
        let r = resample(&dc, 24000).unwrap();
        assert_eq!(r.len(), 2400);
        for &s in &r.samples()[64..2400 - 64] {
            assert!((s - 1.0).abs() < 1e-6, "{s}");
        }
        assert!(resample(&dc, 0).is_err());
    }

    #[test]
    fn resample_sine_against_analytic() {
        let b = sine(1000.0, 48000, 48000, 0.5);
        let r = resample(&b, 24000).unwrap();
        let oracle = sine(1000.0, 24000, 24000, 0.5);
        let lo = 100;
        let hi = r.len() - 100;
        let err: f64 = (lo..hi)
            .map(|i| (r.samples()[i] - oracle.samples()[i]).powi(2))
            .sum::<f64>()
            / (hi - lo) as f64;
        assert!(err.sqrt() < 1e-3, "rms err {}", err.sqrt());
    }

    #[test]
    fn resample_odd_ratio_preserves_tone() {
        let b = sine(440.0, 24000, 24000, 0.5);
        let r = resample(&b, 44100).unwrap();
        assert_eq!(r.len(), 44100);
        let oracle = sine(440.0, 44100, 44100, 0.5);
        let err: f64 = (200..44000)
            .map(|i| (r.samples()[i] - oracle.samples()[i]).powi(2))
            .sum::<f64>()
            / 43800.0;
        assert!(err.sqrt() < 1e-3);
    }

    #[test]
    fn stft_silence_dc_and_framing() {
        let z = AudioBuffer::zeros(10000, 24000);
        let s = stft(&z, 1024, 512).unwrap();
        assert_eq!(s.num_frames(), frame_count(10000, 1024, 512));
        assert!(s.frames.iter().flatten().all(|c| c.norm() == 0.0));

        let dc = AudioBuffer::new(vec![1.0; 4096], 24000).unwrap();
        let s = stft(&dc, 4096, 1024).unwrap();
        let wsum: f64 = Window::Hann.coefficients(4096).iter().sum();
        assert_eq!(s.num_bins(), 2049);
        assert!((s.frames[0][0].norm() - wsum).abs() < 1e-9);

        // Shorter than one window: a single zero-padded frame.
        let short = AudioBuffer::new(vec![1.0; 10], 24000).unwrap();
        assert_eq!(stft(&short, 64, 32).unwrap().num_frames(), 1);
        assert!(stft(&short, 100, 32).is_err());
        assert!(stft(&short, 64, 65).is_err());
    }

    #[test]
    fn stft_bin_centered_sine_concentrates() {
        let n = 4096;
        let k0 = 100;
        let fs = 24000;
        let f = k0 as f64 * fs as f64 / n as f64;
        let b = sine(f, fs, n, 1.0);
        let s = stft(&b, n, n).unwrap();
        // direct DFT oracle of the Hann-windowed frame at the peak bins
        let win = Window::Hann.coefficients(n);
        let direct = |k: usize| {
            let mut acc = Complex64::new(0.0, 0.0);
            for i in 0..n {
                let th = -2.0 * PI * (k * i) as f64 / n as f64;
                acc += Complex64::from_polar(b.samples()[i] * win[i], th);
            }
            acc
        };
        for k in k0 - 1..=k0 + 1 {
            assert!((direct(k) - s.frames[0][k]).norm() < 1e-6);
        }
        let total: f64 = s.frames[0].iter().map(|c| c.norm_sqr()).sum();
        let near: f64 = s.frames[0][k0 - 1..=k0 + 1].iter().map(|c| c.norm_sqr()).sum();
        assert!(near / total >= 0.99);
    }

    #[test]
    fn parseval_with_rectangular_window() {
        let x: Vec<f64> = (0..2048).map(|i| ((i * 7919) % 113) as f64 / 113.0 - 0.5).collect();
        let b = AudioBuffer::new(x.clone(), 8000).unwrap();
        let n = 256;
        let s = stft_windowed(&b, Window::Rectangular, n, n).unwrap();
        let mut spec_energy = 0.0;
        for frame in &s.frames {
            for (k, c) in frame.iter().enumerate() {
                let w = if k == 0 || k == n / 2 { 1.0 } else { 2.0 };
                spec_energy += w * c.norm_sqr() / n as f64;
            }
        }
        let energy: f64 = x.iter().map(|v| v * v).sum();
        assert!((spec_energy - energy).abs() / energy < 1e-6);
    }
}
