//! Audio-effect style transfer through a differentiable 6-band parametric
//! equalizer and feedforward compressor.
//!
//! The crate is organized bottom-up:
//!
//! * [`audio`]: mono buffers, WAV files, resampling and STFT analysis.
//! * [`effects`]: biquad EQ and compressor, each in a time-domain reference
//!   form and a frequency-sampled differentiable form, plus the 22-parameter
//!   normalized control space.
//! * [`objective`]: the MR-STFT + MAE training loss and evaluation metrics
//!   (MSD, spectral centroid, RMS and BS.1770 loudness errors).
//! * [`grad`]: exact (adjoint) gradients, finite differences, SPSA, and the
//!   per-example optimizer.
//! * [`baseline`]: the rule-based spectrum-matching FIR plus threshold
//!   descent.
//! * [`datagen`]: self-supervised pair generation and the style presets.
//! * [`fixtures`]: deterministic synthetic recordings.

pub mod audio;
pub mod baseline;
pub mod datagen;
pub mod dual;
pub mod effects;
mod error;
pub(crate) mod fft;
pub mod fixtures;
pub mod grad;
pub mod objective;
pub mod par;

pub use audio::{AudioBuffer, Spectrogram, WavFormat};
pub use effects::{CompParams, EffectParams, EqParams, NormalizedParams, Path, NUM_PARAMS};
pub use error::{Error, Result};
pub use grad::{GradMethod, GradResult, OptimizerConfig};
pub use objective::{LossBreakdown, MetricReport};
