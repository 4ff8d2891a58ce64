//! The effect chain: a 6-band parametric equalizer followed by a feedforward
//! dynamic range compressor.
//!
//! Every effect exists in two forms. The *reference* path runs the recursive
//! time-domain filters (biquad difference equations, branching attack/release
//! ballistics). The *differentiable* path evaluates the filters as frequency
//! responses and applies them by zero-padded FFT multiplication, with a single
//! combined attack/release constant for the compressor.

mod biquad;
mod chain;
mod compressor;
mod eq;
mod params;

pub use biquad::{apply_biquad_td, design_biquad, design_coeffs, BiquadCoeffs, FilterKind};
pub(crate) use biquad::apply_in_place as biquad_in_place;
pub use chain::{process_chain, Path};
pub(crate) use eq::band_settings;
pub use compressor::{
    compressor_diff, compressor_reference, compressor_reference_mode, diff_time_constant,
    gain_computer, gain_reduction_diff, gain_reduction_reference, gain_computer_scalar, level_db, one_pole_response, smooth_branching,
    smooth_one_pole, static_curve, time_constant, CompMode, LEVEL_FLOOR,
};
pub use eq::{
    apply_eq_td, eq_biquads, eq_is_identity, eq_response, eq_response_at, fir_filter_freq, SHELF_Q,
};
pub use params::{
    denormalize, normalize, CompParams, EffectParams, EqParams, NormalizedParams, ParamScale,
    ParamSpec, PeakBand, ShelfBand, NUM_PARAMS, PARAM_SPECS,
};

/// Highest usable filter frequency as a fraction of the sample rate.
pub const MAX_FREQ_RATIO: f64 = 0.49;

/// Clamp a filter frequency to `MAX_FREQ_RATIO * fs`, returning the clamped
/// value and whether clamping happened.
pub(crate) fn clamp_freq(freq_hz: f64, fs: f64) -> (f64, bool) {
    let max = MAX_FREQ_RATIO * fs;
    if freq_hz > max {
        (max, true)
    } else {
        (freq_hz, false)
    }
}
