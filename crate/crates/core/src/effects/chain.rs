use super::compressor::{compressor_diff, compressor_reference};
use super::eq::{apply_eq_td, eq_is_identity, eq_response, fir_filter_freq};
use super::params::EffectParams;
use crate::audio::AudioBuffer;

/// Which implementation renders the chain.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Path {
    /// Recursive biquads and branching ballistics.
    Reference,
    /// Frequency-sampled EQ and single-constant FIR-smoothed compressor.
    Differentiable,
}

/// EQ followed by the compressor.
pub fn process_chain(x: &AudioBuffer, p: &EffectParams, path: Path) -> AudioBuffer {
    match path {
        Path::Reference => compressor_reference(&apply_eq_td(x, &p.eq), &p.comp),
        Path::Differentiable => {
            let fs = x.sample_rate() as f64;
            let y = if eq_is_identity(&p.eq, fs) {
                x.clone()
            } else {
                fir_filter_freq(x, |n| eq_response(&p.eq, n, fs))
            };
            compressor_diff(&y, &p.comp)
        }
    }
}
