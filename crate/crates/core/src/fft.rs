//! Thin wrappers over `realfft` with a per-thread plan cache.

use std::cell::RefCell;
use std::sync::Arc;

use num_complex::Complex64;
use realfft::{ComplexToReal, RealFftPlanner, RealToComplex};

thread_local! {
    static PLANNER: RefCell<RealFftPlanner<f64>> = RefCell::new(RealFftPlanner::new());
}

pub(crate) fn forward_plan(n: usize) -> Arc<dyn RealToComplex<f64>> {
    PLANNER.with(|p| p.borrow_mut().plan_fft_forward(n))
}

pub(crate) fn inverse_plan(n: usize) -> Arc<dyn ComplexToReal<f64>> {
    PLANNER.with(|p| p.borrow_mut().plan_fft_inverse(n))
}

/// One-sided DFT of `x` zero-padded to `n` (must be even, `n >= x.len()`).
pub(crate) fn rfft_padded(x: &[f64], n: usize) -> Vec<Complex64> {
    let plan = forward_plan(n);
    let mut input = vec![0.0; n];
    input[..x.len()].copy_from_slice(x);
    let mut out = plan.make_output_vec();
    plan.process(&mut input, &mut out)
        .expect("forward fft buffer sizes");
    out
}

/// Unnormalized inverse of a one-sided spectrum of an `n`-point real signal.
///
/// The imaginary parts of the DC and Nyquist bins are ignored.
pub(crate) fn irfft_raw(spec: &mut [Complex64], n: usize) -> Vec<f64> {
    let plan = inverse_plan(n);
    spec[0].im = 0.0;
    let last = spec.len() - 1;
    spec[last].im = 0.0;
    let mut out = vec![0.0; n];
    plan.process(spec, &mut out).expect("inverse fft buffer sizes");
    out
}

/// Smallest power of two `>= n` (at least 2).
pub(crate) fn next_pow2(n: usize) -> usize {
    n.max(2).next_power_of_two()
}

/// Padded transform length used for linear (non-wrapping) filtering of an
/// `n`-sample signal: `2^ceil(log2(2n - 1))`.
pub fn linear_conv_len(n: usize) -> usize {
    next_pow2(2 * n.max(1) - 1)
}
