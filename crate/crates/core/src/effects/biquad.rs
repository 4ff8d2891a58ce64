//! Audio EQ Cookbook biquads.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::audio::AudioBuffer;
use crate::dual::Real;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FilterKind {
    LowShelf,
    Peaking,
    HighShelf,
}

/// Second-order section with `a[0] == 1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BiquadCoeffs {
    pub b: [f64; 3],
    pub a: [f64; 3],
}

impl BiquadCoeffs {
    pub const IDENTITY: BiquadCoeffs = BiquadCoeffs {
        b: [1.0, 0.0, 0.0],
        a: [1.0, 0.0, 0.0],
    };

    /// `H(e^{jw}) = B(e^{jw}) / A(e^{jw})`.
    pub fn response(&self, w: f64) -> Complex64 {
        let z1 = Complex64::from_polar(1.0, -w);
        let z2 = z1 * z1;
        let num = self.b[0] + z1 * self.b[1] + z2 * self.b[2];
        let den = self.a[0] + z1 * self.a[1] + z2 * self.a[2];
        num / den
    }

    /// Magnitudes of the two poles.
    pub fn pole_magnitudes(&self) -> [f64; 2] {
        let (a1, a2) = (self.a[1], self.a[2]);
        let disc = a1 * a1 - 4.0 * a2;
        if disc < 0.0 {
            // complex pair: |p|^2 = a2
            let m = a2.sqrt();
            [m, m]
        } else {
            let s = disc.sqrt();
            [((-a1 + s) / 2.0).abs(), ((-a1 - s) / 2.0).abs()]
        }
    }

    /// Feedback and feedforward swapped: the exact inverse filter.
    pub fn inverse(&self) -> BiquadCoeffs {
        let b0 = self.b[0];
        BiquadCoeffs {
            b: [1.0 / b0, self.a[1] / b0, self.a[2] / b0],
            a: [1.0, self.b[1] / b0, self.b[2] / b0],
        }
    }
}

/// Cookbook coefficients normalized so that `a[0] == 1`, generic over the
/// scalar so the same code yields parameter derivatives.
pub fn design_coeffs<T: Real>(
    kind: FilterKind,
    gain_db: T,
    freq_hz: T,
    q: T,
    fs: f64,
) -> ([T; 3], [T; 3]) {
    let a = (gain_db * (std::f64::consts::LN_10 / 40.0)).exp();
    let w0 = freq_hz * (2.0 * PI / fs);
    let (sw, cw) = (w0.sin(), w0.cos());
    let alpha = sw / (q * 2.0);
    let (b, den) = match kind {
        FilterKind::Peaking => (
            [alpha * a + 1.0, cw * -2.0, -(alpha * a) + 1.0],
            [alpha / a + 1.0, cw * -2.0, -(alpha / a) + 1.0],
        ),
        FilterKind::LowShelf => {
            let sa = a.sqrt() * alpha * 2.0;
            let ap1 = a + 1.0;
            let am1 = a - 1.0;
            (
                [
                    a * (ap1 - am1 * cw + sa),
                    a * (am1 - ap1 * cw) * 2.0,
                    a * (ap1 - am1 * cw - sa),
                ],
                [ap1 + am1 * cw + sa, (am1 + ap1 * cw) * -2.0, ap1 + am1 * cw - sa],
            )
        }
        FilterKind::HighShelf => {
            let sa = a.sqrt() * alpha * 2.0;
            let ap1 = a + 1.0;
            let am1 = a - 1.0;
            (
                [
                    a * (ap1 + am1 * cw + sa),
                    a * (am1 + ap1 * cw) * -2.0,
                    a * (ap1 + am1 * cw - sa),
                ],
                [ap1 - am1 * cw + sa, (am1 - ap1 * cw) * 2.0, ap1 - am1 * cw - sa],
            )
        }
    };
    let a0 = den[0];
    (
        [b[0] / a0, b[1] / a0, b[2] / a0],
        [T::cst(1.0), den[1] / a0, den[2] / a0],
    )
}

pub fn design_biquad(
    kind: FilterKind,
    gain_db: f64,
    freq_hz: f64,
    q: f64,
    fs: f64,
) -> Result<BiquadCoeffs> {
    if !(freq_hz > 0.0 && freq_hz < fs / 2.0) {
        return Err(Error::InvalidParam(format!(
            "frequency {freq_hz} Hz outside (0, {}) Hz",
            fs / 2.0
        )));
    }
    if !(q > 0.0) {
        return Err(Error::InvalidParam(format!("non-positive Q {q}")));
    }
    if !gain_db.is_finite() {
        return Err(Error::InvalidParam(format!("gain {gain_db} dB")));
    }
    let (b, a) = design_coeffs(kind, gain_db, freq_hz, q, fs);
    Ok(BiquadCoeffs { b, a })
}

/// Direct-form I recursion with zero initial state.
pub fn apply_biquad_td(x: &AudioBuffer, c: &BiquadCoeffs) -> AudioBuffer {
    let mut y = x.samples().to_vec();
    apply_in_place(&mut y, c);
    AudioBuffer::from_parts(y, x.sample_rate())
}

pub(crate) fn apply_in_place(buf: &mut [f64], c: &BiquadCoeffs) {
    let [b0, b1, b2] = c.b;
    let [_, a1, a2] = c.a;
    let (mut x1, mut x2, mut y1, mut y2) = (0.0, 0.0, 0.0, 0.0);
    for s in buf.iter_mut() {
        let x0 = *s;
        let y0 = b0 * x0 + b1 * x1 + b2 * x2 - a1 * y1 - a2 * y2;
        x2 = x1;
        x1 = x0;
        y2 = y1;
        y1 = y0;
        *s = y0;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dual::Dual;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn flat_peaking_is_unity() {
        let c = design_biquad(FilterKind::Peaking, 0.0, 1000.0, 0.707, 24000.0).unwrap();
        assert_eq!(c.b, c.a);
    }

    #[test]
    fn shelf_dc_gains() {
        // evaluate H(e^{j0}) = sum(b) / sum(a)
        let ls = design_biquad(FilterKind::LowShelf, 6.0, 200.0, 0.707, 44100.0).unwrap();
        let dc = ls.b.iter().sum::<f64>() / ls.a.iter().sum::<f64>();
        assert!((dc - 10f64.powf(6.0 / 20.0)).abs() < 1e-6, "{dc}");
        let hs = design_biquad(FilterKind::HighShelf, -12.0, 8000.0, 0.707, 44100.0).unwrap();
        let dc = hs.b.iter().sum::<f64>() / hs.a.iter().sum::<f64>();
        assert!((dc - 1.0).abs() < 1e-6, "{dc}");
        let ny = hs.response(PI).norm();
        assert!((ny - 10f64.powf(-12.0 / 20.0)).abs() < 1e-6);
    }

    #[test]
    fn rejects_bad_args() {
        assert!(design_biquad(FilterKind::Peaking, 0.0, 0.0, 1.0, 24000.0).is_err());
        assert!(design_biquad(FilterKind::Peaking, 0.0, 12000.0, 1.0, 24000.0).is_err());
        assert!(design_biquad(FilterKind::Peaking, 0.0, 1000.0, 0.0, 24000.0).is_err());
    }

    #[test]
    fn identity_and_one_pole_impulse() {
        let x = AudioBuffer::new((0..64).map(|i| (i as f64).sin()).collect(), 8000).unwrap();
        assert_eq!(apply_biquad_td(&x, &BiquadCoeffs::IDENTITY), x);

        let mut imp = vec![0.0; 40];
        imp[0] = 1.0;
        let y = apply_biquad_td(
            &AudioBuffer::new(imp, 8000).unwrap(),
            &BiquadCoeffs {
                b: [0.5, 0.0, 0.0],
                a: [1.0, -0.5, 0.0],
            },
        );
        for (n, v) in y.samples().iter().enumerate() {
            assert!((v - 0.5 * 0.5f64.powi(n as i32)).abs() < 1e-15);
        }
    }

    #[test]
    fn inverse_cascade_restores_noise() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let x: Vec<f64> = (0..24000).map(|_| rng.random_range(-1.0..1.0)).collect();
        let x = AudioBuffer::new(x, 24000).unwrap();
        let c = design_biquad(FilterKind::Peaking, 9.0, 1500.0, 2.0, 24000.0).unwrap();
        let y = apply_biquad_td(&apply_biquad_td(&x, &c), &c.inverse());
        let err: f64 = x.samples().iter().zip(y.samples()).map(|(a, b)| (a - b).powi(2)).sum();
        let energy: f64 = x.samples().iter().map(|a| a * a).sum();
        assert!((err / energy).sqrt() < 1e-9);
    }

    #[test]
    fn stable_over_parameter_ranges() {
        for fs in [24000.0, 44100.0, 48000.0] {
            for kind in [FilterKind::LowShelf, FilterKind::Peaking, FilterKind::HighShelf] {
                let (flo, fhi) = match kind {
                    FilterKind::LowShelf => (30.0, 1000.0),
                    FilterKind::Peaking => (100.0, 10000.0),
                    FilterKind::HighShelf => (2000.0f64, 11000.0f64.min(0.49 * fs)),
                };
                for gi in 0..=16 {
                    let g = -32.0 + 4.0 * gi as f64;
                    for fi in 0..=20 {
                        let f = flo * (fhi / flo).powf(fi as f64 / 20.0);
                        for qi in 0..=10 {
                            let q = 0.3 * (6.0f64 / 0.3).powf(qi as f64 / 10.0);
                            let c = design_biquad(kind, g, f, q, fs).unwrap();
                            assert_eq!(c.a[0], 1.0);
                            for m in c.pole_magnitudes() {
                                assert!(m < 1.0, "{kind:?} g={g} f={f} q={q} |p|={m}");
                            }
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn dual_coefficients_match_fd() {
        let (g, f, q) = (5.0, 800.0, 1.3);
        for kind in [FilterKind::LowShelf, FilterKind::Peaking, FilterKind::HighShelf] {
            let (b, a) = design_coeffs(
                kind,
                Dual::<3>::var(g, 0),
                Dual::<3>::var(f, 1),
                Dual::<3>::var(q, 2),
                24000.0,
            );
            let steps = [1e-5, 1e-3, 1e-6];
            for (slot, h) in steps.iter().enumerate() {
                let mut p = [g, f, q];
                p[slot] += h;
                let (bp, ap) = design_coeffs(kind, p[0], p[1], p[2], 24000.0);
                p[slot] -= 2.0 * h;
                let (bm, am) = design_coeffs(kind, p[0], p[1], p[2], 24000.0);
                for m in 0..3 {
                    let fd_b = (bp[m] - bm[m]) / (2.0 * h);
                    let fd_a = (ap[m] - am[m]) / (2.0 * h);
                    assert!((b[m].eps[slot] - fd_b).abs() < 1e-6 * fd_b.abs().max(1e-3));
                    assert!((a[m].eps[slot] - fd_a).abs() < 1e-6 * fd_a.abs().max(1e-3));
                }
            }
        }
    }
}
