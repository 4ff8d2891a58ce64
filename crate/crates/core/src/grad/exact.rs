//! Reverse-mode gradient of the training loss through the differentiable
//! chain. The large linear stages (FFT filtering, STFT) are differentiated
//! by hand-written adjoints; the per-band coefficient design and the gain
//! computer by forward-mode duals.

use std::f64::consts::{LN_10, PI};

use num_complex::Complex64;

use crate::audio::AudioBuffer;
use crate::dual::Dual;
use crate::effects::{
    band_settings, clamp_freq, design_coeffs, diff_time_constant, gain_computer_scalar,
    denormalize, CompMode, EffectParams, NormalizedParams, LEVEL_FLOOR, NUM_PARAMS,
};
use crate::error::{Error, Result};
use crate::fft;
use crate::objective::{MrStftTarget, TIME_WEIGHT};

use super::LossFn;

/// Index of the first parameter of each EQ band in the control vector, and
/// whether the band has its own Q.
const BAND_SLOTS: [(usize, bool); 6] = [(0, false), (2, true), (5, true), (8, true), (11, true), (14, false)];
const THRESHOLD: usize = 16;
const RATIO: usize = 17;
const ATTACK: usize = 18;
const RELEASE: usize = 19;
const KNEE: usize = 20;
const MAKEUP: usize = 21;

#[inline]
fn sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Loss of the differentiable chain applied to a fixed input, against a
/// fixed reference. Spectra of the input and analysis of the reference are
/// computed once.
pub struct StyleObjective {
    fs: f64,
    n: usize,
    f: usize,
    x: Vec<f64>,
    x_spec: Vec<Complex64>,
    /// `e^{-j w_k}` on the one-sided grid.
    twiddle: Vec<Complex64>,
    reference: Vec<f64>,
    target: MrStftTarget,
}

/// Intermediate signals kept for the backward pass.
struct Forward {
    params: EffectParams,
    coeffs: [([f64; 3], [f64; 3]); 6],
    identity_eq: bool,
    h: Vec<Complex64>,
    y: Vec<f64>,
    xl_spec: Vec<Complex64>,
    alpha: f64,
    gain: Vec<f64>,
    makeup: f64,
    out: Vec<f64>,
}

impl StyleObjective {
    pub fn new(x: &AudioBuffer, reference: &AudioBuffer) -> Result<Self> {
        x.check_compatible(reference)?;
        if x.len() != reference.len() {
            return Err(Error::LengthMismatch(x.len(), reference.len()));
        }
        if x.is_empty() {
            return Err(Error::Empty);
        }
        let n = x.len();
        let f = fft::linear_conv_len(n);
        let nb = f / 2 + 1;
        let twiddle = (0..nb)
            .map(|k| Complex64::from_polar(1.0, -2.0 * PI * k as f64 / f as f64))
            .collect();
        Ok(Self {
            fs: x.sample_rate() as f64,
            n,
            f,
            x: x.samples().to_vec(),
            x_spec: fft::rfft_padded(x.samples(), f),
            twiddle,
            reference: reference.samples().to_vec(),
            target: MrStftTarget::new(reference.samples()),
        })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn sample_rate(&self) -> u32 {
        self.fs as u32
    }

    fn irfft_trunc(&self, mut spec: Vec<Complex64>) -> Vec<f64> {
        let y = fft::irfft_raw(&mut spec, self.f);
        let s = 1.0 / self.f as f64;
        y[..self.n].iter().map(|v| v * s).collect()
    }

    fn forward(&self, v: &NormalizedParams) -> Forward {
        let params = denormalize(v);
        let coeffs = band_settings(&params.eq).map(|(kind, g, fr, q)| {
            let (fr, _) = clamp_freq(fr, self.fs);
            design_coeffs(kind, g, fr, q, self.fs)
        });
        let identity_eq = coeffs.iter().all(|(b, a)| b == a);
        let (h, y) = if identity_eq {
            (Vec::new(), self.x.clone())
        } else {
            let h: Vec<Complex64> = self
                .twiddle
                .iter()
                .map(|&e| {
                    let e2 = e * e;
                    coeffs.iter().fold(Complex64::new(1.0, 0.0), |acc, (b, a)| {
                        acc * (b[0] + e * b[1] + e2 * b[2]) / (a[0] + e * a[1] + e2 * a[2])
                    })
                })
                .collect();
            let spec = self.x_spec.iter().zip(&h).map(|(x, h)| x * h).collect();
            (h, self.irfft_trunc(spec))
        };

        let c = &params.comp;
        let xl: Vec<f64> = y
            .iter()
            .map(|&s| {
                let xd = 20.0 * (s.abs() + LEVEL_FLOOR).log10();
                xd - gain_computer_scalar(xd, c.threshold_db, c.ratio, c.knee_db, CompMode::Compress)
            })
            .collect();
        let alpha = diff_time_constant(c.attack_s, c.release_s, self.fs);
        let xl_spec = fft::rfft_padded(&xl, self.f);
        let yl_spec = xl_spec
            .iter()
            .zip(&self.twiddle)
            .map(|(x, &e)| x * (1.0 - alpha) / (1.0 - e * alpha))
            .collect();
        let yl = self.irfft_trunc(yl_spec);
        let makeup = 10f64.powf(c.makeup_db / 20.0);
        let gain: Vec<f64> = yl.iter().map(|v| (-v * LN_10 / 20.0).exp()).collect();
        let out = y.iter().zip(&gain).map(|(s, g)| s * g * makeup).collect();
        Forward {
            params,
            coeffs,
            identity_eq,
            h,
            y,
            xl_spec,
            alpha,
            gain,
            makeup,
            out,
        }
    }

    /// Rendered output of the differentiable chain.
    pub fn render(&self, v: &NormalizedParams) -> AudioBuffer {
        AudioBuffer::from_parts(self.forward(v).out, self.fs as u32)
    }

    fn loss_of(&self, out: &[f64]) -> f64 {
        let mae = out
            .iter()
            .zip(&self.reference)
            .map(|(a, b)| (a - b).abs())
            .sum::<f64>()
            / self.n as f64;
        self.target.loss(out) + TIME_WEIGHT * mae
    }

    pub fn loss(&self, v: &NormalizedParams) -> Result<f64> {
        let l = self.loss_of(&self.forward(v).out);
        if l.is_finite() {
            Ok(l)
        } else {
            Err(Error::NonFiniteValue(format!("loss at {:?}", v.as_array())))
        }
    }

    /// Loss and its exact gradient with respect to the normalized vector.
    pub fn loss_and_grad(&self, v: &NormalizedParams) -> Result<(f64, [f64; NUM_PARAMS])> {
        let fw = self.forward(v);
        let n = self.n;
        let f = self.f;
        let inv_f = 1.0 / f as f64;
        let mut pg = [0.0; NUM_PARAMS];

        // loss -> output samples
        let (freq_loss, mut g_out) = self.target.loss_and_grad(&fw.out);
        let mut mae = 0.0;
        let tw = TIME_WEIGHT / n as f64;
        for ((g, o), r) in g_out.iter_mut().zip(&fw.out).zip(&self.reference) {
            mae += (o - r).abs();
            *g += tw * sign(o - r);
        }
        let loss = freq_loss + TIME_WEIGHT * mae / n as f64;
        if !loss.is_finite() {
            return Err(Error::NonFiniteValue(format!("loss at {:?}", v.as_array())));
        }

        // output stage: out = y * gain * makeup
        let k = LN_10 / 20.0;
        let mut g_y = vec![0.0; n];
        let mut g_yl = vec![0.0; n];
        for i in 0..n {
            let go = g_out[i];
            pg[MAKEUP] += go * fw.out[i] * k;
            g_y[i] = go * fw.gain[i] * fw.makeup;
            g_yl[i] = go * fw.y[i] * fw.makeup * fw.gain[i] * -k;
        }

        // smoothing filter G(alpha) applied by frequency sampling
        let g_yl_spec = fft::rfft_padded(&g_yl, f);
        let alpha = fw.alpha;
        let last = g_yl_spec.len() - 1;
        let mut g_alpha = 0.0;
        let mut g_xl_spec = Vec::with_capacity(g_yl_spec.len());
        for (kbin, ((gy, xl), &e)) in g_yl_spec.iter().zip(&fw.xl_spec).zip(&self.twiddle).enumerate() {
            let den = 1.0 - e * alpha;
            let resp = (1.0 - alpha) / den;
            let d_resp = (e - 1.0) / (den * den);
            let w = if kbin == 0 || kbin == last { 1.0 } else { 2.0 };
            g_alpha += w * (gy.conj() * xl * d_resp).re;
            g_xl_spec.push(gy * resp.conj());
        }
        g_alpha *= inv_f;
        let g_xl = self.irfft_trunc(g_xl_spec);

        let c = &fw.params.comp;
        let tau = (c.attack_s * c.release_s).sqrt();
        let d_alpha_d_tau = alpha / (tau * tau * self.fs);
        pg[ATTACK] = g_alpha * d_alpha_d_tau * tau / (2.0 * c.attack_s);
        pg[RELEASE] = g_alpha * d_alpha_d_tau * tau / (2.0 * c.release_s);

        // gain computer and level detector
        let t = Dual::<4>::var(c.threshold_db, 1);
        let r = Dual::<4>::var(c.ratio, 2);
        let w = Dual::<4>::var(c.knee_db, 3);
        let db = 20.0 / LN_10;
        for i in 0..n {
            let s = fw.y[i];
            let m = s.abs() + LEVEL_FLOOR;
            let xd = Dual::<4>::var(20.0 * m.log10(), 0);
            let yg = gain_computer_scalar(xd, t, r, w, CompMode::Compress);
            let gl = g_xl[i];
            pg[THRESHOLD] -= gl * yg.eps[1];
            pg[RATIO] -= gl * yg.eps[2];
            pg[KNEE] -= gl * yg.eps[3];
            let g_xd = gl * (1.0 - yg.eps[0]);
            g_y[i] += g_xd * db * sign(s) / m;
        }

        // EQ: y = irfft(H X) truncated
        self.eq_backward(&fw, &g_y, &mut pg);

        let slopes = v.slopes();
        let mut grad = [0.0; NUM_PARAMS];
        for i in 0..NUM_PARAMS {
            grad[i] = pg[i] * slopes[i];
        }
        if let Some(i) = grad.iter().position(|g| !g.is_finite()) {
            return Err(Error::NonFiniteValue(format!("gradient entry {i}")));
        }
        Ok((loss, grad))
    }

    fn eq_backward(&self, fw: &Forward, g_y: &[f64], pg: &mut [f64; NUM_PARAMS]) {
        let inv_f = 1.0 / self.f as f64;
        let g_y_spec = fft::rfft_padded(g_y, self.f);
        let last = g_y_spec.len() - 1;
        let settings = band_settings(&fw.params.eq);
        // per band: sums of Re(Q e^m / B) and Re(Q e^m / A)
        let mut p_sum = [[0.0; 3]; 6];
        let mut r_sum = [[0.0; 3]; 6];
        for (kbin, (gy, x)) in g_y_spec.iter().zip(&self.x_spec).enumerate() {
            let e = self.twiddle[kbin];
            let e2 = e * e;
            let w = if kbin == 0 || kbin == last { 1.0 } else { 2.0 };
            let h = if fw.identity_eq { Complex64::new(1.0, 0.0) } else { fw.h[kbin] };
            let q = gy.conj() * x * h * (w * inv_f);
            for (band, (b, a)) in fw.coeffs.iter().enumerate() {
                let qb = q / (b[0] + e * b[1] + e2 * b[2]);
                let qa = q / (a[0] + e * a[1] + e2 * a[2]);
                p_sum[band][0] += qb.re;
                p_sum[band][1] += (qb * e).re;
                p_sum[band][2] += (qb * e2).re;
                r_sum[band][1] += (qa * e).re;
                r_sum[band][2] += (qa * e2).re;
            }
        }
        for (band, &(kind, g, fr, q)) in settings.iter().enumerate() {
            let (fr, clamped) = clamp_freq(fr, self.fs);
            let (b, a) = design_coeffs(
                kind,
                Dual::<3>::var(g, 0),
                Dual::<3>::var(fr, 1),
                Dual::<3>::var(q, 2),
                self.fs,
            );
            let mut d = [0.0; 3];
            for (j, dj) in d.iter_mut().enumerate() {
                for m in 0..3 {
                    *dj += b[m].eps[j] * p_sum[band][m];
                }
                for m in 1..3 {
                    *dj -= a[m].eps[j] * r_sum[band][m];
                }
            }
            let (slot, has_q) = BAND_SLOTS[band];
            pg[slot] += d[0];
            if !clamped {
                pg[slot + 1] += d[1];
            }
            if has_q {
                pg[slot + 2] += d[2];
            }
        }
    }
}

impl LossFn for StyleObjective {
    fn loss(&self, v: &NormalizedParams) -> Result<f64> {
        StyleObjective::loss(self, v)
    }
}
