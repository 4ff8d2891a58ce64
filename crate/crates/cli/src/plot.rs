use std::fmt::Write as _;
use std::fs;

use anyhow::{Context, Result};
use fxstyle::effects::{eq_response_at, static_curve, MAX_FREQ_RATIO};
use fxstyle::EffectParams;
use serde::{Deserialize, Serialize};

use crate::args::PlotArgs;
use crate::output::{write_atomic, write_csv};

pub const EQ_POINTS: usize = 512;
pub const EQ_FMIN: f64 = 20.0;
pub const CURVE_STEP_DB: f64 = 0.5;

#[derive(Deserialize)]
#[serde(untagged)]
enum ParamsFile {
    Report { params: EffectParams, sample_rate: Option<u32> },
    Bare(EffectParams),
}

/// Read a transfer or style report, or a bare parameter object.
pub fn load_params(path: &std::path::Path) -> Result<(EffectParams, Option<u32>)> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let f: ParamsFile =
        serde_json::from_str(&text).with_context(|| format!("{} holds no effect parameters", path.display()))?;
    let (p, rate) = match f {
        ParamsFile::Report { params, sample_rate } => (params, sample_rate),
        ParamsFile::Bare(p) => (p, None),
    };
    p.validate()?;
    Ok((p, rate))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EqPoint {
    pub freq_hz: f64,
    pub gain_db: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CurvePoint {
    pub input_db: f64,
    pub output_db: f64,
}

/// Magnitude response at 512 log-spaced frequencies from 20 Hz to
/// `0.49 * fs`.
pub fn eq_curve(p: &EffectParams, fs: f64) -> Vec<EqPoint> {
    let fmax = MAX_FREQ_RATIO * fs;
    let freqs: Vec<f64> = (0..EQ_POINTS)
        .map(|i| EQ_FMIN * (fmax / EQ_FMIN).powf(i as f64 / (EQ_POINTS - 1) as f64))
        .collect();
    eq_response_at(&p.eq, &freqs, fs)
        .iter()
        .zip(&freqs)
        .map(|(h, &f)| EqPoint {
            freq_hz: f,
            gain_db: 20.0 * h.norm().log10(),
        })
        .collect()
}

/// Static compressor curve over [-80, 0] dB in 0.5 dB steps.
pub fn compressor_curve(p: &EffectParams) -> Vec<CurvePoint> {
    (0..=160)
        .map(|i| {
            let x = -80.0 + CURVE_STEP_DB * i as f64;
            CurvePoint {
                input_db: x,
                output_db: static_curve(x, &p.comp),
            }
        })
        .collect()
}

const W: f64 = 640.0;
const H: f64 = 400.0;
const MARGIN: f64 = 50.0;

/// Minimal SVG line chart.
pub fn svg_chart(title: &str, x_label: &str, y_label: &str, pts: &[(f64, f64)], log_x: bool) -> String {
    let tx = |x: f64| if log_x { x.log10() } else { x };
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in pts {
        x0 = x0.min(tx(x));
        x1 = x1.max(tx(x));
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if y1 - y0 < 1.0 {
        let mid = 0.5 * (y0 + y1);
        y0 = mid - 1.0;
        y1 = mid + 1.0;
    }
    if x1 <= x0 {
        x1 = x0 + 1.0;
    }
    let px = |x: f64| MARGIN + (tx(x) - x0) / (x1 - x0) * (W - 2.0 * MARGIN);
    let py = |y: f64| H - MARGIN - (y - y0) / (y1 - y0) * (H - 2.0 * MARGIN);
    let mut s = String::new();
    let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#
    );
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<rect x="{MARGIN}" y="{MARGIN}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        W - 2.0 * MARGIN,
        H - 2.0 * MARGIN
    );
    let _ = writeln!(s, r#"<text x="{}" y="30" text-anchor="middle" font-size="16">{}</text>"#, W / 2.0, escape(title));
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle" font-size="12">{}</text>"#,
        W / 2.0,
        H - 12.0,
        escape(x_label)
    );
    let _ = writeln!(
        s,
        r#"<text x="14" y="{}" text-anchor="middle" font-size="12" transform="rotate(-90 14 {})">{}</text>"#,
        H / 2.0,
        H / 2.0,
        escape(y_label)
    );
    let _ = writeln!(s, r#"<text x="{MARGIN}" y="{}" font-size="10">{:.1}</text>"#, MARGIN - 4.0, y1);
    let _ = writeln!(s, r#"<text x="{MARGIN}" y="{}" font-size="10">{:.1}</text>"#, H - MARGIN + 14.0, y0);
    let mut poly = String::new();
    for &(x, y) in pts {
        let _ = write!(poly, "{:.2},{:.2} ", px(x), py(y));
    }
    let _ = writeln!(
        s,
        r#"<polyline fill="none" stroke="steelblue" stroke-width="2" points="{}"/>"#,
        poly.trim_end()
    );
    s.push_str("</svg>\n");
    s
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

pub fn cmd_plot(a: &PlotArgs) -> Result<()> {
    let (p, file_rate) = load_params(&a.params)?;
    let fs = a.sample_rate.or(file_rate).unwrap_or(24000) as f64;
    let eq = eq_curve(&p, fs);
    let comp = compressor_curve(&p);
    write_csv(&a.out.join("eq_response.csv"), &eq, &["freq_hz", "gain_db"])?;
    write_csv(&a.out.join("compressor_curve.csv"), &comp, &["input_db", "output_db"])?;
    let eq_pts: Vec<(f64, f64)> = eq.iter().map(|e| (e.freq_hz, e.gain_db)).collect();
    let comp_pts: Vec<(f64, f64)> = comp.iter().map(|c| (c.input_db, c.output_db)).collect();
    write_atomic(
        &a.out.join("eq_response.svg"),
        svg_chart("Equalizer response", "Frequency (Hz)", "Gain (dB)", &eq_pts, true).as_bytes(),
    )?;
    write_atomic(
        &a.out.join("compressor_curve.svg"),
        svg_chart("Compressor static curve", "Input (dB)", "Output (dB)", &comp_pts, false).as_bytes(),
    )?;
    Ok(())
}
