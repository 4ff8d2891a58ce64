//! Physical and normalized control parameters.
//!
//! Layout of the 22-vector:
//!
//! | idx | parameter |
//! |-----|-----------|
//! | 0–1 | low shelf gain, cutoff |
//! | 2–13 | peaking bands 1–4: gain, center, Q |
//! | 14–15 | high shelf gain, cutoff |
//! | 16–21 | threshold, ratio, attack, release, knee, makeup |

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const NUM_PARAMS: usize = 22;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShelfBand {
    pub gain_db: f64,
    pub cutoff_hz: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PeakBand {
    pub gain_db: f64,
    pub center_hz: f64,
    pub q: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EqParams {
    pub low_shelf: ShelfBand,
    pub peaks: [PeakBand; 4],
    pub high_shelf: ShelfBand,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompParams {
    pub threshold_db: f64,
    pub ratio: f64,
    pub attack_s: f64,
    pub release_s: f64,
    pub knee_db: f64,
    pub makeup_db: f64,
}

impl CompParams {
    pub fn validate(&self) -> Result<()> {
        let ok = self.ratio >= 1.0
            && self.attack_s > 0.0
            && self.release_s > 0.0
            && self.knee_db >= 0.0
            && [self.threshold_db, self.makeup_db].iter().all(|v| v.is_finite());
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParam(format!("invalid compressor settings {self:?}")))
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EffectParams {
    pub eq: EqParams,
    pub comp: CompParams,
}

impl EffectParams {
    /// Identity chain: flat EQ, unity ratio, no makeup.
    pub fn neutral() -> Self {
        denormalize(&NormalizedParams::neutral())
    }

    pub fn to_vector(&self) -> [f64; NUM_PARAMS] {
        let e = &self.eq;
        let c = &self.comp;
        let mut v = [0.0; NUM_PARAMS];
        v[0] = e.low_shelf.gain_db;
        v[1] = e.low_shelf.cutoff_hz;
        for (i, p) in e.peaks.iter().enumerate() {
            v[2 + 3 * i] = p.gain_db;
            v[3 + 3 * i] = p.center_hz;
            v[4 + 3 * i] = p.q;
        }
        v[14] = e.high_shelf.gain_db;
        v[15] = e.high_shelf.cutoff_hz;
        v[16] = c.threshold_db;
        v[17] = c.ratio;
        v[18] = c.attack_s;
        v[19] = c.release_s;
        v[20] = c.knee_db;
        v[21] = c.makeup_db;
        v
    }

    pub fn from_vector(v: &[f64; NUM_PARAMS]) -> Self {
        let peak = |i: usize| PeakBand {
            gain_db: v[2 + 3 * i],
            center_hz: v[3 + 3 * i],
            q: v[4 + 3 * i],
        };
        EffectParams {
            eq: EqParams {
                low_shelf: ShelfBand {
                    gain_db: v[0],
                    cutoff_hz: v[1],
                },
                peaks: [peak(0), peak(1), peak(2), peak(3)],
                high_shelf: ShelfBand {
                    gain_db: v[14],
                    cutoff_hz: v[15],
                },
            },
            comp: CompParams {
                threshold_db: v[16],
                ratio: v[17],
                attack_s: v[18],
                release_s: v[19],
                knee_db: v[20],
                makeup_db: v[21],
            },
        }
    }

    /// Check every entry lies in its denormalization range.
    pub fn validate(&self) -> Result<()> {
        normalize(self).map(|_| ())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ParamScale {
    Linear,
    Log,
}

#[derive(Clone, Copy, Debug)]
pub struct ParamSpec {
    pub name: &'static str,
    pub lo: f64,
    pub hi: f64,
    pub scale: ParamScale,
}

impl ParamSpec {
    const fn lin(name: &'static str, lo: f64, hi: f64) -> Self {
        Self {
            name,
            lo,
            hi,
            scale: ParamScale::Linear,
        }
    }

    const fn log(name: &'static str, lo: f64, hi: f64) -> Self {
        Self {
            name,
            lo,
            hi,
            scale: ParamScale::Log,
        }
    }

    pub fn denormalize(&self, v: f64) -> f64 {
        match self.scale {
            ParamScale::Linear => self.lo + v * (self.hi - self.lo),
            ParamScale::Log => self.lo * (self.hi / self.lo).powf(v),
        }
    }

    /// d(physical)/d(v) at `v`.
    pub fn slope(&self, v: f64) -> f64 {
        match self.scale {
            ParamScale::Linear => self.hi - self.lo,
            ParamScale::Log => self.denormalize(v) * (self.hi / self.lo).ln(),
        }
    }

    pub fn normalize(&self, x: f64) -> f64 {
        match self.scale {
            ParamScale::Linear => (x - self.lo) / (self.hi - self.lo),
            ParamScale::Log => (x / self.lo).ln() / (self.hi / self.lo).ln(),
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        let tol = 1e-9 * self.hi.abs().max(self.lo.abs()).max(1.0);
        x >= self.lo - tol && x <= self.hi + tol
    }
}

const GAIN: (f64, f64) = (-32.0, 32.0);
const PEAK_HZ: (f64, f64) = (100.0, 10_000.0);
const Q: (f64, f64) = (0.3, 6.0);

/// Denormalization ranges, in vector layout order.
pub const PARAM_SPECS: [ParamSpec; NUM_PARAMS] = [
    ParamSpec::lin("low_shelf.gain_db", GAIN.0, GAIN.1),
    ParamSpec::log("low_shelf.cutoff_hz", 30.0, 1000.0),
    ParamSpec::lin("peak1.gain_db", GAIN.0, GAIN.1),
    ParamSpec::log("peak1.center_hz", PEAK_HZ.0, PEAK_HZ.1),
    ParamSpec::log("peak1.q", Q.0, Q.1),
    ParamSpec::lin("peak2.gain_db", GAIN.0, GAIN.1),
    ParamSpec::log("peak2.center_hz", PEAK_HZ.0, PEAK_HZ.1),
    ParamSpec::log("peak2.q", Q.0, Q.1),
    ParamSpec::lin("peak3.gain_db", GAIN.0, GAIN.1),
    ParamSpec::log("peak3.center_hz", PEAK_HZ.0, PEAK_HZ.1),
    ParamSpec::log("peak3.q", Q.0, Q.1),
    ParamSpec::lin("peak4.gain_db", GAIN.0, GAIN.1),
    ParamSpec::log("peak4.center_hz", PEAK_HZ.0, PEAK_HZ.1),
    ParamSpec::log("peak4.q", Q.0, Q.1),
    ParamSpec::lin("high_shelf.gain_db", GAIN.0, GAIN.1),
    ParamSpec::log("high_shelf.cutoff_hz", 2000.0, 11_000.0),
    ParamSpec::lin("threshold_db", -60.0, 0.0),
    ParamSpec::lin("ratio", 1.0, 10.0),
    ParamSpec::log("attack_s", 0.0005, 0.1),
    ParamSpec::log("release_s", 0.005, 0.5),
    ParamSpec::lin("knee_db", 0.0, 12.0),
    ParamSpec::lin("makeup_db", 0.0, 12.0),
];

/// Control vector in the unit hypercube, the optimizer's search space.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NormalizedParams {
    v: [f64; NUM_PARAMS],
}

impl NormalizedParams {
    pub fn new(v: [f64; NUM_PARAMS]) -> Result<Self> {
        if let Some(i) = v.iter().position(|x| !(0.0..=1.0).contains(x)) {
            return Err(Error::InvalidParam(format!(
                "normalized {} = {} outside [0, 1]",
                PARAM_SPECS[i].name, v[i]
            )));
        }
        Ok(Self { v })
    }

    /// Clamp every entry into `[0, 1]` (NaN maps to 0).
    pub fn clamped(mut v: [f64; NUM_PARAMS]) -> Self {
        for x in v.iter_mut() {
            *x = if x.is_nan() { 0.0 } else { x.clamp(0.0, 1.0) };
        }
        Self { v }
    }

    /// Starting point for optimization: 0 dB on every band, unity ratio,
    /// no makeup. Peak centers are spread over the range so the four bands
    /// do not receive identical gradients.
    pub fn neutral() -> Self {
        let mut v = [0.5; NUM_PARAMS];
        for (i, c) in [0.2, 0.4, 0.6, 0.8].into_iter().enumerate() {
            v[3 + 3 * i] = c;
        }
        v[17] = 0.0; // ratio 1
        v[21] = 0.0; // makeup 0 dB
        Self { v }
    }

    pub fn as_array(&self) -> &[f64; NUM_PARAMS] {
        &self.v
    }

    pub fn get(&self, i: usize) -> f64 {
        self.v[i]
    }

    /// d(physical parameter i)/d(v[i]).
    pub fn slopes(&self) -> [f64; NUM_PARAMS] {
        let mut s = [0.0; NUM_PARAMS];
        for (i, spec) in PARAM_SPECS.iter().enumerate() {
            s[i] = spec.slope(self.v[i]);
        }
        s
    }
}

pub fn denormalize(v: &NormalizedParams) -> EffectParams {
    let mut p = [0.0; NUM_PARAMS];
    for (i, spec) in PARAM_SPECS.iter().enumerate() {
        p[i] = spec.denormalize(v.v[i]);
    }
    EffectParams::from_vector(&p)
}

pub fn normalize(p: &EffectParams) -> Result<NormalizedParams> {
    let x = p.to_vector();
    let mut v = [0.0; NUM_PARAMS];
    for (i, spec) in PARAM_SPECS.iter().enumerate() {
        if !spec.contains(x[i]) {
            return Err(Error::InvalidParam(format!(
                "{} = {} outside [{}, {}]",
                spec.name, x[i], spec.lo, spec.hi
            )));
        }
        v[i] = spec.normalize(x[i]).clamp(0.0, 1.0);
    }
    Ok(NormalizedParams { v })
}
