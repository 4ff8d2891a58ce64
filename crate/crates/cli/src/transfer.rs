use anyhow::{Context, Result};
use fxstyle::audio::{read_wav, resample};
use fxstyle::baseline::{rb_style_transfer, BaselineReport};
use fxstyle::effects::{denormalize, process_chain};
use fxstyle::grad::{optimize_style, Trajectory};
use fxstyle::objective::{non_intrusive_report, NonIntrusiveReport};
use fxstyle::{AudioBuffer, EffectParams, GradMethod, NormalizedParams, OptimizerConfig, Path, NUM_PARAMS};
use serde::{Deserialize, Serialize};

use crate::args::{Method, OptArgs, TransferArgs};
use crate::output::{write_atomic, write_json, write_wav_atomic};

/// Parameter report of a gradient-method transfer.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransferReport {
    pub method: GradMethod,
    pub sample_rate: u32,
    pub steps: usize,
    pub initial_loss: f64,
    pub best_loss: f64,
    pub final_loss: f64,
    pub evals: usize,
    pub normalized: [f64; NUM_PARAMS],
    pub params: EffectParams,
}

pub enum Outcome {
    Gradient {
        output: AudioBuffer,
        report: TransferReport,
        trajectory: Trajectory,
    },
    Baseline {
        output: AudioBuffer,
        report: BaselineReport,
    },
}

impl Outcome {
    pub fn output(&self) -> &AudioBuffer {
        match self {
            Outcome::Gradient { output, .. } | Outcome::Baseline { output, .. } => output,
        }
    }
}

pub fn optimizer_config(method: GradMethod, opt: &OptArgs) -> OptimizerConfig {
    let mut cfg = OptimizerConfig::new(method, opt.steps);
    if let Some(lr) = opt.lr {
        cfg.step_size = lr;
    }
    cfg.spsa_epsilon = opt.spsa_eps;
    cfg.spsa_averages = opt.spsa_avg;
    cfg.seed = opt.seed;
    cfg
}

fn at_rate(x: &AudioBuffer, rate: u32) -> Result<AudioBuffer> {
    if x.sample_rate() == rate {
        Ok(x.clone())
    } else {
        Ok(resample(x, rate)?)
    }
}

/// Fit `method` so that `input` takes on the style of `reference` and render
/// the result at the input's rate. Gradient methods compare signals at
/// `analysis_rate` with the reference trimmed or padded to the input length.
pub fn run_method(
    input: &AudioBuffer,
    reference: &AudioBuffer,
    method: Method,
    analysis_rate: Option<u32>,
    opt: &OptArgs,
) -> Result<Outcome> {
    match method.gradient() {
        Some(g) => {
            let rate = analysis_rate.unwrap_or(input.sample_rate());
            let x = at_rate(input, rate)?;
            let r = at_rate(reference, rate)?.fit_to(x.len());
            let cfg = optimizer_config(g, opt);
            let trajectory = optimize_style(&x, &r, NormalizedParams::neutral(), &cfg)?;
            let params = denormalize(&trajectory.best);
            let output = process_chain(input, &params, Path::Reference);
            let report = TransferReport {
                method: g,
                sample_rate: rate,
                steps: opt.steps,
                initial_loss: trajectory.initial_loss(),
                best_loss: trajectory.best_loss,
                final_loss: trajectory.final_loss(),
                evals: trajectory.evals,
                normalized: *trajectory.best.as_array(),
                params,
            };
            Ok(Outcome::Gradient {
                output,
                report,
                trajectory,
            })
        }
        None => {
            let r = at_rate(reference, input.sample_rate())?;
            let (output, report) = rb_style_transfer(input, &r)?;
            Ok(Outcome::Baseline { output, report })
        }
    }
}

pub fn cmd_transfer(a: &TransferArgs) -> Result<NonIntrusiveReport> {
    let input = read_wav(&a.input).with_context(|| format!("reading {}", a.input.display()))?;
    let reference = read_wav(&a.reference).with_context(|| format!("reading {}", a.reference.display()))?;
    let outcome = run_method(&input, &reference, a.method, a.sample_rate, &a.opt)?;
    let metrics = non_intrusive_report(outcome.output(), &reference)?;
    write_wav_atomic(&a.out.join("output.wav"), outcome.output(), a.format.into())?;
    match &outcome {
        Outcome::Gradient { report, trajectory, .. } => {
            write_json(&a.out.join("params.json"), report)?;
            write_atomic(&a.out.join("trajectory.csv"), trajectory.to_csv().as_bytes())?;
        }
        Outcome::Baseline { report, .. } => write_json(&a.out.join("baseline_report.json"), report)?,
    }
    write_json(&a.out.join("metrics.json"), &metrics)?;
    Ok(metrics)
}
