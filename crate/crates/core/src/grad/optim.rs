//! Per-example parameter estimation by Adam descent in the unit cube.

use serde::{Deserialize, Serialize};

use super::{fd_gradient, spsa_gradient, GradMethod, GradResult, StyleObjective, FD_STEP};
use crate::audio::AudioBuffer;
use crate::effects::{NormalizedParams, NUM_PARAMS, PARAM_SPECS};
use crate::error::{Error, Result};
use crate::par::{derive_seed, Execution};

const BETA1: f64 = 0.9;
const BETA2: f64 = 0.999;
const ADAM_EPS: f64 = 1e-8;
const CLIP_NORM: f64 = 4.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    pub method: GradMethod,
    pub steps: usize,
    pub step_size: f64,
    pub spsa_epsilon: f64,
    pub spsa_averages: usize,
    pub seed: u64,
    #[serde(default = "default_fd_step")]
    pub fd_step: f64,
    #[serde(skip)]
    pub execution: Execution,
}

fn default_fd_step() -> f64 {
    FD_STEP
}

impl OptimizerConfig {
    /// Defaults for a method: step size 1e-2, or 1e-3 for SPSA.
    pub fn new(method: GradMethod, steps: usize) -> Self {
        Self {
            method,
            steps,
            step_size: match method {
                GradMethod::Spsa => 1e-3,
                _ => 1e-2,
            },
            spsa_epsilon: 0.0005,
            spsa_averages: 1,
            seed: 0,
            fd_step: FD_STEP,
            execution: Execution::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.steps == 0 {
            return Err(Error::InvalidParam("steps must be at least 1".into()));
        }
        if !(self.step_size > 0.0 && self.step_size.is_finite()) {
            return Err(Error::InvalidParam(format!("step size {}", self.step_size)));
        }
        if !(self.spsa_epsilon > 0.0) {
            return Err(Error::InvalidParam(format!("SPSA epsilon {}", self.spsa_epsilon)));
        }
        if self.spsa_averages == 0 {
            return Err(Error::InvalidParam("SPSA averages must be at least 1".into()));
        }
        Ok(())
    }

    /// Step size at `step`, divided by 10 from 80% and again from 95% of the run.
    pub fn step_size_at(&self, step: usize) -> f64 {
        let s = self.steps as f64;
        let t = step as f64;
        let mut lr = self.step_size;
        if t >= 0.8 * s {
            lr *= 0.1;
        }
        if t >= 0.95 * s {
            lr *= 0.1;
        }
        lr
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrajectoryPoint {
    pub step: usize,
    pub loss: f64,
    pub params: NormalizedParams,
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    pub points: Vec<TrajectoryPoint>,
    /// Lowest-loss iterate.
    pub best: NormalizedParams,
    pub best_loss: f64,
    pub evals: usize,
}

impl Trajectory {
    pub fn initial_loss(&self) -> f64 {
        self.points[0].loss
    }

    pub fn final_loss(&self) -> f64 {
        self.points.last().map_or(f64::NAN, |p| p.loss)
    }

    /// `step,loss,<22 parameter names>` with one row per iterate.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("step,loss");
        for spec in PARAM_SPECS.iter() {
            s.push(',');
            s.push_str(spec.name);
        }
        s.push('\n');
        for p in &self.points {
            s.push_str(&format!("{},{}", p.step, p.loss));
            for v in p.params.as_array() {
                s.push_str(&format!(",{v}"));
            }
            s.push('\n');
        }
        s
    }
}

/// Adam on `v` with clipping and clamping. `grad_fn(v, step)` returns the
/// loss at `v` and a gradient. After the last update the loss is evaluated
/// once more with `loss_fn`.
pub fn adam_descent<G, L>(
    init: NormalizedParams,
    cfg: &OptimizerConfig,
    mut grad_fn: G,
    loss_fn: L,
) -> Result<Trajectory>
where
    G: FnMut(&NormalizedParams, usize) -> Result<GradResult>,
    L: Fn(&NormalizedParams) -> Result<f64>,
{
    cfg.validate()?;
    let mut v = init;
    let mut m = [0.0; NUM_PARAMS];
    let mut s = [0.0; NUM_PARAMS];
    let mut points = Vec::with_capacity(cfg.steps + 1);
    let mut evals = 0;
    let check = |loss: f64, step: usize| {
        if loss.is_finite() {
            Ok(())
        } else {
            Err(Error::NonFiniteValue(format!("loss {loss} at step {step}")))
        }
    };
    for step in 0..cfg.steps {
        let r = grad_fn(&v, step)?;
        check(r.loss, step)?;
        evals += r.evals;
        points.push(TrajectoryPoint {
            step,
            loss: r.loss,
            params: v,
        });
        let mut g = r.grad;
        let norm = g.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > CLIP_NORM {
            let k = CLIP_NORM / norm;
            g.iter_mut().for_each(|x| *x *= k);
        }
        let lr = cfg.step_size_at(step);
        let t = (step + 1) as i32;
        let (c1, c2) = (1.0 - BETA1.powi(t), 1.0 - BETA2.powi(t));
        let mut next = *v.as_array();
        for i in 0..NUM_PARAMS {
            m[i] = BETA1 * m[i] + (1.0 - BETA1) * g[i];
            s[i] = BETA2 * s[i] + (1.0 - BETA2) * g[i] * g[i];
            next[i] -= lr * (m[i] / c1) / ((s[i] / c2).sqrt() + ADAM_EPS);
        }
        v = NormalizedParams::clamped(next);
    }
    let last = loss_fn(&v)?;
    check(last, cfg.steps)?;
    evals += 1;
    points.push(TrajectoryPoint {
        step: cfg.steps,
        loss: last,
        params: v,
    });
    let best = points
        .iter()
        .fold(None::<&TrajectoryPoint>, |b, p| match b {
            Some(b) if b.loss <= p.loss => Some(b),
            _ => Some(p),
        })
        .expect("at least one point");
    Ok(Trajectory {
        best: best.params,
        best_loss: best.loss,
        points,
        evals,
    })
}


/// Fit the chain so that `chain(x)` matches `reference`.
pub fn optimize_style(
    x: &AudioBuffer,
    reference: &AudioBuffer,
    init: NormalizedParams,
    cfg: &OptimizerConfig,
) -> Result<Trajectory> {
    let obj = StyleObjective::new(x, reference)?;
    optimize_objective(&obj, init, cfg)
}

/// As [`optimize_style`] on a prepared objective.
pub fn optimize_objective(
    obj: &StyleObjective,
    init: NormalizedParams,
    cfg: &OptimizerConfig,
) -> Result<Trajectory> {
    let grad_fn = |v: &NormalizedParams, step: usize| -> Result<GradResult> {
        match cfg.method {
            GradMethod::Exact => {
                let (loss, grad) = obj.loss_and_grad(v)?;
                Ok(GradResult {
                    loss,
                    grad,
                    method: GradMethod::Exact,
                    evals: 1,
                })
            }
            GradMethod::Fd => fd_gradient(obj, v, cfg.fd_step, cfg.execution),
            GradMethod::Spsa => {
                let mut r = spsa_gradient(
                    obj,
                    v,
                    cfg.spsa_epsilon,
                    cfg.spsa_averages,
                    derive_seed(cfg.seed, step as u64),
                    cfg.execution,
                )?;
                // the perturbed mean is only an estimate of the loss at v
                r.loss = obj.loss(v)?;
                r.evals += 1;
                Ok(r)
            }
        }
    };
    adam_descent(init, cfg, grad_fn, |v| obj.loss(v))
}
