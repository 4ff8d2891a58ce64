//! Gradients of the training loss with respect to the 22 normalized
//! parameters: exact (adjoint), central finite differences and SPSA, plus the
//! per-example optimizer.

mod exact;
mod numeric;
mod optim;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::audio::AudioBuffer;
use crate::effects::{NormalizedParams, NUM_PARAMS};
use crate::error::{Error, Result};
use crate::par::Execution;

pub use exact::StyleObjective;
pub use numeric::{fd_gradient, spsa_gradient, spsa_perturbation};
pub use optim::{adam_descent, optimize_objective, optimize_style, OptimizerConfig, Trajectory, TrajectoryPoint};

/// Scalar objective over the normalized parameter vector.
pub trait LossFn: Sync {
    fn loss(&self, v: &NormalizedParams) -> Result<f64>;
}

impl<F> LossFn for F
where
    F: Fn(&NormalizedParams) -> Result<f64> + Sync,
{
    fn loss(&self, v: &NormalizedParams) -> Result<f64> {
        self(v)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GradMethod {
    Exact,
    Fd,
    Spsa,
}

impl fmt::Display for GradMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GradMethod::Exact => "exact",
            GradMethod::Fd => "fd",
            GradMethod::Spsa => "spsa",
        })
    }
}

impl FromStr for GradMethod {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "exact" => Ok(GradMethod::Exact),
            "fd" => Ok(GradMethod::Fd),
            "spsa" => Ok(GradMethod::Spsa),
            _ => Err(Error::InvalidParam(format!("unknown gradient method '{s}'"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GradResult {
    pub loss: f64,
    pub grad: [f64; NUM_PARAMS],
    pub method: GradMethod,
    /// Chain evaluations consumed.
    pub evals: usize,
}

/// Default central-difference step in normalized units.
pub const FD_STEP: f64 = 1e-4;

pub fn loss_grad_exact(x: &AudioBuffer, reference: &AudioBuffer, v: &NormalizedParams) -> Result<GradResult> {
    let obj = StyleObjective::new(x, reference)?;
    let (loss, grad) = obj.loss_and_grad(v)?;
    Ok(GradResult {
        loss,
        grad,
        method: GradMethod::Exact,
        evals: 1,
    })
}

pub fn loss_grad_fd(
    x: &AudioBuffer,
    reference: &AudioBuffer,
    v: &NormalizedParams,
    h: f64,
) -> Result<GradResult> {
    let obj = StyleObjective::new(x, reference)?;
    fd_gradient(&obj, v, h, Execution::default())
}

pub fn loss_grad_spsa(
    x: &AudioBuffer,
    reference: &AudioBuffer,
    v: &NormalizedParams,
    epsilon: f64,
    n_avg: usize,
    seed: u64,
) -> Result<GradResult> {
    let obj = StyleObjective::new(x, reference)?;
    spsa_gradient(&obj, v, epsilon, n_avg, seed, Execution::default())
}

/// Cosine similarity of two gradient vectors (0 if either is zero).
pub fn cosine_similarity(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        dot / (na * nb)
    }
}
