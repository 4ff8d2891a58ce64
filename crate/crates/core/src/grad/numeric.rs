//! Derivative-free gradient estimates.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{GradMethod, GradResult, LossFn};
use crate::effects::{NormalizedParams, NUM_PARAMS};
use crate::error::{Error, Result};
use crate::par::{map_indexed, Execution};

/// Evaluate at `v + d` and `v - d` clamped to the unit cube, returning both
/// points.
fn pair(v: &NormalizedParams, d: &[f64; NUM_PARAMS]) -> (NormalizedParams, NormalizedParams) {
    let mut p = *v.as_array();
    let mut m = *v.as_array();
    for i in 0..NUM_PARAMS {
        p[i] += d[i];
        m[i] -= d[i];
    }
    (NormalizedParams::clamped(p), NormalizedParams::clamped(m))
}

/// Central differences per coordinate (`2 * 22` evaluations). At the cube
/// boundary the step is one-sided and the actual spacing is used. The
/// reported loss is the mean of the evaluations, accurate to `O(h^2)`.
pub fn fd_gradient<L: LossFn + ?Sized>(
    f: &L,
    v: &NormalizedParams,
    h: f64,
    exec: Execution,
) -> Result<GradResult> {
    if !(h > 0.0 && h < 0.5) {
        return Err(Error::InvalidParam(format!("finite-difference step {h}")));
    }
    let evals = map_indexed(exec, 2 * NUM_PARAMS, |j| {
        let mut d = [0.0; NUM_PARAMS];
        d[j / 2] = h;
        let (p, m) = pair(v, &d);
        f.loss(if j % 2 == 0 { &p } else { &m })
    });
    let evals: Vec<f64> = evals.into_iter().collect::<Result<_>>()?;
    let mut grad = [0.0; NUM_PARAMS];
    for i in 0..NUM_PARAMS {
        let mut d = [0.0; NUM_PARAMS];
        d[i] = h;
        let (p, m) = pair(v, &d);
        grad[i] = (evals[2 * i] - evals[2 * i + 1]) / (p.get(i) - m.get(i));
    }
    Ok(GradResult {
        loss: evals.iter().sum::<f64>() / evals.len() as f64,
        grad,
        method: GradMethod::Fd,
        evals: 2 * NUM_PARAMS,
    })
}

/// Rademacher perturbation number `j` of the stream selected by `seed`.
pub fn spsa_perturbation(seed: u64, j: usize) -> [f64; NUM_PARAMS] {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(j as u64);
    let mut d = [0.0; NUM_PARAMS];
    for x in d.iter_mut() {
        *x = if rng.random::<bool>() { 1.0 } else { -1.0 };
    }
    d
}

/// Average of `n_avg` two-sided simultaneous-perturbation estimates, each
/// with its own perturbation. Deterministic in `seed` regardless of the
/// execution mode. The reported loss is the mean of the perturbed
/// evaluations.
pub fn spsa_gradient<L: LossFn + ?Sized>(
    f: &L,
    v: &NormalizedParams,
    epsilon: f64,
    n_avg: usize,
    seed: u64,
    exec: Execution,
) -> Result<GradResult> {
    if !(epsilon > 0.0) {
        return Err(Error::InvalidParam(format!("SPSA epsilon {epsilon}")));
    }
    if n_avg == 0 {
        return Err(Error::InvalidParam("SPSA needs at least one average".into()));
    }
    let estimates = map_indexed(exec, n_avg, |j| -> Result<([f64; NUM_PARAMS], f64)> {
        let delta = spsa_perturbation(seed, j);
        let d = delta.map(|x| x * epsilon);
        let (p, m) = pair(v, &d);
        let (lp, lm) = (f.loss(&p)?, f.loss(&m)?);
        let mut g = [0.0; NUM_PARAMS];
        for i in 0..NUM_PARAMS {
            g[i] = (lp - lm) / (p.get(i) - m.get(i));
        }
        Ok((g, 0.5 * (lp + lm)))
    });
    let mut grad = [0.0; NUM_PARAMS];
    let mut loss = 0.0;
    for e in estimates {
        let (g, l) = e?;
        for i in 0..NUM_PARAMS {
            grad[i] += g[i];
        }
        loss += l;
    }
    let k = 1.0 / n_avg as f64;
    Ok(GradResult {
        loss: loss * k,
        grad: grad.map(|g| g * k),
        method: GradMethod::Spsa,
        evals: 2 * n_avg,
    })
}
