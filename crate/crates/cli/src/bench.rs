use std::time::Instant;

use anyhow::Result;
use fxstyle::effects::{denormalize, process_chain};
use fxstyle::fixtures::speech_like;
use fxstyle::grad::{fd_gradient, spsa_gradient, StyleObjective, FD_STEP};
use fxstyle::par::Execution;
use fxstyle::{GradMethod, NormalizedParams, Path};
use serde::Serialize;

use crate::args::BenchArgs;
use crate::output::write_csv;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BenchRow {
    pub method: String,
    pub n_iters: usize,
    pub samples: usize,
    pub evals_per_gradient: usize,
    pub gradient_s: f64,
    pub evals_per_s: f64,
    pub render_s: f64,
    pub real_time_factor: f64,
}

pub const HEADER: [&str; 8] = [
    "method",
    "n_iters",
    "samples",
    "evals_per_gradient",
    "gradient_s",
    "evals_per_s",
    "render_s",
    "real_time_factor",
];

pub fn cmd_bench(a: &BenchArgs) -> Result<BenchRow> {
    let method: GradMethod = a.method.into();
    let len = (a.seconds * a.sample_rate as f64).round() as usize;
    let x = speech_like(len, a.sample_rate, a.seed);
    let truth = NormalizedParams::clamped([0.3; 22]);
    let reference = process_chain(&x, &denormalize(&truth), Path::Reference);
    let obj = StyleObjective::new(&x, &reference)?;
    let v = NormalizedParams::neutral();
    let n = a.n_iters.max(1);

    let mut evals = 0;
    let t = Instant::now();
    for i in 0..n {
        evals = match method {
            GradMethod::Exact => {
                obj.loss_and_grad(&v)?;
                1
            }
            GradMethod::Fd => fd_gradient(&obj, &v, FD_STEP, Execution::default())?.evals,
            GradMethod::Spsa => {
                spsa_gradient(&obj, &v, 0.0005, a.spsa_avg, a.seed + i as u64, Execution::default())?.evals
            }
        };
    }
    let gradient_s = t.elapsed().as_secs_f64() / n as f64;

    let p = denormalize(&truth);
    let t = Instant::now();
    for _ in 0..n {
        std::hint::black_box(process_chain(&x, &p, Path::Differentiable));
    }
    let render_s = t.elapsed().as_secs_f64() / n as f64;

    let row = BenchRow {
        method: method.to_string(),
        n_iters: n,
        samples: len,
        evals_per_gradient: evals,
        gradient_s,
        evals_per_s: evals as f64 / gradient_s,
        render_s,
        real_time_factor: render_s / a.seconds,
    };
    write_csv(&a.out.join("bench.csv"), std::slice::from_ref(&row), &HEADER)?;
    Ok(row)
}
