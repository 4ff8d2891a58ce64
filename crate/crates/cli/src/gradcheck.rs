use anyhow::{bail, Result};
use fxstyle::effects::PARAM_SPECS;
use fxstyle::fixtures::white_noise;
use fxstyle::grad::{cosine_similarity, fd_gradient, spsa_gradient, StyleObjective, FD_STEP};
use fxstyle::par::{derive_seed, Execution};
use fxstyle::{NormalizedParams, NUM_PARAMS};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::args::GradcheckArgs;
use crate::output::write_csv;

pub const REL_TOLERANCE: f64 = 1e-3;
pub const MIN_MAGNITUDE: f64 = 1e-6;
pub const MIN_COSINE: f64 = 0.9;
/// Central-difference step of the exactness oracle.
pub const ORACLE_STEP: f64 = 1e-7;
/// Second step used to tell whether the oracle is trustworthy at a point.
pub const STABILITY_STEP: f64 = 1e-6;
pub const STABILITY_TOL: f64 = 1e-4;
/// Largest share of significant entries that may be skipped as unstable.
pub const MAX_UNSTABLE_FRACTION: f64 = 0.15;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckRow {
    pub case: usize,
    pub check: &'static str,
    pub parameter: &'static str,
    pub value: f64,
    pub reference: f64,
    /// Relative error for `exact`, cosine similarity for `spsa`.
    pub score: f64,
    /// False where the two difference steps disagree (a kink in the loss).
    pub stable: bool,
    pub checked: bool,
    pub pass: bool,
}

pub const HEADER: [&str; 9] = [
    "case", "check", "parameter", "value", "reference", "score", "stable", "checked", "pass",
];

/// Random fixture: a 0.5 s noise input, an independent noise reference at
/// a random level, and a random evaluation point.
pub fn fixture(seed: u64, case: usize, seconds: f64, fs: u32) -> Result<(StyleObjective, NormalizedParams)> {
    let s = derive_seed(seed, case as u64);
    let mut rng = ChaCha8Rng::seed_from_u64(s);
    let len = (seconds * fs as f64).round() as usize;
    let x = white_noise(len, fs, 0.5, s);
    let reference = white_noise(len, fs, 0.5, s ^ 1).scaled(rng.random_range(0.1..1.0));
    let mut v = [0.0; NUM_PARAMS];
    for e in v.iter_mut() {
        *e = rng.random_range(0.0..1.0);
    }
    Ok((StyleObjective::new(&x, &reference)?, NormalizedParams::clamped(v)))
}

pub fn exact_rows(case: usize, obj: &StyleObjective, v: &NormalizedParams, corrupt: bool) -> Result<Vec<CheckRow>> {
    let (_, mut exact) = obj.loss_and_grad(v)?;
    if corrupt {
        for g in exact.iter_mut() {
            *g *= 1.1;
        }
    }
    let fd = fd_gradient(obj, v, ORACLE_STEP, Execution::default())?.grad;
    let fd_wide = fd_gradient(obj, v, STABILITY_STEP, Execution::default())?.grad;
    Ok((0..NUM_PARAMS)
        .map(|i| {
            let stable = (fd[i] - fd_wide[i]).abs() <= STABILITY_TOL * fd[i].abs();
            let checked = stable && fd[i].abs() > MIN_MAGNITUDE;
            let score = (exact[i] - fd[i]).abs() / fd[i].abs().max(f64::MIN_POSITIVE);
            CheckRow {
                case,
                check: "exact",
                parameter: PARAM_SPECS[i].name,
                value: exact[i],
                reference: fd[i],
                score,
                stable,
                checked,
                pass: !checked || score < REL_TOLERANCE,
            }
        })
        .collect())
}

/// Share of entries above the magnitude floor that were skipped as unstable.
pub fn unstable_fraction(rows: &[CheckRow]) -> f64 {
    let significant: Vec<&CheckRow> = rows
        .iter()
        .filter(|r| r.check == "exact" && r.reference.abs() > MIN_MAGNITUDE)
        .collect();
    if significant.is_empty() {
        return 0.0;
    }
    significant.iter().filter(|r| !r.stable).count() as f64 / significant.len() as f64
}

pub fn spsa_row(
    case: usize,
    obj: &StyleObjective,
    v: &NormalizedParams,
    eps: f64,
    n_avg: usize,
    seed: u64,
) -> Result<CheckRow> {
    let fd = fd_gradient(obj, v, FD_STEP, Execution::default())?.grad;
    let sp = spsa_gradient(obj, v, eps, n_avg, derive_seed(seed, case as u64), Execution::default())?.grad;
    let cos = cosine_similarity(&sp, &fd);
    Ok(CheckRow {
        case,
        check: "spsa",
        parameter: "cosine",
        value: cos,
        reference: MIN_COSINE,
        score: cos,
        stable: true,
        checked: true,
        pass: cos > MIN_COSINE,
    })
}

pub fn cmd_gradcheck(a: &GradcheckArgs) -> Result<()> {
    let mut rows = Vec::new();
    for case in 0..a.n_cases {
        let (obj, v) = fixture(a.seed, case, a.seconds, a.sample_rate)?;
        rows.extend(exact_rows(case, &obj, &v, a.corrupt_gradient)?);
    }
    for case in 0..a.spsa_cases.unwrap_or(a.n_cases) {
        let (obj, v) = fixture(a.seed, case, a.seconds, a.sample_rate)?;
        rows.push(spsa_row(case, &obj, &v, a.spsa_eps, a.spsa_avg, a.seed)?);
    }
    write_csv(&a.out.join("gradcheck.csv"), &rows, &HEADER)?;
    let failed: Vec<String> = rows
        .iter()
        .filter(|r| !r.pass)
        .map(|r| format!("case {} {} {} ({:.3e})", r.case, r.check, r.parameter, r.score))
        .collect();
    if !failed.is_empty() {
        bail!("gradient check failed for {} entries: {}", failed.len(), failed.join(", "));
    }
    let unstable = unstable_fraction(&rows);
    if unstable > MAX_UNSTABLE_FRACTION {
        bail!("finite differences unstable on {:.1}% of entries", 100.0 * unstable);
    }
    Ok(())
}
