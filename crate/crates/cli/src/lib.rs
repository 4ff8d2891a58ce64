//! Command implementations behind the `fxstyle` binary.

pub mod args;
pub mod bench;
pub mod data;
pub mod gradcheck;
pub mod output;
pub mod plot;
pub mod transfer;

use std::fs;

use anyhow::{Context, Result};

use args::Command;
use output::{now, write_json, RunManifest, MANIFEST_NAME};

/// Run one command and write its run manifest, also when it fails.
pub fn run(cmd: &Command) -> Result<()> {
    if let Command::Rerun(r) = cmd {
        let m = RunManifest::load(&r.manifest)?;
        let mut inner = m.to_command()?;
        if let Some(out) = &r.out {
            inner.set_out_dir(out.clone());
        }
        return run(&inner);
    }
    let out = cmd.out_dir().expect("every command but rerun has an output directory");
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let start = now();
    let result = execute(cmd);
    let manifest = RunManifest::new(cmd, start, now(), result.as_ref().err().map(|e| format!("{e:#}")))?;
    write_json(&out.join(MANIFEST_NAME), &manifest)?;
    result
}

fn execute(cmd: &Command) -> Result<()> {
    match cmd {
        Command::Transfer(a) => transfer::cmd_transfer(a).map(|_| ()),
        Command::Gradcheck(a) => gradcheck::cmd_gradcheck(a),
        Command::Bench(a) => bench::cmd_bench(a).map(|_| ()),
        Command::Datagen(a) => data::cmd_datagen(a).map(|_| ()),
        Command::Styles(a) => data::cmd_styles(a).map(|_| ()),
        Command::Eval(a) => data::cmd_eval(a).map(|_| ()),
        Command::Plot(a) => plot::cmd_plot(a),
        Command::Rerun(_) => unreachable!("handled by run"),
    }
}
