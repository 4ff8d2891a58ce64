use std::collections::BTreeMap;
use std::fs;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use fxstyle::audio::{read_wav, resample};
use fxstyle::datagen::{
    make_pair, read_manifest, render_style, resolve, sample_segment_origin, write_manifest, PairRecord,
    StylePreset,
};
use fxstyle::objective::{metric_report, MetricReport};
use fxstyle::par::{derive_seed, map_indexed, Execution};
use fxstyle::{AudioBuffer, EffectParams};
use serde::{Deserialize, Serialize};
use walkdir::WalkDir;

use crate::args::{Condition, DatagenArgs, EvalArgs, StyleSource, StylesArgs};
use crate::output::{write_atomic, write_csv, write_json, write_wav_atomic};
use crate::transfer::run_method;

pub const MANIFEST_FILE: &str = "manifest.jsonl";

/// WAV files under `dir`, sorted by path.
pub fn corpus_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    for entry in WalkDir::new(dir) {
        let entry = entry.with_context(|| format!("scanning {}", dir.display()))?;
        let is_wav = entry
            .path()
            .extension()
            .is_some_and(|e| e.eq_ignore_ascii_case("wav"));
        if entry.file_type().is_file() && is_wav {
            files.push(entry.into_path());
        }
    }
    files.sort();
    Ok(files)
}

pub fn cmd_datagen(a: &DatagenArgs) -> Result<Vec<PairRecord>> {
    let files = corpus_files(&a.corpus)?;
    if files.is_empty() {
        bail!("no WAV files under {}", a.corpus.display());
    }
    let corpus = files
        .iter()
        .map(|f| {
            let x = read_wav(f).with_context(|| format!("reading {}", f.display()))?;
            if x.sample_rate() == a.sample_rate {
                Ok(x)
            } else {
                Ok(resample(&x, a.sample_rate)?)
            }
        })
        .collect::<Result<Vec<AudioBuffer>>>()?;
    let half = (a.seconds * a.sample_rate as f64).round() as usize;
    let pairs = map_indexed(Execution::default(), a.n_pairs, |i| {
        let seed = derive_seed(a.seed, i as u64);
        let (segment, origin) = sample_segment_origin(&corpus, 2 * half, seed)?;
        Ok::<_, fxstyle::Error>((make_pair(&segment, seed)?, origin, seed))
    });
    fs::create_dir_all(&a.out)?;
    let mut records = Vec::with_capacity(a.n_pairs);
    for (i, r) in pairs.into_iter().enumerate() {
        let (pair, origin, seed) = r?;
        let name = |role: &str| format!("pair_{i:04}_{role}.wav");
        for (role, buf) in [("input", &pair.input), ("reference", &pair.reference), ("target", &pair.target)] {
            write_wav_atomic(&a.out.join(name(role)), buf, a.format.into())?;
        }
        records.push(PairRecord {
            source: files[origin.file_index].display().to_string(),
            offset: origin.offset,
            seed,
            truth_params: pair.truth_params,
            input: name("input"),
            reference: name("reference"),
            target: name("target"),
        });
    }
    let mut buf = Vec::new();
    write_manifest(&mut buf, &records)?;
    write_atomic(&a.out.join(MANIFEST_FILE), &buf)?;
    Ok(records)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StyleRender {
    pub style: String,
    pub seed: u64,
    pub params: EffectParams,
    pub wav: String,
}

pub fn cmd_styles(a: &StylesArgs) -> Result<Vec<StyleRender>> {
    let x = read_wav(&a.input).with_context(|| format!("reading {}", a.input.display()))?;
    let mut out = Vec::new();
    for (i, preset) in StylePreset::all().iter().enumerate() {
        let seed = derive_seed(a.seed, i as u64);
        let (y, params) = render_style(&x, preset, seed)?;
        let wav = format!("style_{}.wav", preset.name);
        write_wav_atomic(&a.out.join(&wav), &y, a.format.into())?;
        let r = StyleRender {
            style: preset.name.to_string(),
            seed,
            params,
            wav,
        };
        write_json(&a.out.join(format!("style_{}.json", preset.name)), &r)?;
        out.push(r);
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalRow {
    pub pair: usize,
    pub condition: String,
    pub mrstft: f64,
    pub msd: f64,
    pub sce: f64,
    pub rms_err: f64,
    pub lufs_err: f64,
}

pub const EVAL_HEADER: [&str; 7] = ["pair", "condition", "mrstft", "msd", "sce", "rms_err", "lufs_err"];

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ConditionMeans {
    pub pairs: usize,
    pub mrstft: f64,
    pub msd: f64,
    pub sce: f64,
    pub rms_err: f64,
    pub lufs_err: f64,
}

pub fn summarize(rows: &[EvalRow]) -> BTreeMap<String, ConditionMeans> {
    let mut out: BTreeMap<String, ConditionMeans> = BTreeMap::new();
    for r in rows {
        let m = out.entry(r.condition.clone()).or_default();
        m.pairs += 1;
        m.mrstft += r.mrstft;
        m.msd += r.msd;
        m.sce += r.sce;
        m.rms_err += r.rms_err;
        m.lufs_err += r.lufs_err;
    }
    for m in out.values_mut() {
        let n = m.pairs as f64;
        m.mrstft /= n;
        m.msd /= n;
        m.sce /= n;
        m.rms_err /= n;
        m.lufs_err /= n;
    }
    out
}

fn row(pair: usize, condition: Condition, m: MetricReport) -> EvalRow {
    EvalRow {
        pair,
        condition: condition.as_str().to_string(),
        mrstft: m.mrstft,
        msd: m.msd,
        sce: m.sce,
        rms_err: m.rms_err,
        lufs_err: m.lufs_err,
    }
}

pub fn cmd_eval(a: &EvalArgs) -> Result<Vec<EvalRow>> {
    let file = fs::File::open(&a.manifest).with_context(|| format!("opening {}", a.manifest.display()))?;
    let records = read_manifest(BufReader::new(file))?;
    let load = |rel: &str| -> Result<AudioBuffer> {
        let p = resolve(&a.manifest, rel);
        read_wav(&p).with_context(|| format!("reading {}", p.display()))
    };
    let mut rows = Vec::new();
    for (i, rec) in records.iter().enumerate() {
        let input = load(&rec.input)?;
        let target = load(&rec.target)?;
        let style = match a.style_from {
            StyleSource::Reference => load(&rec.reference)?,
            StyleSource::Target => target.clone(),
        };
        for &c in &a.conditions {
            let m = match c.method() {
                None if c == Condition::Input => metric_report(&input, &target)?,
                None => metric_report(&target, &target)?,
                Some(method) => {
                    let o = run_method(&input, &style, method, None, &a.opt)?;
                    metric_report(o.output(), &target)?
                }
            };
            rows.push(row(i, c, m));
        }
    }
    write_csv(&a.out.join("eval.csv"), &rows, &EVAL_HEADER)?;
    write_json(&a.out.join("eval_summary.json"), &summarize(&rows))?;
    Ok(rows)
}
