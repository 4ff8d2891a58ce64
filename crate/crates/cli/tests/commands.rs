use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use fxstyle::audio::write_wav;
use fxstyle::datagen::{read_manifest, StylePreset};
use fxstyle::effects::PARAM_SPECS;
use fxstyle::fixtures::speech_like;
use fxstyle::{EffectParams, WavFormat};
use serde_json::Value;
use tempfile::TempDir;

fn fxstyle(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fxstyle"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> Output {
    let o = fxstyle(args);
    assert!(
        o.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&o.stderr)
    );
    o
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn speech_wav(dir: &Path, name: &str, seconds: f64, seed: u64) -> PathBuf {
    let p = dir.join(name);
    let x = speech_like((seconds * 24000.0) as usize, 24000, seed);
    write_wav(&x, &p, WavFormat::Float32).unwrap();
    p
}

fn read_json(p: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(p).unwrap()).unwrap()
}

fn csv_rows(p: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_path(p).unwrap();
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|rec| rec.unwrap().iter().map(String::from).collect())
        .collect();
    (header, rows)
}

#[test]
fn gradcheck_without_cases_writes_header_only() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("gc");
    ok(&["gradcheck", "--n-cases", "0", "--out", s(&out)]);
    let text = fs::read_to_string(out.join("gradcheck.csv")).unwrap();
    assert_eq!(text.lines().count(), 1);
    assert!(text.starts_with("case,check,parameter"));
    assert!(out.join("run_manifest.json").exists());
}

#[test]
fn gradcheck_flags_a_corrupted_gradient() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("gc");
    let o = fxstyle(&[
        "gradcheck",
        "--n-cases",
        "1",
        "--spsa-cases",
        "0",
        "--corrupt-gradient",
        "--out",
        s(&out),
    ]);
    assert!(!o.status.success());
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("gradient check failed"), "{err}");
    assert!(err.contains("low_shelf.gain_db"), "{err}");
    let m = read_json(&out.join("run_manifest.json"));
    assert!(m["error"].is_string());
}

#[test]
fn gradcheck_default_run_passes() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("gc");
    ok(&["gradcheck", "--out", s(&out)]);
    let (_, rows) = csv_rows(&out.join("gradcheck.csv"));
    assert_eq!(rows.len(), 5 * 22 + 5);
    assert!(rows.iter().all(|r| r[8] == "true"));
}

#[test]
fn bench_counts_evaluations() {
    let tmp = TempDir::new().unwrap();
    for (method, evals) in [("exact", "1"), ("fd", "44"), ("spsa", "8")] {
        let out = tmp.path().join(method);
        ok(&[
            "bench", "--method", method, "--n-iters", "1", "--seconds", "0.25", "--spsa-avg", "4", "--out",
            s(&out),
        ]);
        let (header, rows) = csv_rows(&out.join("bench.csv"));
        assert_eq!(header[3], "evals_per_gradient");
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0][3], evals, "{method}");
        let rtf: f64 = rows[0][7].parse().unwrap();
        assert!(rtf > 0.0 && rtf.is_finite());
    }
}

#[test]
fn datagen_writes_pairs_deterministically() {
    let tmp = TempDir::new().unwrap();
    let corpus = tmp.path().join("corpus");
    fs::create_dir_all(corpus.join("nested")).unwrap();
    speech_wav(&corpus, "a.wav", 3.0, 1);
    speech_wav(&corpus.join("nested"), "b.wav", 3.0, 2);
    let run = |name: &str| {
        let out = tmp.path().join(name);
        ok(&[
            "datagen", s(&corpus), "--n-pairs", "3", "--seconds", "1", "--seed", "7", "--out", s(&out),
        ]);
        out
    };
    let a = run("a");
    let b = run("b");
    let manifest = fs::read(a.join("manifest.jsonl")).unwrap();
    assert_eq!(manifest, fs::read(b.join("manifest.jsonl")).unwrap());
    assert_eq!(String::from_utf8_lossy(&manifest).lines().count(), 3);
    let wavs = fs::read_dir(&a)
        .unwrap()
        .filter(|e| e.as_ref().unwrap().path().extension().is_some_and(|x| x == "wav"))
        .count();
    assert_eq!(wavs, 9);
    let records = read_manifest(manifest.as_slice()).unwrap();
    for r in &records {
        assert_eq!(fs::read(a.join(&r.target)).unwrap(), fs::read(b.join(&r.target)).unwrap());
        r.truth_params.validate().unwrap();
    }
}

#[test]
fn datagen_rejects_empty_corpus() {
    let tmp = TempDir::new().unwrap();
    let o = fxstyle(&["datagen", s(tmp.path()), "--out", s(&tmp.path().join("out"))]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("no WAV files"));
}

#[test]
fn style_renders_respect_preset_ranges() {
    let tmp = TempDir::new().unwrap();
    let input = speech_wav(tmp.path(), "in.wav", 1.0, 3);
    let out = tmp.path().join("styles");
    ok(&["styles", s(&input), "--seed", "5", "--out", s(&out)]);
    for preset in StylePreset::all() {
        let j = read_json(&out.join(format!("style_{}.json", preset.name)));
        let p: EffectParams = serde_json::from_value(j["params"].clone()).unwrap();
        for (i, (&x, &(lo, hi))) in p.to_vector().iter().zip(&preset.ranges).enumerate() {
            assert!(
                x >= lo - 1e-9 && x <= hi + 1e-9,
                "{} {} = {x} outside [{lo}, {hi}]",
                preset.name,
                PARAM_SPECS[i].name
            );
        }
        assert!(out.join(format!("style_{}.wav", preset.name)).exists());
    }
}

#[test]
fn transfer_onto_itself_stays_neutral() {
    let tmp = TempDir::new().unwrap();
    let input = speech_wav(tmp.path(), "in.wav", 1.0, 4);
    let out = tmp.path().join("t");
    ok(&["transfer", s(&input), s(&input), "--method", "exact", "--steps", "100", "--out", s(&out)]);
    let report = read_json(&out.join("params.json"));
    let neutral = fxstyle::NormalizedParams::neutral();
    for (i, (got, want)) in report["normalized"]
        .as_array()
        .unwrap()
        .iter()
        .zip(neutral.as_array())
        .enumerate()
    {
        let got = got.as_f64().unwrap();
        assert!((got - want).abs() < 0.05, "{} moved to {got}", PARAM_SPECS[i].name);
    }
    let (header, rows) = csv_rows(&out.join("trajectory.csv"));
    assert_eq!(header.len(), 24);
    assert_eq!(rows.len(), 101);
    let metrics = read_json(&out.join("metrics.json"));
    assert!(metrics["lufs_err"].as_f64().unwrap() < 0.1);
}

#[test]
fn broadcast_reference_reports_more_compression_than_warm() {
    let tmp = TempDir::new().unwrap();
    let input = speech_wav(tmp.path(), "in.wav", 2.0, 6);
    let styles = tmp.path().join("styles");
    ok(&["styles", s(&input), "--out", s(&styles)]);
    let ratio = |style: &str| {
        let out = tmp.path().join(style);
        let r = styles.join(format!("style_{style}.wav"));
        ok(&["transfer", s(&input), s(&r), "--steps", "150", "--out", s(&out)]);
        read_json(&out.join("params.json"))["params"]["comp"]["ratio"].as_f64().unwrap()
    };
    let broadcast = ratio("broadcast");
    let warm = ratio("warm");
    assert!(broadcast > warm, "broadcast {broadcast} vs warm {warm}");
}

#[test]
fn rb_dsp_writes_baseline_report() {
    let tmp = TempDir::new().unwrap();
    let input = speech_wav(tmp.path(), "in.wav", 2.0, 7);
    let styles = tmp.path().join("styles");
    ok(&["styles", s(&input), "--out", s(&styles)]);
    let out = tmp.path().join("rb");
    ok(&[
        "transfer",
        s(&input),
        s(&styles.join("style_broadcast.wav")),
        "--method",
        "rb-dsp",
        "--out",
        s(&out),
    ]);
    let r = read_json(&out.join("baseline_report.json"));
    assert!(r["halted_on"].is_string());
    assert_eq!(r["fir_taps"].as_array().unwrap().len(), 63);
    assert!(out.join("output.wav").exists());
    assert!(!out.join("params.json").exists());
}

#[test]
fn transfer_fails_on_missing_input() {
    let tmp = TempDir::new().unwrap();
    let missing = tmp.path().join("missing.wav");
    let o = fxstyle(&["transfer", s(&missing), s(&missing), "--out", s(&tmp.path().join("t"))]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("missing.wav"));
}

fn plot_of(tmp: &Path, name: &str, params: &EffectParams) -> PathBuf {
    let file = tmp.join(format!("{name}.json"));
    fs::write(&file, serde_json::to_string(params).unwrap()).unwrap();
    let out = tmp.join(name);
    ok(&["plot", s(&file), "--out", s(&out)]);
    out
}

fn eq_points(out: &Path) -> Vec<(f64, f64)> {
    let (_, rows) = csv_rows(&out.join("eq_response.csv"));
    rows.iter().map(|r| (r[0].parse().unwrap(), r[1].parse().unwrap())).collect()
}

fn gain_at(pts: &[(f64, f64)], f: f64) -> f64 {
    pts.iter()
        .min_by(|a, b| (a.0 / f).ln().abs().total_cmp(&(b.0 / f).ln().abs()))
        .unwrap()
        .1
}

#[test]
fn plot_of_neutral_params_is_flat() {
    let tmp = TempDir::new().unwrap();
    let out = plot_of(tmp.path(), "neutral", &EffectParams::neutral());
    let eq = eq_points(&out);
    assert_eq!(eq.len(), 512);
    assert!(eq.iter().all(|&(_, g)| g.abs() < 1e-9));
    let (_, comp) = csv_rows(&out.join("compressor_curve.csv"));
    assert_eq!(comp.len(), 161);
    for r in &comp {
        let (x, y): (f64, f64) = (r[0].parse().unwrap(), r[1].parse().unwrap());
        assert!((x - y).abs() < 1e-9);
    }
    for svg in ["eq_response.svg", "compressor_curve.svg"] {
        let text = fs::read_to_string(out.join(svg)).unwrap();
        let doc = roxmltree::Document::parse(&text).unwrap();
        assert_eq!(doc.root_element().tag_name().name(), "svg");
        assert!(doc.descendants().any(|n| n.has_tag_name("polyline")));
    }
}

#[test]
fn plot_of_telephone_params_cuts_lows() {
    let tmp = TempDir::new().unwrap();
    let style = StylePreset::new(fxstyle::datagen::StyleName::Telephone);
    let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(2);
    for i in 0..5 {
        let out = plot_of(tmp.path(), &format!("tel{i}"), &style.sample(&mut rng));
        let eq = eq_points(&out);
        assert!(gain_at(&eq, 300.0) <= gain_at(&eq, 1500.0) - 15.0);
    }
}

#[test]
fn plot_reads_transfer_reports() {
    let tmp = TempDir::new().unwrap();
    let report = serde_json::json!({ "params": EffectParams::neutral(), "sample_rate": 44100 });
    let file = tmp.path().join("report.json");
    fs::write(&file, report.to_string()).unwrap();
    let out = tmp.path().join("plot");
    ok(&["plot", s(&file), "--out", s(&out)]);
    let eq = eq_points(&out);
    assert!((eq.last().unwrap().0 - 0.49 * 44100.0).abs() < 1e-6);

    fs::write(&file, "{\"params\": 3}").unwrap();
    assert!(!fxstyle(&["plot", s(&file), "--out", s(&out)]).status.success());
}

#[test]
fn eval_scores_conditions_against_targets() {
    let tmp = TempDir::new().unwrap();
    let corpus = tmp.path().join("corpus");
    fs::create_dir_all(&corpus).unwrap();
    speech_wav(&corpus, "a.wav", 4.0, 8);
    let pairs = tmp.path().join("pairs");
    ok(&["datagen", s(&corpus), "--n-pairs", "2", "--seconds", "1", "--out", s(&pairs)]);
    let out = tmp.path().join("eval");
    ok(&[
        "eval",
        s(&pairs.join("manifest.jsonl")),
        "--conditions",
        "target,input,exact",
        "--style-from",
        "target",
        "--steps",
        "100",
        "--out",
        s(&out),
    ]);
    let (header, rows) = csv_rows(&out.join("eval.csv"));
    assert_eq!(header, ["pair", "condition", "mrstft", "msd", "sce", "rms_err", "lufs_err"]);
    assert_eq!(rows.len(), 6);
    let col = |cond: &str, c: usize| -> Vec<f64> {
        rows.iter().filter(|r| r[1] == cond).map(|r| r[c].parse().unwrap()).collect()
    };
    for c in 2..7 {
        assert!(col("target", c).iter().all(|&v| v == 0.0));
    }
    let mean = |v: Vec<f64>| v.iter().sum::<f64>() / v.len() as f64;
    assert!(mean(col("input", 2)) >= mean(col("exact", 2)));
    let summary = read_json(&out.join("eval_summary.json"));
    for cond in ["target", "input", "exact"] {
        for (c, key) in header.iter().enumerate().skip(2) {
            let want = mean(col(cond, c));
            let got = summary[cond][key].as_f64().unwrap();
            assert!((got - want).abs() < 1e-9, "{cond} {key}");
        }
        assert_eq!(summary[cond]["pairs"], 2);
    }
}

#[test]
fn rerun_reproduces_outputs() {
    let tmp = TempDir::new().unwrap();
    let input = speech_wav(tmp.path(), "in.wav", 1.0, 9);
    let first = tmp.path().join("first");
    ok(&["styles", s(&input), "--seed", "3", "--out", s(&first)]);
    let second = tmp.path().join("second");
    ok(&["rerun", s(&first.join("run_manifest.json")), "--out", s(&second)]);
    for preset in StylePreset::all() {
        let f = format!("style_{}.wav", preset.name);
        assert_eq!(fs::read(first.join(&f)).unwrap(), fs::read(second.join(&f)).unwrap());
    }
    let a = read_json(&first.join("run_manifest.json"));
    let b = read_json(&second.join("run_manifest.json"));
    assert_eq!(a["command"], "styles");
    assert_eq!(a["seed"], 3);
    assert_eq!(a["arguments"]["input"], b["arguments"]["input"]);
    assert!(a["timestamps"]["start"].is_string());
}
