//! Command-line arguments. Every subcommand's arguments serialize into the
//! run manifest and deserialize back for `rerun`.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use fxstyle::{GradMethod, WavFormat};
use serde::{Deserialize, Serialize};

#[derive(Parser, Debug)]
#[command(name = "fxstyle", version, about = "Audio production style transfer with a differentiable EQ and compressor")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "lowercase")]
pub enum Command {
    /// Impose the style of a reference recording on an input.
    Transfer(TransferArgs),
    /// Compare exact, finite-difference and SPSA gradients on random fixtures.
    Gradcheck(GradcheckArgs),
    /// Time gradient evaluations and chain renders.
    Bench(BenchArgs),
    /// Generate self-supervised (input, reference, target) pairs from a corpus.
    Datagen(DatagenArgs),
    /// Render one input through each of the five style presets.
    Styles(StylesArgs),
    /// Full-reference metrics of pairs in a manifest.
    Eval(EvalArgs),
    /// EQ response and compressor curve of a parameter file.
    Plot(PlotArgs),
    /// Re-run a command from its run manifest.
    Rerun(RerunArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Transfer(_) => "transfer",
            Command::Gradcheck(_) => "gradcheck",
            Command::Bench(_) => "bench",
            Command::Datagen(_) => "datagen",
            Command::Styles(_) => "styles",
            Command::Eval(_) => "eval",
            Command::Plot(_) => "plot",
            Command::Rerun(_) => "rerun",
        }
    }

    pub fn seed(&self) -> u64 {
        match self {
            Command::Transfer(a) => a.opt.seed,
            Command::Gradcheck(a) => a.seed,
            Command::Bench(a) => a.seed,
            Command::Datagen(a) => a.seed,
            Command::Styles(a) => a.seed,
            Command::Eval(a) => a.opt.seed,
            Command::Plot(_) | Command::Rerun(_) => 0,
        }
    }

    pub fn out_dir(&self) -> Option<&PathBuf> {
        match self {
            Command::Transfer(a) => Some(&a.out),
            Command::Gradcheck(a) => Some(&a.out),
            Command::Bench(a) => Some(&a.out),
            Command::Datagen(a) => Some(&a.out),
            Command::Styles(a) => Some(&a.out),
            Command::Eval(a) => Some(&a.out),
            Command::Plot(a) => Some(&a.out),
            Command::Rerun(_) => None,
        }
    }

    pub fn set_out_dir(&mut self, dir: PathBuf) {
        match self {
            Command::Transfer(a) => a.out = dir,
            Command::Gradcheck(a) => a.out = dir,
            Command::Bench(a) => a.out = dir,
            Command::Datagen(a) => a.out = dir,
            Command::Styles(a) => a.out = dir,
            Command::Eval(a) => a.out = dir,
            Command::Plot(a) => a.out = dir,
            Command::Rerun(a) => a.out = Some(dir),
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Exact,
    Fd,
    Spsa,
    RbDsp,
}

impl Method {
    pub fn gradient(self) -> Option<GradMethod> {
        match self {
            Method::Exact => Some(GradMethod::Exact),
            Method::Fd => Some(GradMethod::Fd),
            Method::Spsa => Some(GradMethod::Spsa),
            Method::RbDsp => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Exact => "exact",
            Method::Fd => "fd",
            Method::Spsa => "spsa",
            Method::RbDsp => "rb-dsp",
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GradArg {
    Exact,
    Fd,
    Spsa,
}

impl From<GradArg> for GradMethod {
    fn from(g: GradArg) -> Self {
        match g {
            GradArg::Exact => GradMethod::Exact,
            GradArg::Fd => GradMethod::Fd,
            GradArg::Spsa => GradMethod::Spsa,
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    F32,
    Pcm16,
}

impl From<Format> for WavFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::F32 => WavFormat::Float32,
            Format::Pcm16 => WavFormat::Pcm16,
        }
    }
}

/// Optimizer settings shared by commands that fit parameters.
#[derive(Args, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptArgs {
    /// Optimizer steps.
    #[arg(long, default_value_t = 500)]
    pub steps: usize,
    /// Adam step size (1e-2 by default, 1e-3 for SPSA).
    #[arg(long)]
    pub lr: Option<f64>,
    /// SPSA perturbation size in normalized units.
    #[arg(long, default_value_t = 0.0005)]
    pub spsa_eps: f64,
    /// SPSA perturbations averaged per gradient.
    #[arg(long, default_value_t = 1)]
    pub spsa_avg: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Args, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransferArgs {
    pub input: PathBuf,
    pub reference: PathBuf,
    #[arg(long, value_enum, default_value_t = Method::Exact)]
    pub method: Method,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
    /// Analysis rate for gradient methods; the output is rendered at the
    /// input file's rate.
    #[arg(long)]
    pub sample_rate: Option<u32>,
    #[arg(long, value_enum, default_value_t = Format::F32)]
    pub format: Format,
    #[command(flatten)]
    #[serde(flatten)]
    pub opt: OptArgs,
}

#[derive(Args, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GradcheckArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Exact-vs-FD cases.
    #[arg(long, default_value_t = 5)]
    pub n_cases: usize,
    /// SPSA-vs-FD cases (defaults to n-cases).
    #[arg(long)]
    pub spsa_cases: Option<usize>,
    #[arg(long, default_value_t = 1000)]
    pub spsa_avg: usize,
    #[arg(long, default_value_t = 0.0005)]
    pub spsa_eps: f64,
    /// Fixture length in seconds.
    #[arg(long, default_value_t = 0.5)]
    pub seconds: f64,
    #[arg(long, default_value_t = 24000)]
    pub sample_rate: u32,
    #[arg(long)]
    pub out: PathBuf,
    /// Test hook: perturb the exact gradient before comparing.
    #[arg(long, hide = true)]
    #[serde(default)]
    pub corrupt_gradient: bool,
}

#[derive(Args, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchArgs {
    #[arg(long, value_enum, default_value_t = GradArg::Exact)]
    pub method: GradArg,
    #[arg(long, default_value_t = 10)]
    pub n_iters: usize,
    /// Fixture length in seconds.
    #[arg(long, default_value_t = 1.0)]
    pub seconds: f64,
    #[arg(long, default_value_t = 24000)]
    pub sample_rate: u32,
    #[arg(long, default_value_t = 1)]
    pub spsa_avg: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatagenArgs {
    /// Directory searched recursively for WAV files.
    pub corpus: PathBuf,
    #[arg(long, default_value_t = 10)]
    pub n_pairs: usize,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Length of each half (input and reference) in seconds.
    #[arg(long, default_value_t = 10.0)]
    pub seconds: f64,
    #[arg(long, default_value_t = 24000)]
    pub sample_rate: u32,
    #[arg(long, value_enum, default_value_t = Format::F32)]
    pub format: Format,
}

#[derive(Args, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StylesArgs {
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = Format::F32)]
    pub format: Format,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Condition {
    /// The unprocessed input.
    Input,
    /// The target itself.
    Target,
    Exact,
    Fd,
    Spsa,
    RbDsp,
}

impl Condition {
    pub fn as_str(self) -> &'static str {
        match self {
            Condition::Input => "input",
            Condition::Target => "target",
            Condition::Exact => "exact",
            Condition::Fd => "fd",
            Condition::Spsa => "spsa",
            Condition::RbDsp => "rb-dsp",
        }
    }

    pub fn method(self) -> Option<Method> {
        match self {
            Condition::Exact => Some(Method::Exact),
            Condition::Fd => Some(Method::Fd),
            Condition::Spsa => Some(Method::Spsa),
            Condition::RbDsp => Some(Method::RbDsp),
            Condition::Input | Condition::Target => None,
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StyleSource {
    /// Match the pair's reference (different content, same style).
    #[default]
    Reference,
    /// Match the target itself.
    Target,
}

#[derive(Args, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalArgs {
    /// JSON-lines pair manifest written by `datagen`.
    pub manifest: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Conditions to score against each target.
    #[arg(long, value_enum, value_delimiter = ',', default_value = "input,rb-dsp")]
    pub conditions: Vec<Condition>,
    /// Signal the processing methods are fitted to.
    #[arg(long, value_enum, default_value_t = StyleSource::Reference)]
    pub style_from: StyleSource,
    #[command(flatten)]
    #[serde(flatten)]
    pub opt: OptArgs,
}

#[derive(Args, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlotArgs {
    /// `params.json` from `transfer`, or a bare parameter object.
    pub params: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Rate the EQ response is evaluated at (defaults to the rate in the
    /// parameter file, else 24000).
    #[arg(long)]
    pub sample_rate: Option<u32>,
}

#[derive(Args, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RerunArgs {
    pub manifest: PathBuf,
    /// Write into this directory instead of the recorded one.
    #[arg(long)]
    pub out: Option<PathBuf>,
}
