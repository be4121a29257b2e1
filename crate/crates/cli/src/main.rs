//! `chaos-bci`: synthetic data, feature extraction, training, evaluation and
//! report export.
//!
//! Exit codes: 0 success (possibly with warnings), 1 runtime failure,
//! 2 usage or validation error.

mod io;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use chaos_bci::classifiers::{
    evaluate, ClusterMode, EvalReport, KernelChoice, ModelKind, TrainConfig, TrainedModel,
};
use chaos_bci::features::csv::{read_features, write_features, write_histogram};
use chaos_bci::features::{extract_features_multi, histogram, summarize, FeatureVector, IndexParams};
use chaos_bci::synth::{generate, System, SystemSpec};
use chaos_bci::{Label, NormalizeMode, Norm, SignalKind, TimeSeries, WindowSpec};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Parser)]
#[command(name = "chaos-bci", version, about = "Chaos indices and classifiers for two-class EEG tasks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a benchmark signal as a single-column recording.
    Synth(SynthArgs),
    /// Compute the four indices for every annotated trial.
    Extract(ExtractArgs),
    /// Fit a classifier on a feature file.
    Train(TrainArgs),
    /// Score a model on a feature file, or score a predictions fixture.
    Eval(EvalArgs),
    /// Per-class relative-frequency histogram of one index.
    Hist(HistArgs),
    /// Per-class mean (std) table of the four indices.
    Summary(SummaryArgs),
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
enum SystemName {
    Logistic,
    Henon,
    Lorenz,
    Sine,
    WhiteNoise,
    Ar1,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long, value_enum)]
    system: SystemName,
    /// Number of recorded samples.
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 4.0)]
    r: f64,
    #[arg(long, default_value_t = 1.4)]
    a: f64,
    #[arg(long, default_value_t = 0.3)]
    b: f64,
    #[arg(long, default_value_t = 10.0)]
    sigma: f64,
    #[arg(long, default_value_t = 28.0)]
    rho: f64,
    #[arg(long, default_value_t = 8.0 / 3.0)]
    beta: f64,
    #[arg(long, default_value_t = 0.01)]
    dt: f64,
    /// Sine period in samples.
    #[arg(long, default_value_t = 64.0)]
    period: f64,
    #[arg(long, default_value_t = 0.9)]
    phi: f64,
    /// Seed for the noise systems; recorded but unused by the deterministic ones.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Samples discarded before recording.
    #[arg(long, default_value_t = 0)]
    transient: usize,
    /// Initial state, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    x0: Option<Vec<f64>>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Map,
    Flow,
}

#[derive(Clone, Copy, ValueEnum)]
enum NormArg {
    Chebyshev,
    Euclidean,
}

#[derive(Args)]
struct ExtractArgs {
    #[arg(long)]
    recording: PathBuf,
    /// Header `trial_id,channel,onset_sample,offset_sample,label`.
    #[arg(long)]
    trials: PathBuf,
    /// Sampling rate of the recording in Hz.
    #[arg(long, default_value_t = 1000.0)]
    rate: f64,
    /// Analyse this channel for every trial instead of the trial's own.
    #[arg(long, conflicts_with = "average_channels")]
    channel: Option<String>,
    /// Average each index over all channels of the recording.
    #[arg(long)]
    average_channels: bool,
    #[arg(long, value_enum, default_value = "flow")]
    kind: KindArg,
    /// Theiler window in samples (default: 1 for maps, rate/10 for flows).
    #[arg(long)]
    theiler: Option<usize>,
    #[arg(long, default_value_t = 50)]
    max_lag: usize,
    #[arg(long, default_value_t = 16)]
    bins: usize,
    #[arg(long, default_value_t = 8)]
    m_max: usize,
    #[arg(long, default_value_t = 0.05)]
    saturation_tol: f64,
    #[arg(long, default_value_t = 20)]
    n_radii: usize,
    #[arg(long, value_enum, default_value = "chebyshev")]
    norm: NormArg,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelArg {
    Mlp,
    KmSvm,
}

#[derive(Clone, Copy, ValueEnum)]
enum ScalingArg {
    Minmax,
    Zscore,
}

#[derive(Clone, Copy, ValueEnum)]
enum KernelArg {
    Rbf,
    Linear,
}

#[derive(Clone, Copy, ValueEnum)]
enum ClusterArg {
    PerClass,
    Total,
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long)]
    features: PathBuf,
    #[arg(long, value_enum)]
    model: ModelArg,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value = "minmax")]
    scaling: ScalingArg,
    /// Skip the PCA rotation after scaling.
    #[arg(long)]
    no_pca: bool,
    #[arg(long, default_value_t = 500)]
    max_iters: usize,
    /// Gradient-norm stopping threshold for the perceptron.
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    /// Clusters per class (or in total with --cluster-mode total).
    #[arg(long, default_value_t = 4)]
    k: usize,
    #[arg(long, value_enum, default_value = "per-class")]
    cluster_mode: ClusterArg,
    #[arg(long, default_value_t = 10)]
    restarts: usize,
    #[arg(long, value_enum, default_value = "rbf")]
    kernel: KernelArg,
    /// rbf width (default: 1 / (4 · mean feature variance)).
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long, default_value_t = 10.0)]
    c: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long, required_unless_present = "predictions", requires = "model")]
    features: Option<PathBuf>,
    #[arg(long)]
    model: Option<PathBuf>,
    /// `predicted,actual` label pairs to score directly.
    #[arg(long, conflicts_with_all = ["features", "model"])]
    predictions: Option<PathBuf>,
    /// Published mse to compare against; the report records the difference.
    #[arg(long)]
    reference_mse: Option<f64>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
enum IndexArg {
    Lle,
    Mi,
    Med,
    D2,
}

#[derive(Args)]
struct HistArgs {
    #[arg(long)]
    features: PathBuf,
    #[arg(long, value_enum)]
    index: IndexArg,
    #[arg(long, default_value_t = 20)]
    bins: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SummaryArgs {
    #[arg(long)]
    features: PathBuf,
    /// Write the table here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Errors that map to exit code 2.
#[derive(Debug)]
struct Usage(String);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

fn usage(e: impl std::fmt::Display) -> anyhow::Error {
    Usage(e.to_string()).into()
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Synth(a) => synth(a),
        Command::Extract(a) => extract(a),
        Command::Train(a) => train(a),
        Command::Eval(a) => eval(a),
        Command::Hist(a) => hist(a),
        Command::Summary(a) => summary(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.is::<Usage>() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}

#[derive(Serialize)]
struct SynthConfig {
    spec: SystemSpec,
    sampling_rate: f64,
}

fn synth(a: SynthArgs) -> Result<()> {
    let system = match a.system {
        SystemName::Logistic => System::Logistic { r: a.r },
        SystemName::Henon => System::Henon { a: a.a, b: a.b },
        SystemName::Lorenz => System::Lorenz {
            sigma: a.sigma,
            rho: a.rho,
            beta: a.beta,
            dt: a.dt,
        },
        SystemName::Sine => System::Sine { period: a.period },
        SystemName::WhiteNoise => System::WhiteNoise { seed: a.seed },
        SystemName::Ar1 => System::Ar1 { phi: a.phi, seed: a.seed },
    };
    let mut spec = SystemSpec::new(system, a.n).with_transient(a.transient);
    spec.x0 = a.x0;
    spec.validate().map_err(usage)?;
    let series = generate(&spec)?;
    io::write_recording(&a.out, series.samples())?;
    io::write_companion(
        &a.out,
        "synth",
        &SynthConfig {
            sampling_rate: series.sampling_rate(),
            spec,
        },
    )
}

#[derive(Serialize)]
struct ExtractConfig {
    recording: PathBuf,
    trials: PathBuf,
    rate: f64,
    channel: Option<String>,
    average_channels: bool,
    params: IndexParams,
    extracted: usize,
    skipped: Vec<chaos_bci::features::SkippedTrial>,
}

fn extract(a: ExtractArgs) -> Result<()> {
    if !(a.rate > 0.0 && a.rate.is_finite()) {
        return Err(usage(format!("--rate must be positive, got {}", a.rate)));
    }
    let params = IndexParams {
        kind: match a.kind {
            KindArg::Map => SignalKind::Map,
            KindArg::Flow => SignalKind::Flow,
        },
        theiler: a.theiler,
        max_lag: a.max_lag,
        bins: a.bins,
        m_max: a.m_max,
        saturation_tol: a.saturation_tol,
        n_radii: a.n_radii,
        norm: match a.norm {
            NormArg::Chebyshev => Norm::Chebyshev,
            NormArg::Euclidean => Norm::Euclidean,
        },
    };
    if params.bins < 2 || params.m_max < 2 || params.n_radii < 10 || params.max_lag == 0 {
        return Err(usage("need --bins >= 2, --m-max >= 2, --n-radii >= 10 and --max-lag >= 1"));
    }
    let rec = io::read_recording(&a.recording)?;
    let trials = io::read_trials(&a.trials)?;

    let mut features = Vec::new();
    let mut skipped = Vec::new();
    if a.average_channels {
        let channels: Vec<TimeSeries> = rec
            .names
            .iter()
            .map(|n| rec.channel(n, a.rate))
            .collect::<Result<_>>()?;
        let windows: Vec<WindowSpec> = trials.iter().map(|t| WindowSpec::new(t.trial_id, t.onset, t.offset, t.label)).collect();
        let ex = extract_features_multi(&channels, &windows, &params);
        features = ex.features;
        skipped = ex.skipped;
    } else {
        // trials grouped by analysis channel, merged back in trial-id order
        let mut names: Vec<&str> = trials
            .iter()
            .map(|t| a.channel.as_deref().unwrap_or(&t.channel))
            .collect();
        names.sort_unstable();
        names.dedup();
        for name in names {
            let series = rec.channel(name, a.rate)?;
            let windows: Vec<WindowSpec> = trials
                .iter()
                .filter(|t| a.channel.as_deref().unwrap_or(&t.channel) == name)
                .map(|t| WindowSpec::new(t.trial_id, t.onset, t.offset, t.label))
                .collect();
            let ex = extract_features_multi(std::slice::from_ref(&series), &windows, &params);
            features.extend(ex.features);
            skipped.extend(ex.skipped);
        }
        features.sort_by_key(|f| f.trial_id);
        skipped.sort_by_key(|s| s.trial_id);
    }
    for s in &skipped {
        eprintln!("skipped trial {}: {}", s.trial_id, s.reason);
    }
    if !skipped.is_empty() {
        eprintln!("warning: {} of {} trials skipped", skipped.len(), trials.len());
    }
    let mut buf = Vec::new();
    write_features(&mut buf, &features)?;
    io::write(&a.out, std::str::from_utf8(&buf)?)?;
    io::write_companion(
        &a.out,
        "extract",
        &ExtractConfig {
            recording: a.recording,
            trials: a.trials,
            rate: a.rate,
            channel: a.channel,
            average_channels: a.average_channels,
            params,
            extracted: features.len(),
            skipped,
        },
    )
}

fn load_features(path: &Path) -> Result<Vec<FeatureVector>> {
    let file = std::fs::File::open(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(read_features(std::io::BufReader::new(file))?)
}

fn train(a: TrainArgs) -> Result<()> {
    let kind = match a.model {
        ModelArg::Mlp => ModelKind::Mlp,
        ModelArg::KmSvm => ModelKind::KmSvm,
    };
    let mut cfg = TrainConfig::new(kind).with_seed(a.seed);
    cfg.scaling = match a.scaling {
        ScalingArg::Minmax => NormalizeMode::MinMax,
        ScalingArg::Zscore => NormalizeMode::ZScore,
    };
    cfg.pca = !a.no_pca;
    cfg.mlp.max_iters = a.max_iters;
    cfg.mlp.tol = a.tol;
    cfg.km_svm.k = a.k;
    cfg.km_svm.mode = match a.cluster_mode {
        ClusterArg::PerClass => ClusterMode::PerClass,
        ClusterArg::Total => ClusterMode::Total,
    };
    cfg.km_svm.kmeans.restarts = a.restarts;
    cfg.km_svm.kernel = match a.kernel {
        KernelArg::Linear => KernelChoice::Linear,
        KernelArg::Rbf => KernelChoice::Rbf { gamma: a.gamma },
    };
    cfg.km_svm.c = a.c;
    if !(a.c > 0.0) || a.k == 0 || a.gamma.is_some_and(|g| !(g > 0.0)) {
        return Err(usage("need --c > 0, --k >= 1 and --gamma > 0"));
    }
    let vectors = load_features(&a.features)?;
    let model = TrainedModel::train(&vectors, &cfg)?;
    io::write(&a.out, &(model.to_json()? + "\n"))
}

#[derive(Serialize)]
struct ReferenceMse {
    reported: f64,
    computed: f64,
    /// `computed − reported`.
    deviation: f64,
}

#[derive(Serialize)]
struct EvalDocument {
    accuracy: f64,
    accuracy_percent: String,
    mse: f64,
    mse_text: String,
    /// Rows decided class, columns real class, classes ordered (1, -1).
    confusion: [[u64; 2]; 2],
    n_test: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    reference_mse: Option<ReferenceMse>,
    config: serde_json::Value,
}

fn eval(a: EvalArgs) -> Result<()> {
    let (report, config): (EvalReport, serde_json::Value) = if let Some(p) = &a.predictions {
        let (pred, actual) = io::read_predictions(p)?;
        (
            evaluate(&pred, &actual)?,
            serde_json::json!({ "predictions": p }),
        )
    } else {
        let (Some(features), Some(model_path)) = (&a.features, &a.model) else {
            return Err(usage("eval needs --features with --model, or --predictions"));
        };
        let text = std::fs::read_to_string(model_path).with_context(|| format!("reading {}", model_path.display()))?;
        let model = TrainedModel::from_json(&text)?;
        let vectors = load_features(features)?;
        let actual: Vec<Label> = vectors.iter().map(|v| v.label).collect();
        (
            evaluate(&model.predict(&vectors), &actual)?,
            serde_json::json!({
                "features": features,
                "model": model_path,
                "train_config": model.config,
            }),
        )
    };
    let doc = EvalDocument {
        accuracy: report.accuracy,
        accuracy_percent: report.accuracy_percent(),
        mse: report.mse,
        mse_text: report.mse_text(),
        confusion: report.confusion,
        n_test: report.n_test,
        reference_mse: a.reference_mse.map(|r| ReferenceMse {
            reported: r,
            computed: report.mse,
            deviation: report.mse - r,
        }),
        config,
    };
    print!("{}", report.render_confusion());
    println!("accuracy {}  mse {}  n_test {}", report.accuracy_percent(), report.mse_text(), report.n_test);
    if let Some(r) = &doc.reference_mse {
        println!("reference mse {:.4}, deviation {:+.4}", r.reported, r.deviation);
    }
    io::write(&a.out, &(serde_json::to_string_pretty(&doc)? + "\n"))
}

#[derive(Serialize)]
struct HistConfig<'a> {
    features: &'a Path,
    index: IndexArg,
    bins: usize,
}

fn hist(a: HistArgs) -> Result<()> {
    if a.bins < 2 {
        return Err(usage("--bins must be at least 2"));
    }
    let vectors = load_features(&a.features)?;
    let feature = a.index as usize;
    let h = histogram(&vectors, feature, a.bins)?;
    let mut buf = Vec::new();
    write_histogram(&mut buf, &h)?;
    io::write(&a.out, std::str::from_utf8(&buf)?)?;
    io::write_companion(
        &a.out,
        "hist",
        &HistConfig {
            features: &a.features,
            index: a.index,
            bins: a.bins,
        },
    )
}

#[derive(Serialize)]
struct SummaryConfig<'a> {
    features: &'a Path,
}

fn summary(a: SummaryArgs) -> Result<()> {
    let vectors = load_features(&a.features)?;
    if vectors.is_empty() {
        bail!("{} holds no feature rows", a.features.display());
    }
    let table = summarize(&vectors).render();
    match &a.out {
        Some(out) => {
            io::write(out, &table)?;
            io::write_companion(out, "summary", &SummaryConfig { features: &a.features })
        }
        None => {
            print!("{table}");
            Ok(())
        }
    }
}
