//! `mdsfeat`: learn MDS features from pairwise distances and evaluate them.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use mdsfeat::datasets::Layout;
use mdsfeat::{ErrorClass, InitStrategy, Method};

#[derive(Parser, Debug)]
#[command(name = "mdsfeat", version, about = "Feature learning by multidimensional scaling")]
struct Cli {
    /// Log more (-v info, -vv debug). `RUST_LOG` takes precedence.
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sample a Swiss-roll point cloud.
    Swissroll(SwissrollArgs),
    /// Compute a pairwise (or query-by-item) distance matrix.
    Distmat(DistmatArgs),
    /// Fit an embedding to a distance matrix.
    Fit(FitArgs),
    /// Place new items into a fitted embedding.
    Encode(EncodeArgs),
    /// Visual vocabularies and spatial pyramid vectors.
    #[command(subcommand)]
    Spm(SpmCommand),
    /// Cross-validated recognition experiment.
    Eval(EvalArgs),
    /// Swiss-roll stress benchmark.
    Bench(BenchArgs),
}

#[derive(Args, Debug)]
struct SwissrollArgs {
    #[arg(long, default_value_t = 591)]
    n: usize,
    /// Standard deviation of Gaussian noise added to every coordinate.
    #[arg(long, default_value_t = 0.0)]
    noise: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Point CSV with header `x,y,z`.
    #[arg(long)]
    out: PathBuf,
    /// Also write the ground-truth flat coordinates (`arc,height`).
    #[arg(long)]
    unrolled: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Measure {
    /// Euclidean distance between rows of a point CSV.
    Euclidean,
    /// Shortest paths through the k-nearest-neighbor graph of a point CSV.
    Geodesic,
    /// Image Euclidean distance over an image directory.
    Imed,
    /// `1 - K` over a pyramid vector CSV.
    Spm1,
    /// `-ln((1 - ε) K + ε)` over a pyramid vector CSV.
    Spm2,
}

#[derive(Args, Debug)]
struct DistmatArgs {
    #[arg(long, value_enum)]
    measure: Measure,
    /// Point CSV, image directory or pyramid vector CSV, depending on the measure.
    #[arg(long)]
    input: PathBuf,
    /// Same kind of input; rows of the output become these items.
    #[arg(long)]
    queries: Option<PathBuf>,
    #[arg(long, default_value_t = 8)]
    knn: usize,
    /// Gaussian width of the IMED weights.
    #[arg(long, default_value_t = 1.0)]
    sigma: f64,
    #[arg(long, default_value_t = 0.001)]
    epsilon: f64,
    #[arg(long, default_value = "class-per-directory")]
    layout: Layout,
    #[arg(long, default_value_t = 200)]
    vocab_size: usize,
    #[arg(long, default_value_t = 2)]
    levels: usize,
    #[arg(long)]
    cache_dir: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Solver {
    Ilma,
    Smacof,
}

#[derive(Args, Debug)]
struct FitArgs {
    /// Headerless N x N CSV.
    #[arg(long)]
    distances: PathBuf,
    #[arg(long, default_value_t = 2)]
    dims: usize,
    #[arg(long, value_enum, default_value = "ilma")]
    solver: Solver,
    #[arg(long, default_value = "random")]
    strategy: InitStrategy,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Adjustment sweeps (ILMA) or iterations (SMACOF).
    #[arg(long, default_value_t = 20)]
    max_sweeps: usize,
    /// Relative stress decrease below which fitting stops.
    #[arg(long, default_value_t = 1e-4)]
    tolerance: f64,
    /// Embedding CSV with header `dim0..`.
    #[arg(long)]
    out: PathBuf,
    /// Stress trace CSV.
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct EncodeArgs {
    #[arg(long)]
    embedding: PathBuf,
    /// Headerless CSV, one row per new item, one column per training item.
    #[arg(long)]
    distances: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Subcommand, Debug)]
enum SpmCommand {
    /// Cluster dense descriptors of an image directory into visual words.
    Vocab(VocabArgs),
    /// Spatial pyramid vector of every image in a directory.
    Vectors(VectorsArgs),
}

#[derive(Args, Debug)]
struct DescriptorArgs {
    #[arg(long)]
    images: PathBuf,
    #[arg(long, default_value = "class-per-directory")]
    layout: Layout,
    #[arg(long, default_value_t = 8)]
    step: usize,
    #[arg(long, default_value_t = 16)]
    patch: usize,
}

#[derive(Args, Debug)]
struct VocabArgs {
    #[command(flatten)]
    source: DescriptorArgs,
    #[arg(long, default_value_t = 200)]
    vocab_size: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct VectorsArgs {
    #[command(flatten)]
    source: DescriptorArgs,
    #[arg(long)]
    vocab: PathBuf,
    #[arg(long, default_value_t = 2)]
    levels: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct EvalArgs {
    /// JSON experiment configuration; flags below override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Re-run the configuration stored in a run manifest.
    #[arg(long, conflicts_with = "config")]
    manifest: Option<PathBuf>,
    #[arg(long)]
    dataset: Option<PathBuf>,
    #[arg(long)]
    layout: Option<Layout>,
    /// Comma-separated method names.
    #[arg(long, value_delimiter = ',')]
    methods: Option<Vec<Method>>,
    /// Feature lengths, e.g. `1-20` or `1,2,5,10`.
    #[arg(long)]
    dims: Option<String>,
    #[arg(long)]
    folds: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    strategy: Option<InitStrategy>,
    /// Kernel PCA width (chosen per fold when absent).
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long)]
    imed_sigma: Option<f64>,
    #[arg(long)]
    vocab_size: Option<usize>,
    #[arg(long)]
    levels: Option<usize>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    cache_dir: Option<PathBuf>,
    /// Parent directory of run directories.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct BenchArgs {
    /// JSON benchmark configuration; flags below override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    noise: Option<f64>,
    #[arg(long)]
    knn: Option<usize>,
    #[arg(long)]
    dims: Option<usize>,
    #[arg(long)]
    sweeps: Option<usize>,
    #[arg(long)]
    repeats: Option<usize>,
    /// Comma-separated strategies.
    #[arg(long, value_delimiter = ',')]
    strategy: Option<Vec<InitStrategy>>,
    #[arg(long)]
    seed: Option<u64>,
    /// Skip the SMACOF comparison.
    #[arg(long)]
    no_smacof: bool,
    #[arg(long)]
    out: PathBuf,
}

/// Raised for argument combinations clap cannot check.
#[derive(Debug)]
struct UsageError(String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.downcast_ref::<UsageError>().is_some() {
            return 1;
        }
        if let Some(e) = cause.downcast_ref::<mdsfeat::Error>() {
            return match e.class() {
                ErrorClass::Usage => 1,
                ErrorClass::Data => 2,
                ErrorClass::Numerical => 3,
            };
        }
    }
    2
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();

    let result = match cli.command {
        Command::Swissroll(a) => commands::swissroll(a),
        Command::Distmat(a) => commands::distmat(a),
        Command::Fit(a) => commands::fit(a),
        Command::Encode(a) => commands::encode(a),
        Command::Spm(SpmCommand::Vocab(a)) => commands::spm_vocab(a),
        Command::Spm(SpmCommand::Vectors(a)) => commands::spm_vectors(a),
        Command::Eval(a) => commands::eval(a),
        Command::Bench(a) => commands::bench(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
