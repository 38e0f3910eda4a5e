//! Command-line front end: train orderings, extract features, evaluate
//! pipelines, visualize deep layers, and print the search-space table.

pub mod commands;
pub mod config;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use config::{RunConfig, Strategy};

#[derive(Debug, Parser)]
#[command(
    name = "deeplbp",
    about = "Texture analysis with deep local binary patterns",
    version
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Learn an ordering over LBP codes and write it as JSON.
    TrainOrdering(TrainOrderingArgs),
    /// Extract feature vectors for every dataset image into a CSV file.
    Extract(ExtractArgs),
    /// Cross-validated evaluation; writes CSV and JSON reports.
    Eval(EvalArgs),
    /// Render each deep layer of an image as a grayscale PNG.
    Visualize(VisualizeArgs),
    /// Print the ordering-search-space table (labeled DAG counts).
    Dagcount(DagcountArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum OrderingMode {
    /// Embed a code dissimilarity into a scalar coordinate.
    Similarity,
    /// Rank codes lexicographically over description features.
    Highdim,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum DissimilarityMetric {
    Hamming,
    RiHamming,
}

#[derive(Debug, Args)]
pub struct TrainOrderingArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output ordering JSON file.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum)]
    pub mode: OrderingMode,
    /// Dissimilarity for similarity mode.
    #[arg(long, value_enum, default_value = "ri-hamming")]
    pub metric: DissimilarityMetric,
    /// Code-space size override (defaults to the config neighborhood).
    #[arg(long)]
    pub n: Option<u32>,
    /// Comma-separated feature names for highdim mode.
    #[arg(long)]
    pub arrangement: Option<String>,
    /// Greedy oracle-driven arrangement search (highdim mode).
    #[arg(long)]
    pub greedy: bool,
    /// Maximum arrangement length for greedy search.
    #[arg(long)]
    pub max_depth: Option<usize>,
    /// Dataset directory for the greedy oracle.
    #[arg(long)]
    pub dataset: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ExtractArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output CSV file.
    #[arg(long)]
    pub out: PathBuf,
    /// Dataset directory (overrides the config).
    #[arg(long)]
    pub dataset: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory for report.csv and report.json.
    #[arg(long)]
    pub out: PathBuf,
    /// Dataset directory (overrides the config).
    #[arg(long)]
    pub dataset: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "deep")]
    pub strategy: Strategy,
    /// PCA variance fraction (deep-pca strategy).
    #[arg(long)]
    pub retain: Option<f64>,
}

#[derive(Debug, Args)]
pub struct VisualizeArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory for the per-layer PNGs.
    #[arg(long)]
    pub out: PathBuf,
    /// Input image (PNG or PGM).
    #[arg(long)]
    pub image: PathBuf,
    /// Number of layers to render (overrides the config).
    #[arg(long)]
    pub layers: Option<usize>,
}

#[derive(Debug, Args)]
pub struct DagcountArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Optional CSV output path.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Smallest neighborhood size.
    #[arg(long, default_value_t = 2)]
    pub min: u32,
    /// Largest neighborhood size.
    #[arg(long, default_value_t = 8)]
    pub max: u32,
}

/// Loads the config for a subcommand, applying the seed override.
fn load_config(path: Option<&PathBuf>, seed: Option<u64>) -> anyhow::Result<RunConfig> {
    let mut cfg = RunConfig::load(path.map(|p| p.as_path()))?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    Ok(cfg)
}

/// Runs one parsed invocation.
pub fn run(cli: Cli) -> anyhow::Result<()> {
    match &cli.command {
        Command::TrainOrdering(args) => {
            let cfg = load_config(args.config.as_ref(), args.seed)?;
            commands::cmd_train_ordering(&cfg, args)
        }
        Command::Extract(args) => {
            let cfg = load_config(args.config.as_ref(), args.seed)?;
            commands::cmd_extract(&cfg, args)
        }
        Command::Eval(args) => {
            let cfg = load_config(args.config.as_ref(), args.seed)?;
            commands::cmd_eval(&cfg, args)
        }
        Command::Visualize(args) => {
            let cfg = load_config(args.config.as_ref(), args.seed)?;
            commands::cmd_visualize(&cfg, args)
        }
        Command::Dagcount(args) => commands::cmd_dagcount(args.min, args.max, args.out.as_ref()),
    }
}
