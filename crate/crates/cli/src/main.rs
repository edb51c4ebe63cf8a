use std::path::PathBuf;

use anyhow::bail;
use clap::{Parser, Subcommand, ValueEnum};

use segunc_cli::compare::{cmd_compare, CompareConfig};
use segunc_cli::entropy::{cmd_entropy, EntropyConfig, EntropySource};
use segunc_cli::eval::{cmd_eval, EvalConfig};
use segunc_cli::synth::{cmd_synth, SynthConfig};
use segunc_core::io::DEFAULT_THRESHOLD;
use segunc_core::metrics::{EstimatorKind, Metric};
use segunc_core::stats::Alternative;

/// Uncertainty-aware evaluation of segmentation samples.
#[derive(Parser)]
#[command(name = "segunc", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum EstimatorArg {
    Inclusive,
    Unbiased,
}

impl From<EstimatorArg> for EstimatorKind {
    fn from(e: EstimatorArg) -> Self {
        match e {
            EstimatorArg::Inclusive => EstimatorKind::Inclusive,
            EstimatorArg::Unbiased => EstimatorKind::Unbiased,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum MetricArg {
    Ged,
    Iou,
    Det,
}

impl From<MetricArg> for Metric {
    fn from(m: MetricArg) -> Self {
        match m {
            MetricArg::Ged => Metric::Ged,
            MetricArg::Iou => Metric::Iou,
            MetricArg::Det => Metric::Det,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum AlternativeArg {
    /// Model A has smaller values than model B.
    #[value(alias = "a_less")]
    Less,
    #[value(alias = "a_greater")]
    Greater,
}

impl From<AlternativeArg> for Alternative {
    fn from(a: AlternativeArg) -> Self {
        match a {
            AlternativeArg::Less => Alternative::ALess,
            AlternativeArg::Greater => Alternative::AGreater,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum SourceArg {
    Annotations,
    Model,
    Probmap,
}

#[derive(Subcommand)]
enum Command {
    /// Per-image GED, IoU and detection metrics for each model.
    Eval {
        #[arg(long)]
        dataset: PathBuf,
        /// Comma-separated model names; all models when omitted.
        #[arg(long, value_delimiter = ',')]
        models: Vec<String>,
        #[arg(long, value_enum, default_value = "inclusive")]
        estimator: EstimatorArg,
        #[arg(long, default_value_t = DEFAULT_THRESHOLD)]
        threshold: u8,
        /// Worker threads; 0 uses every core.
        #[arg(long, default_value_t = 0)]
        workers: usize,
        /// Subsample each mask set to at most this many masks.
        #[arg(long)]
        max_samples: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Report CSV path.
        #[arg(long)]
        out: PathBuf,
        /// Summary JSON path; defaults to `<out>.summary.json`.
        #[arg(long)]
        summary: Option<PathBuf>,
    },
    /// Entropy maps and histograms of the mean segmentation.
    Entropy {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long, value_enum, default_value = "annotations")]
        source: SourceArg,
        /// Model name for `model` and `probmap` sources.
        #[arg(long)]
        models: Option<String>,
        #[arg(long, default_value_t = 20)]
        bins: usize,
        #[arg(long, default_value_t = DEFAULT_THRESHOLD)]
        threshold: u8,
        #[arg(long, default_value_t = 0)]
        workers: usize,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
    },
    /// Generate a synthetic dataset from a scenario file.
    Synth {
        scenario: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = 0)]
        workers: usize,
    },
    /// One-sided Wilcoxon signed-rank test between two reports.
    Compare {
        report_a: PathBuf,
        report_b: PathBuf,
        #[arg(long)]
        model_a: Option<String>,
        #[arg(long)]
        model_b: Option<String>,
        #[arg(long, value_enum, default_value = "ged")]
        metric: MetricArg,
        #[arg(long, value_enum, default_value = "less")]
        alternative: AlternativeArg,
        /// JSON output path; printed to stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Eval {
            dataset,
            models,
            estimator,
            threshold,
            workers,
            max_samples,
            seed,
            out,
            summary,
        } => {
            let config = EvalConfig {
                dataset,
                models,
                estimator: estimator.into(),
                threshold,
                workers,
                max_samples,
                seed,
                out,
                summary,
            };
            cmd_eval(&config)?;
        }
        Command::Entropy {
            dataset,
            source,
            models,
            bins,
            threshold,
            workers,
            out,
        } => {
            let source = match (source, models) {
                (SourceArg::Annotations, None) => EntropySource::Annotations,
                (SourceArg::Annotations, Some(_)) => {
                    bail!("--models is not used with --source annotations")
                }
                (SourceArg::Model, Some(m)) => EntropySource::Model(m),
                (SourceArg::Probmap, Some(m)) => EntropySource::Probmap(m),
                (_, None) => bail!("--models is required for this source"),
            };
            let config = EntropyConfig {
                dataset,
                source,
                bins,
                threshold,
                workers,
                out,
            };
            cmd_entropy(&config)?;
        }
        Command::Synth {
            scenario,
            out,
            seed,
            workers,
        } => {
            cmd_synth(&SynthConfig {
                scenario,
                out,
                seed,
                workers,
            })?;
        }
        Command::Compare {
            report_a,
            report_b,
            model_a,
            model_b,
            metric,
            alternative,
            out,
        } => {
            let config = CompareConfig {
                report_a,
                report_b,
                model_a,
                model_b,
                metric: metric.into(),
                alternative: alternative.into(),
                out,
            };
            let result = cmd_compare(&config)?;
            if config.out.is_none() {
                println!("{}", serde_json::to_string_pretty(&result)?);
            }
        }
    }
    Ok(())
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("SEGUNC_LOG", "warn")).init();
    if let Err(e) = run(Cli::parse()) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}
