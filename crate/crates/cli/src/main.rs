use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use edge_auction::auction::{train, AuctionModel};
use edge_auction::baselines::{expected_revenue_mc, BaselineKind, MarketSampler};
use edge_auction::eval::{evaluate_model_with, heldout_seeds, sweep_with, SweepKind, Trainer};
use edge_auction::io;
use edge_auction::market::{sample_dataset, sample_profiles};
use serde::Serialize;

mod config;
mod manifest;

use config::RunConfig;
use manifest::RunManifest;

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("{0}")]
    Usage(String),
}

#[derive(Parser)]
#[command(
    name = "edge-auction",
    version,
    about = "Learned auctions for edge computing units"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample valuation profiles and write them as CSV.
    Simulate {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        count: usize,
        /// Sampling seed; defaults to the market seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
    },
    /// Train the learned auction; writes model.json and metrics.csv.
    Train {
        #[arg(long)]
        config: Option<PathBuf>,
        /// JSON file replacing the config's train section.
        #[arg(long)]
        train_config: Option<PathBuf>,
        /// Overrides the training seed.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Evaluate a trained model on held-out profiles.
    Evaluate {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Held-out profiles; defaults to the eval section.
        #[arg(long)]
        count: Option<usize>,
        /// Market seed the held-out stream is derived from.
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory; the report is printed when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Monte Carlo revenue of a classical mechanism.
    Baseline {
        /// One of vcg, second-price, first-price, myerson.
        #[arg(long)]
        mechanism: String,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value_t = 100_000)]
        count: usize,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Train and evaluate one cell per swept value.
    Sweep {
        /// vsps, apps or semcom (values 0/1).
        #[arg(long)]
        kind: String,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        train_config: Option<PathBuf>,
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<usize>,
        #[arg(long)]
        out: PathBuf,
    },
}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    CliError::Usage(msg.into()).into()
}

fn load(config: Option<&Path>, train_config: Option<&Path>) -> Result<RunConfig> {
    RunConfig::load(config, train_config).map_err(|e| usage(format!("{e:#}")))
}

fn emit<T: Serialize>(out: Option<&Path>, file: &str, value: &T) -> Result<()> {
    match out {
        Some(dir) => {
            io::write_json(&dir.join(file), value).with_context(|| format!("cannot write {file}"))
        }
        None => {
            println!("{}", serde_json::to_string_pretty(value)?);
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate {
            config,
            count,
            seed,
            out,
        } => {
            let cfg = load(config.as_deref(), None)?;
            if count == 0 {
                return Err(usage("--count must be >= 1"));
            }
            let seed = seed.unwrap_or(cfg.market.seed);
            RunManifest::new("simulate", &cfg, &[("sample", seed)], &["valuations.csv"])
                .write(&out)?;
            let data = sample_dataset(&cfg.market, count, seed)?;
            io::write_dataset_csv(io::create_file(&out.join("valuations.csv"))?, &data)?;
        }
        Command::Train {
            config,
            train_config,
            seed,
            out,
        } => {
            let mut cfg = load(config.as_deref(), train_config.as_deref())?;
            if let Some(seed) = seed {
                cfg.train.seed = seed;
            }
            let (data_seed, _) = heldout_seeds(cfg.market.seed);
            RunManifest::new(
                "train",
                &cfg,
                &[
                    ("market", cfg.market.seed),
                    ("train_data", data_seed),
                    ("train", cfg.train.seed),
                ],
                &["model.json", "metrics.csv"],
            )
            .write(&out)?;
            let trained = train(&cfg.market, &cfg.train)?;
            io::write_json(&out.join("model.json"), &trained.model)?;
            io::write_metrics_csv(io::create_file(&out.join("metrics.csv"))?, &trained.metrics)?;
        }
        Command::Evaluate {
            model,
            config,
            count,
            seed,
            out,
        } => {
            let mut cfg = load(config.as_deref(), None)?;
            if let Some(seed) = seed {
                cfg.market.seed = seed;
            }
            if let Some(count) = count {
                cfg.eval.heldout_size = count;
            }
            let model: AuctionModel = io::read_json(&model)
                .with_context(|| format!("cannot load model {}", model.display()))
                .map_err(|e| usage(format!("{e:#}")))?;
            model.validate()?;
            let (_, heldout) = heldout_seeds(cfg.market.seed);
            if let Some(dir) = &out {
                RunManifest::new(
                    "evaluate",
                    &cfg,
                    &[("market", cfg.market.seed), ("heldout", heldout)],
                    &["report.json"],
                )
                .write(dir)?;
            }
            let profiles = sample_profiles(&cfg.market, cfg.eval.heldout_size, heldout)?;
            let report = evaluate_model_with(&model, &profiles, &cfg.eval)?;
            emit(out.as_deref(), "report.json", &report)?;
        }
        Command::Baseline {
            mechanism,
            config,
            count,
            seed,
            out,
        } => {
            let kind = BaselineKind::parse(&mechanism)?;
            let cfg = load(config.as_deref(), None)?;
            let seed = seed.unwrap_or(cfg.market.seed);
            if let Some(dir) = &out {
                RunManifest::new("baseline", &cfg, &[("sample", seed)], &["revenue.json"])
                    .write(dir)?;
            }
            let mech = kind.build(cfg.market.n_bidders(), cfg.market.n_units);
            let sampler = MarketSampler::new(cfg.market.clone())?;
            let revenue = expected_revenue_mc(mech.as_ref(), &sampler, count, seed)?;
            #[derive(Serialize)]
            struct BaselineRevenue<'a> {
                mechanism: &'a str,
                n_samples: usize,
                seed: u64,
                revenue: f64,
            }
            let result = BaselineRevenue {
                mechanism: &mechanism,
                n_samples: count,
                seed,
                revenue,
            };
            emit(out.as_deref(), "revenue.json", &result)?;
        }
        Command::Sweep {
            kind,
            config,
            train_config,
            values,
            out,
        } => {
            let kind = SweepKind::parse(&kind)?;
            let cfg = load(config.as_deref(), train_config.as_deref())?;
            if values.is_empty() {
                return Err(usage("--values needs at least one value"));
            }
            RunManifest::new(
                "sweep",
                &cfg,
                &[
                    ("market", cfg.market.seed),
                    ("train", cfg.train.seed),
                    ("eval", cfg.eval.seed),
                ],
                &["sweep.csv", "summary.json"],
            )
            .write(&out)?;
            let mut runner = Trainer {
                train: cfg.train.clone(),
                eval: cfg.eval.clone(),
            };
            let result = sweep_with(kind, &cfg.market, &values, &mut runner)?;
            io::write_sweep_csv(io::create_file(&out.join("sweep.csv"))?, &result.rows())?;
            io::write_json(&out.join("summary.json"), &result.summaries())?;
        }
    }
    Ok(())
}

/// 2 for usage and configuration errors, 1 for runtime failures.
fn exit_code(err: &anyhow::Error) -> u8 {
    let is_usage = err.chain().any(|cause| {
        cause.is::<CliError>()
            || matches!(
                cause.downcast_ref::<edge_auction::Error>(),
                Some(edge_auction::Error::Config(_))
            )
    });
    if is_usage {
        2
    } else {
        1
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
