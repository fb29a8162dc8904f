use std::path::Path;

use anyhow::{Context, Result};
use edge_auction::auction::TrainConfig;
use edge_auction::eval::EvalConfig;
use edge_auction::MarketConfig;
use serde::{Deserialize, Serialize};

/// One run's configuration: market, training and evaluation sections.
/// Missing sections fall back to the case-study market and library defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub market: MarketConfig,
    #[serde(default)]
    pub train: TrainConfig,
    #[serde(default)]
    pub eval: EvalConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            market: MarketConfig::case_study(),
            train: TrainConfig::default(),
            eval: EvalConfig::default(),
        }
    }
}

impl RunConfig {
    /// Reads `config` (or the defaults) and replaces the training section
    /// with `train_config` when given.
    pub fn load(config: Option<&Path>, train_config: Option<&Path>) -> Result<Self> {
        let mut cfg = match config {
            Some(path) => read(path)?,
            None => Self::default(),
        };
        if let Some(path) = train_config {
            cfg.train = read(path)?;
        }
        cfg.market.validate().context("invalid market section")?;
        cfg.train.validate().context("invalid train section")?;
        cfg.eval
            .misreport
            .validate()
            .context("invalid eval section")?;
        Ok(cfg)
    }
}

fn read<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read config {}", path.display()))?;
    let de = &mut serde_json::Deserializer::from_str(&text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        anyhow::anyhow!(
            "config {} does not match the expected schema at `{}`: {}",
            path.display(),
            e.path(),
            e.inner()
        )
    })
}
