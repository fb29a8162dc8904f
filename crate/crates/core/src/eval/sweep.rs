use serde::{Deserialize, Serialize};

use crate::auction::{train, AuctionModel, BatchMetrics, TrainConfig};
use crate::baselines::Vcg;
use crate::error::{Error, Result};
use crate::eval::{evaluate_mechanism, evaluate_model_with, EvalConfig, EvalReport};
use crate::market::{sample_profiles, MarketConfig, ValuationProfile};
use crate::rng::{derive_seed, stream};

/// `(training seed, held-out seed)` derived from the market seed. The two
/// streams are distinct by construction; this asserts it.
pub fn heldout_seeds(market_seed: u64) -> (u64, u64) {
    let train = derive_seed(market_seed, stream::TRAIN_DATA);
    let heldout = derive_seed(market_seed, stream::HELDOUT_DATA);
    assert_ne!(train, heldout, "training and held-out seeds collide");
    (train, heldout)
}

/// One trained-and-evaluated market.
#[derive(Debug, Clone)]
pub struct CellResult {
    pub market: MarketConfig,
    pub model: AuctionModel,
    pub metrics: Vec<BatchMetrics>,
    pub learned: EvalReport,
    pub vcg: EvalReport,
    pub heldout: Vec<ValuationProfile>,
}

impl CellResult {
    pub fn mean_valuation(&self) -> f64 {
        let values: Vec<f64> = self
            .heldout
            .iter()
            .flat_map(|p| p.values.iter().copied())
            .collect();
        values.iter().sum::<f64>() / values.len() as f64
    }

    pub fn summary(&self, param: &str) -> CellSummary {
        CellSummary {
            param: param.to_string(),
            learned: self.learned.clone(),
            vcg: self.vcg.clone(),
            mean_valuation: self.mean_valuation(),
            final_metrics: self.metrics.last().copied(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellSummary {
    pub param: String,
    pub learned: EvalReport,
    pub vcg: EvalReport,
    pub mean_valuation: f64,
    pub final_metrics: Option<BatchMetrics>,
}

/// Trains on the training stream of `market` and evaluates both the learned
/// auction and VCG on the disjoint held-out stream.
pub fn run_cell(
    market: &MarketConfig,
    train_cfg: &TrainConfig,
    eval_cfg: &EvalConfig,
) -> Result<CellResult> {
    let (_, heldout_seed) = heldout_seeds(market.seed);
    let trained = train(market, train_cfg)?;
    let heldout = sample_profiles(market, eval_cfg.heldout_size, heldout_seed)?;
    let learned = evaluate_model_with(&trained.model, &heldout, eval_cfg)?;
    let vcg = Vcg {
        n_bidders: market.n_bidders(),
        n_units: market.n_units,
        unit_cap: None,
    };
    let vcg = evaluate_mechanism(&vcg, &heldout, eval_cfg)?;
    Ok(CellResult {
        market: market.clone(),
        model: trained.model,
        metrics: trained.metrics,
        learned,
        vcg,
        heldout,
    })
}

/// Produces a [`CellResult`] for a market; lets callers cache or log cells.
pub trait CellRunner {
    fn run(&mut self, market: &MarketConfig) -> Result<CellResult>;
}

/// Runs every cell with fixed training and evaluation settings.
#[derive(Debug, Clone)]
pub struct Trainer {
    pub train: TrainConfig,
    pub eval: EvalConfig,
}

impl CellRunner for Trainer {
    fn run(&mut self, market: &MarketConfig) -> Result<CellResult> {
        run_cell(market, &self.train, &self.eval)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepKind {
    Vsps,
    Apps,
    Semcom,
}

impl SweepKind {
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "vsps" => Ok(Self::Vsps),
            "apps" => Ok(Self::Apps),
            "semcom" => Ok(Self::Semcom),
            other => Err(Error::Config(format!(
                "unknown sweep kind '{other}', expected vsps, apps or semcom"
            ))),
        }
    }
}

/// One CSV row: swept value, mechanism, held-out revenue and penalties.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub param: String,
    pub mechanism: String,
    pub revenue: f64,
    pub ir_penalty: f64,
    pub max_regret: f64,
}

#[derive(Debug, Clone)]
pub struct SweepResult {
    pub kind: SweepKind,
    pub cells: Vec<(String, CellResult)>,
}

impl SweepResult {
    /// Learned and VCG rows for each cell, in swept-value order.
    pub fn rows(&self) -> Vec<SweepRow> {
        self.cells
            .iter()
            .flat_map(|(param, cell)| {
                [("learned", &cell.learned), ("vcg", &cell.vcg)].map(|(mechanism, r)| SweepRow {
                    param: param.clone(),
                    mechanism: mechanism.to_string(),
                    revenue: r.mean_revenue,
                    ir_penalty: r.mean_ir_penalty,
                    max_regret: r.max_regret,
                })
            })
            .collect()
    }

    pub fn summaries(&self) -> Vec<CellSummary> {
        self.cells.iter().map(|(p, c)| c.summary(p)).collect()
    }

    pub fn learned_revenues(&self) -> Vec<f64> {
        self.cells
            .iter()
            .map(|(_, c)| c.learned.mean_revenue)
            .collect()
    }
}

/// Applies `kind` with each value to `base` and runs the cells in order.
/// Values for `semcom` are 0 (off) or 1 (on).
pub fn sweep_with(
    kind: SweepKind,
    base: &MarketConfig,
    values: &[usize],
    runner: &mut dyn CellRunner,
) -> Result<SweepResult> {
    if values.is_empty() {
        return Err(Error::Config("sweep needs at least one value".into()));
    }
    let mut cells = Vec::with_capacity(values.len());
    for &value in values {
        let (param, market) = match kind {
            SweepKind::Vsps => (value.to_string(), base.clone().with_n_vsps(value)),
            SweepKind::Apps => {
                if value == 0 {
                    return Err(Error::Config("number of applications must be >= 1".into()));
                }
                (value.to_string(), base.clone().with_n_apps(value))
            }
            SweepKind::Semcom => match value {
                0 => ("off".to_string(), base.clone().with_semcom(false)),
                1 => ("on".to_string(), base.clone().with_semcom(true)),
                other => {
                    return Err(Error::Config(format!(
                        "semcom values are 0 or 1, got {other}"
                    )))
                }
            },
        };
        market.validate()?;
        cells.push((param, runner.run(&market)?));
    }
    Ok(SweepResult { kind, cells })
}

pub fn sweep_vsps(
    base: &MarketConfig,
    n_vsps: &[usize],
    train: &TrainConfig,
    eval: &EvalConfig,
) -> Result<SweepResult> {
    let mut runner = Trainer {
        train: train.clone(),
        eval: eval.clone(),
    };
    sweep_with(SweepKind::Vsps, base, n_vsps, &mut runner)
}

pub fn sweep_apps(
    base: &MarketConfig,
    n_apps: &[usize],
    train: &TrainConfig,
    eval: &EvalConfig,
) -> Result<SweepResult> {
    let mut runner = Trainer {
        train: train.clone(),
        eval: eval.clone(),
    };
    sweep_with(SweepKind::Apps, base, n_apps, &mut runner)
}

/// Paired-seed runs with SemCom on and off; returns `(on, off)`.
pub fn compare_semcom(
    base: &MarketConfig,
    train: &TrainConfig,
    eval: &EvalConfig,
) -> Result<(CellResult, CellResult)> {
    let mut runner = Trainer {
        train: train.clone(),
        eval: eval.clone(),
    };
    compare_semcom_with(base, &mut runner)
}

pub fn compare_semcom_with(
    base: &MarketConfig,
    runner: &mut dyn CellRunner,
) -> Result<(CellResult, CellResult)> {
    let mut result = sweep_with(SweepKind::Semcom, base, &[1, 0], runner)?;
    let (_, off) = result.cells.pop().unwrap();
    let (_, on) = result.cells.pop().unwrap();
    Ok((on, off))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::auction::{LagrangeState, MisreportConfig, NetArch};
    use crate::nn::Activation;

    fn tiny() -> (TrainConfig, EvalConfig) {
        let train = TrainConfig {
            batch_size: 8,
            iterations: 20,
            learning_rate: 5e-3,
            dataset_size: 32,
            arch: NetArch {
                hidden_layers: vec![6],
                activation: Activation::Tanh,
            },
            misreport: MisreportConfig {
                restarts: 1,
                steps: 2,
                lr: 0.1,
            },
            lagrange: LagrangeState {
                update_period: 10,
                ..Default::default()
            },
            eval_every: 10,
            ..Default::default()
        };
        let eval = EvalConfig {
            heldout_size: 10,
            grid_step: 0.05,
            misreport: MisreportConfig {
                restarts: 1,
                steps: 5,
                lr: 0.1,
            },
            seed: 1,
        };
        (train, eval)
    }

    #[test]
    fn vsps_sweep_cardinality() {
        let (t, e) = tiny();
        let base = MarketConfig::case_study();
        let sweep = sweep_vsps(&base, &[2, 3, 4, 5], &t, &e).unwrap();
        let rows = sweep.rows();
        assert_eq!(rows.len(), 8);
        assert_eq!(rows[0].param, "2");
        assert!(rows.iter().all(|r| r.revenue.is_finite()));
        assert_eq!(rows.iter().filter(|r| r.mechanism == "vcg").count(), 4);
    }

    #[test]
    fn apps_sweep_and_errors() {
        let (t, e) = tiny();
        let base = MarketConfig::case_study();
        let sweep = sweep_apps(&base, &[1, 3], &t, &e).unwrap();
        assert_eq!(sweep.cells[0].1.market.vsps[0].app_latency_reqs_s.len(), 1);
        assert!(sweep_apps(&base, &[], &t, &e).is_err());
        assert!(sweep_apps(&base, &[0], &t, &e).is_err());
    }

    #[test]
    fn semcom_pairs_share_requirements() {
        let (t, e) = tiny();
        let (on, off) = compare_semcom(&MarketConfig::case_study(), &t, &e).unwrap();
        assert!(on.market.semcom_enabled && !off.market.semcom_enabled);
        for (a, b) in on.heldout.iter().zip(&off.heldout) {
            for (x, y) in a.values.iter().zip(&b.values) {
                assert!(x <= y);
            }
        }
    }

    #[test]
    fn heldout_disjoint_from_training() {
        for seed in 0..100 {
            let (a, b) = heldout_seeds(seed);
            assert_ne!(a, b);
        }
    }
}
