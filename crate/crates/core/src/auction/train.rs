use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::auction::{
    best_misreport, loss, AuctionModel, BatchMetrics, LagrangeState, MisreportConfig, NetArch,
    PaymentMode,
};
use crate::error::{Error, Result};
use crate::market::{sample_profiles, MarketConfig, ValuationProfile};
use crate::nn::{Optimizer, OptimizerKind};
use crate::rng::{derive_seed, rng_from, stream};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub batch_size: usize,
    pub iterations: usize,
    pub learning_rate: f64,
    #[serde(default)]
    pub optimizer: OptimizerKind,
    /// Number of training profiles drawn from the market.
    pub dataset_size: usize,
    #[serde(default)]
    pub arch: NetArch,
    #[serde(default)]
    pub payment_mode: PaymentMode,
    /// Misreport search used inside the training loop. Each restart set is
    /// warm-started from the previous best misreport of that profile.
    #[serde(default)]
    pub misreport: MisreportConfig,
    #[serde(default)]
    pub lagrange: LagrangeState,
    /// Iterations between recorded metrics rows.
    pub eval_every: usize,
    /// Seeds network initialization, batch order and misreport restarts.
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            batch_size: 64,
            iterations: 5000,
            learning_rate: 1e-3,
            optimizer: OptimizerKind::Adam,
            dataset_size: 1 << 14,
            arch: NetArch::default(),
            payment_mode: PaymentMode::Penalty,
            misreport: MisreportConfig::default(),
            lagrange: LagrangeState::default(),
            eval_every: 100,
            seed: 0,
        }
    }
}

impl TrainConfig {
    /// Single-core configuration for the case-study market: two hidden
    /// layers of 32, structural payments, a short warm-started misreport
    /// search and a penalty weight that grows every multiplier update.
    pub fn desk_scale() -> Self {
        Self {
            batch_size: 64,
            iterations: 2500,
            learning_rate: 1e-3,
            dataset_size: 1 << 14,
            arch: NetArch {
                hidden_layers: vec![32, 32],
                activation: crate::nn::Activation::Tanh,
            },
            payment_mode: PaymentMode::Structural,
            misreport: MisreportConfig {
                restarts: 1,
                steps: 10,
                lr: 0.1,
            },
            lagrange: LagrangeState {
                rho_growth: 1.4,
                rho_max: 1e4,
                ..LagrangeState::default()
            },
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.batch_size == 0
            || self.iterations == 0
            || self.dataset_size == 0
            || self.eval_every == 0
        {
            return Err(Error::Config(
                "batch_size, iterations, dataset_size and eval_every must be positive".into(),
            ));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::Config(format!(
                "learning_rate must be > 0, got {}",
                self.learning_rate
            )));
        }
        if self.arch.hidden_layers.contains(&0) {
            return Err(Error::Config("hidden layer widths must be positive".into()));
        }
        self.misreport.validate()?;
        self.lagrange.validate()
    }
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub model: AuctionModel,
    pub metrics: Vec<BatchMetrics>,
    pub lagrange: LagrangeState,
}

/// Samples the training set from `market` and trains on it.
pub fn train(market: &MarketConfig, cfg: &TrainConfig) -> Result<TrainOutcome> {
    cfg.validate()?;
    let data = sample_profiles(
        market,
        cfg.dataset_size,
        derive_seed(market.seed, stream::TRAIN_DATA),
    )?;
    train_on(&data, market.n_units, cfg)
}

/// Minibatch training of both networks on a fixed profile set.
pub fn train_on(
    data: &[ValuationProfile],
    n_units: usize,
    cfg: &TrainConfig,
) -> Result<TrainOutcome> {
    cfg.validate()?;
    let n_bidders = data
        .first()
        .map(ValuationProfile::len)
        .ok_or_else(|| Error::Config("empty training set".into()))?;
    if data.iter().any(|p| p.len() != n_bidders) {
        return Err(Error::Config(
            "training profiles differ in bidder count".into(),
        ));
    }

    let mut model = AuctionModel::new(n_bidders, n_units, &cfg.arch, cfg.payment_mode, cfg.seed)?;
    let mut alloc_opt = Optimizer::new(cfg.optimizer, &model.alloc_net, cfg.learning_rate);
    let mut pay_opt = Optimizer::new(cfg.optimizer, &model.pay_net, cfg.learning_rate);
    let mut lagrange = cfg.lagrange;

    let mut batch_rng = rng_from(derive_seed(cfg.seed, stream::BATCHES));
    let mut mis_rng = rng_from(derive_seed(cfg.seed, stream::MISREPORTS));
    let mut warm: Vec<Vec<f64>> = (0..data.len())
        .map(|_| (0..n_bidders).map(|_| mis_rng.gen::<f64>()).collect())
        .collect();

    let mut order: Vec<usize> = (0..data.len()).collect();
    order.shuffle(&mut batch_rng);
    let mut cursor = 0;

    let mut metrics = Vec::new();
    let mut batch = Vec::with_capacity(cfg.batch_size);
    let mut misreports = Vec::with_capacity(cfg.batch_size);
    for iter in 1..=cfg.iterations {
        batch.clear();
        misreports.clear();
        for _ in 0..cfg.batch_size {
            if cursor == order.len() {
                order.shuffle(&mut batch_rng);
                cursor = 0;
            }
            let idx = order[cursor];
            cursor += 1;
            let values = &data[idx].values;
            let mut reports = Vec::with_capacity(n_bidders);
            for n in 0..n_bidders {
                let found = best_misreport(
                    &model,
                    values,
                    n,
                    &cfg.misreport,
                    &mut mis_rng,
                    Some(warm[idx][n]),
                )?;
                warm[idx][n] = found.bid;
                reports.push(found.bid);
            }
            batch.push(data[idx].clone());
            misreports.push(reports);
        }

        let out = loss(&model, &batch, &misreports, &lagrange)?;
        if !out.loss.is_finite() || !out.alloc_grads.is_finite() || !out.pay_grads.is_finite() {
            return Err(divergence(
                iter,
                "non-finite loss or gradient",
                &model,
                &lagrange,
                out.loss,
            ));
        }
        alloc_opt.step(&mut model.alloc_net, &out.alloc_grads)?;
        pay_opt.step(&mut model.pay_net, &out.pay_grads)?;
        if !model.is_finite() {
            return Err(divergence(
                iter,
                "non-finite parameters after update",
                &model,
                &lagrange,
                out.loss,
            ));
        }
        if model.max_abs_param() > MAX_PARAM_MAGNITUDE {
            return Err(divergence(
                iter,
                "parameter magnitude blew up",
                &model,
                &lagrange,
                out.loss,
            ));
        }

        if iter % lagrange.update_period == 0 {
            lagrange = lagrange.update(out.ir_penalty, out.ic_penalty);
        }
        if iter % cfg.eval_every == 0 || iter == cfg.iterations {
            metrics.push(out.metrics(iter));
        }
    }

    Ok(TrainOutcome {
        model,
        metrics,
        lagrange,
    })
}

/// Weights beyond this saturate every unit; training is treated as diverged.
const MAX_PARAM_MAGNITUDE: f64 = 1e6;

fn divergence(
    iter: usize,
    reason: &str,
    model: &AuctionModel,
    lagrange: &LagrangeState,
    loss: f64,
) -> Error {
    let state = serde_json::json!({
        "iter": iter,
        "loss": format!("{loss}"),
        "lagrange": lagrange,
        "model_finite": model.is_finite(),
        "model": if model.is_finite() { serde_json::to_value(model).ok() } else { None },
    });
    Error::Divergence {
        iter,
        reason: reason.to_string(),
        state: state.to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::Activation;

    fn tiny_cfg() -> TrainConfig {
        TrainConfig {
            batch_size: 8,
            iterations: 30,
            learning_rate: 5e-3,
            dataset_size: 64,
            arch: NetArch {
                hidden_layers: vec![8],
                activation: Activation::Tanh,
            },
            misreport: MisreportConfig {
                restarts: 1,
                steps: 3,
                lr: 0.1,
            },
            lagrange: LagrangeState {
                update_period: 10,
                ..Default::default()
            },
            eval_every: 10,
            ..Default::default()
        }
    }

    #[test]
    fn runs_are_reproducible() {
        let market = MarketConfig::uniform(2, 1);
        let a = train(&market, &tiny_cfg()).unwrap();
        let b = train(&market, &tiny_cfg()).unwrap();
        assert_eq!(a.metrics, b.metrics);
        assert_eq!(a.model, b.model);
        assert_eq!(a.metrics.len(), 3);
        assert_eq!(a.metrics.last().unwrap().iter, 30);
    }

    #[test]
    fn multipliers_move_on_schedule() {
        let market = MarketConfig::uniform(2, 1);
        let out = train(&market, &tiny_cfg()).unwrap();
        let start = tiny_cfg().lagrange;
        assert!(out.lagrange.lambda_ir >= start.lambda_ir);
        assert!(out.lagrange.lambda_ic >= start.lambda_ic);
    }

    #[test]
    fn revenue_improves_from_initialization() {
        let market = MarketConfig::uniform(2, 1);
        let cfg = TrainConfig {
            iterations: 300,
            eval_every: 50,
            ..tiny_cfg()
        };
        let out = train(&market, &cfg).unwrap();
        assert!(out.metrics.iter().all(|m| m.loss.is_finite()));
        assert!(out
            .metrics
            .iter()
            .all(|m| m.ir_penalty >= 0.0 && m.ic_penalty >= 0.0));
        let first = out.metrics.first().unwrap().loss;
        let last = out.metrics.last().unwrap().loss;
        assert!(last < first, "loss {first} -> {last}");
    }

    #[test]
    fn divergence_is_reported() {
        let market = MarketConfig::uniform(2, 1);
        let cfg = TrainConfig {
            learning_rate: 1e200,
            optimizer: OptimizerKind::Sgd,
            ..tiny_cfg()
        };
        match train(&market, &cfg) {
            Err(Error::Divergence { state, .. }) => assert!(state.contains("lagrange")),
            other => panic!("expected divergence, got {other:?}"),
        }
    }

    #[test]
    fn invalid_configs() {
        let market = MarketConfig::uniform(2, 1);
        let cfg = TrainConfig {
            batch_size: 0,
            ..tiny_cfg()
        };
        assert!(matches!(train(&market, &cfg), Err(Error::Config(_))));
        let cfg = TrainConfig {
            learning_rate: -1.0,
            ..tiny_cfg()
        };
        assert!(train(&market, &cfg).is_err());
    }
}
