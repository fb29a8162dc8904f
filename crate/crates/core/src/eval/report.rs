use serde::{Deserialize, Serialize};

use crate::auction::{estimate_regret, ir_penalty, AuctionModel, MisreportConfig};
use crate::error::{Error, Result};
use crate::eval::exact_regret_grid;
use crate::market::ValuationProfile;
use crate::mechanism::Mechanism;
use crate::rng::{derive_seed, stream};
use crate::tolerances::TOLERANCES;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalConfig {
    /// Profiles in the held-out set.
    pub heldout_size: usize,
    pub grid_step: f64,
    pub misreport: MisreportConfig,
    /// Seeds the misreport restarts.
    pub seed: u64,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            heldout_size: 1000,
            grid_step: TOLERANCES.grid_step,
            misreport: MisreportConfig::default(),
            seed: 0,
        }
    }
}

/// Held-out statistics under truthful play.
///
/// Regret for each (profile, bidder) is the larger of the gradient-ascent
/// estimate and the grid oracle. `max_regret` is the largest per-bidder
/// expected regret; `worst_case_regret` the largest single-profile value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub mean_revenue: f64,
    pub mean_ir_penalty: f64,
    pub max_regret: f64,
    pub mean_regret: f64,
    pub n_profiles: usize,
    pub worst_case_regret: f64,
    pub per_bidder_regret: Vec<f64>,
    pub mean_ascent_regret: f64,
    pub mean_grid_regret: f64,
    /// Cases where ascent beat the grid by more than one grid step of slack.
    pub ascent_above_grid: usize,
    /// Cases where ascent fell short of the grid by more than one grid step.
    pub ascent_shortfalls: usize,
}

pub fn evaluate_model(model: &AuctionModel, profiles: &[ValuationProfile]) -> Result<EvalReport> {
    evaluate_model_with(model, profiles, &EvalConfig::default())
}

pub fn evaluate_model_with(
    model: &AuctionModel,
    profiles: &[ValuationProfile],
    cfg: &EvalConfig,
) -> Result<EvalReport> {
    evaluate(model, profiles, cfg, |values, n, idx| {
        let seed = derive_seed(
            derive_seed(cfg.seed, stream::EVAL_MISREPORTS),
            (idx * model.n_bidders + n) as u64,
        );
        estimate_regret(model, values, n, &cfg.misreport, seed).map(Some)
    })
}

/// Grid-oracle-only evaluation for mechanisms without bid gradients.
pub fn evaluate_mechanism(
    mechanism: &dyn Mechanism,
    profiles: &[ValuationProfile],
    cfg: &EvalConfig,
) -> Result<EvalReport> {
    evaluate(mechanism, profiles, cfg, |_, _, _| Ok(None))
}

fn evaluate<M, F>(
    mechanism: &M,
    profiles: &[ValuationProfile],
    cfg: &EvalConfig,
    mut ascent: F,
) -> Result<EvalReport>
where
    M: Mechanism + ?Sized,
    F: FnMut(&[f64], usize, usize) -> Result<Option<f64>>,
{
    if profiles.is_empty() {
        return Err(Error::Config(
            "evaluation needs at least one profile".into(),
        ));
    }
    let n_bidders = mechanism.n_bidders();
    let mut revenue = 0.0;
    let mut ir = 0.0;
    let mut per_bidder = vec![0.0; n_bidders];
    let (mut ascent_total, mut grid_total, mut worst) = (0.0, 0.0, 0.0f64);
    let (mut above, mut short) = (0, 0);
    for (idx, profile) in profiles.iter().enumerate() {
        let values = &profile.values;
        let out = mechanism.run(values)?;
        revenue += out.revenue();
        let utilities: Vec<f64> = (0..n_bidders)
            .map(|n| out.utility_of(n, values[n]))
            .collect();
        ir += ir_penalty(&utilities);
        for n in 0..n_bidders {
            let grid = exact_regret_grid(mechanism, values, n, cfg.grid_step)?;
            let est = ascent(values, n, idx)?;
            let regret = est.map_or(grid, |e| e.max(grid));
            if let Some(e) = est {
                ascent_total += e;
                if e > grid + cfg.grid_step + TOLERANCES.oracle_slack {
                    above += 1;
                }
                if e < grid - cfg.grid_step - TOLERANCES.oracle_slack {
                    short += 1;
                }
            }
            grid_total += grid;
            per_bidder[n] += regret;
            worst = worst.max(regret);
        }
    }
    let count = profiles.len() as f64;
    per_bidder.iter_mut().for_each(|r| *r /= count);
    let cells = count * n_bidders as f64;
    Ok(EvalReport {
        mean_revenue: revenue / count,
        mean_ir_penalty: ir / count,
        max_regret: per_bidder.iter().copied().fold(0.0, f64::max),
        mean_regret: per_bidder.iter().sum::<f64>() / n_bidders as f64,
        n_profiles: profiles.len(),
        worst_case_regret: worst,
        per_bidder_regret: per_bidder,
        mean_ascent_regret: ascent_total / cells,
        mean_grid_regret: grid_total / cells,
        ascent_above_grid: above,
        ascent_shortfalls: short,
    })
}
