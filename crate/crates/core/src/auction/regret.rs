use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mechanism::DifferentiableMechanism;
use crate::rng::rng_from;

/// Projected gradient ascent over a single scalar misreport in [0, 1].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MisreportConfig {
    pub restarts: usize,
    pub steps: usize,
    pub lr: f64,
}

impl Default for MisreportConfig {
    fn default() -> Self {
        Self {
            restarts: 10,
            steps: 50,
            lr: 0.1,
        }
    }
}

impl MisreportConfig {
    pub fn validate(&self) -> Result<()> {
        if self.restarts == 0 || self.steps == 0 || !(self.lr > 0.0) {
            return Err(Error::Config(format!(
                "misreport search needs positive restarts, steps and lr: {self:?}"
            )));
        }
        Ok(())
    }
}

/// Best misreport found for one bidder.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Misreport {
    pub bid: f64,
    /// Utility at the misreport minus truthful utility; may be negative.
    pub gain: f64,
}

/// Searches for the utility-maximizing report of bidder `n` while the other
/// bidders report `values` truthfully. The first restart starts from
/// `warm_start` when given; the others from uniform draws.
pub fn best_misreport<M, R>(
    mechanism: &M,
    values: &[f64],
    n: usize,
    cfg: &MisreportConfig,
    rng: &mut R,
    warm_start: Option<f64>,
) -> Result<Misreport>
where
    M: DifferentiableMechanism + ?Sized,
    R: Rng + ?Sized,
{
    let value = values[n];
    let truthful = mechanism.utility(value, values, n)?;
    let mut bids = values.to_vec();
    let mut best = Misreport {
        bid: value,
        gain: 0.0,
    };
    let mut best_utility = f64::NEG_INFINITY;
    for restart in 0..cfg.restarts {
        let start = match (restart, warm_start) {
            (0, Some(w)) => w.clamp(0.0, 1.0),
            _ => rng.gen::<f64>(),
        };
        bids[n] = start;
        for _ in 0..cfg.steps {
            let (u, g) = mechanism.utility_and_grad(value, &bids, n)?;
            if u > best_utility {
                best_utility = u;
                best.bid = bids[n];
            }
            bids[n] = (bids[n] + cfg.lr * g).clamp(0.0, 1.0);
        }
        let u = mechanism.utility(value, &bids, n)?;
        if u > best_utility {
            best_utility = u;
            best.bid = bids[n];
        }
    }
    best.gain = best_utility - truthful;
    Ok(best)
}

/// `max(0, best misreport utility - truthful utility)` for bidder `n`.
pub fn estimate_regret<M>(
    mechanism: &M,
    values: &[f64],
    n: usize,
    cfg: &MisreportConfig,
    seed: u64,
) -> Result<f64>
where
    M: DifferentiableMechanism + ?Sized,
{
    cfg.validate()?;
    let mut rng = rng_from(seed);
    Ok(best_misreport(mechanism, values, n, cfg, &mut rng, None)?
        .gain
        .max(0.0))
}
