use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Multipliers and quadratic coefficient of the augmented Lagrangian.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LagrangeState {
    pub lambda_ir: f64,
    pub lambda_ic: f64,
    pub rho: f64,
    /// Training iterations between multiplier updates.
    pub update_period: usize,
    /// Factor applied to `rho` after each multiplier update (1 keeps it fixed).
    #[serde(default = "one")]
    pub rho_growth: f64,
    #[serde(default = "rho_cap")]
    pub rho_max: f64,
}

fn one() -> f64 {
    1.0
}

fn rho_cap() -> f64 {
    f64::MAX
}

impl Default for LagrangeState {
    fn default() -> Self {
        Self {
            lambda_ir: 1.0,
            lambda_ic: 1.0,
            rho: 1.0,
            update_period: 100,
            rho_growth: 1.0,
            rho_max: f64::MAX,
        }
    }
}

impl LagrangeState {
    pub fn validate(&self) -> Result<()> {
        if !(self.lambda_ir >= 0.0 && self.lambda_ic >= 0.0) {
            return Err(Error::Config("multipliers must be >= 0".into()));
        }
        if !(self.rho >= 0.0) || self.update_period == 0 || !(self.rho_growth >= 1.0) {
            return Err(Error::Config(format!(
                "need rho >= 0, update_period >= 1, rho_growth >= 1: {self:?}"
            )));
        }
        Ok(())
    }

    /// `lambda += rho * penalty` for each constraint, then optional growth of `rho`.
    pub fn update(&self, ir_penalty: f64, ic_penalty: f64) -> Self {
        let mut next = *self;
        next.lambda_ir = (self.lambda_ir + self.rho * ir_penalty.max(0.0)).max(0.0);
        next.lambda_ic = (self.lambda_ic + self.rho * ic_penalty.max(0.0)).max(0.0);
        next.rho = (self.rho * self.rho_growth).min(self.rho_max);
        next
    }
}
