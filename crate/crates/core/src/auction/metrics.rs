use serde::{Deserialize, Serialize};

/// `value * (units won) - payment`.
pub fn utility(value: f64, alloc_row: &[f64], payment: f64) -> f64 {
    value * alloc_row.iter().sum::<f64>() - payment
}

pub fn revenue(payments: &[f64]) -> f64 {
    payments.iter().sum()
}

/// Total shortfall below zero utility.
pub fn ir_penalty(utilities: &[f64]) -> f64 {
    utilities.iter().map(|&u| (-u).max(0.0)).sum()
}

/// Batch-level training statistics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BatchMetrics {
    pub iter: usize,
    pub revenue: f64,
    pub ir_penalty: f64,
    pub ic_penalty: f64,
    pub loss: f64,
}
