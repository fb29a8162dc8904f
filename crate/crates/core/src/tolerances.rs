//! Numerical tolerances shared by tests, oracles and the evaluation harness.

/// One record holding every tolerance constant used across the crate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Step for central finite differences.
    pub fd_step: f64,
    /// Relative error allowed between backprop and finite differences.
    pub grad_rel: f64,
    /// Relative error allowed for the full auction loss gradient.
    pub loss_grad_rel: f64,
    /// Misreport grid resolution for the exact regret oracle.
    pub grid_step: f64,
    /// Slack added when comparing the ascent estimate against the grid oracle.
    pub oracle_slack: f64,
    /// Threshold on the held-out mean IR penalty.
    pub ir_threshold: f64,
    /// Threshold on the held-out regret.
    pub regret_threshold: f64,
    /// Relative band for "nondecreasing" trend checks.
    pub trend_band: f64,
}

pub const TOLERANCES: Tolerances = Tolerances {
    fd_step: 1e-5,
    grad_rel: 1e-5,
    loss_grad_rel: 1e-4,
    grid_step: 1e-3,
    oracle_slack: 1e-6,
    ir_threshold: 0.02,
    regret_threshold: 0.02,
    trend_band: 0.05,
};

/// Relative error with an absolute floor so entries near zero compare sanely.
pub fn relative_error(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1.0)
}
