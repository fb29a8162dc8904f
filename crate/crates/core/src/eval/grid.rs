use crate::error::{Error, Result};
use crate::mechanism::Mechanism;

/// Exact regret over the misreport grid `{0, step, 2 step, ..., 1}` for
/// bidder `n`, the others reporting `values` truthfully.
pub fn exact_regret_grid<M>(mechanism: &M, values: &[f64], n: usize, grid_step: f64) -> Result<f64>
where
    M: Mechanism + ?Sized,
{
    if !(grid_step > 0.0 && grid_step <= 0.5) {
        return Err(Error::Config(format!(
            "grid_step must lie in (0, 0.5], got {grid_step}"
        )));
    }
    let value = values[n];
    let truthful = mechanism.utility(value, values, n)?;
    let points = (1.0 / grid_step + 1e-9).floor() as usize;
    let mut bids = values.to_vec();
    let mut best = truthful;
    for k in 0..=points {
        bids[n] = (k as f64 * grid_step).min(1.0);
        best = best.max(mechanism.utility(value, &bids, n)?);
    }
    if (points as f64) * grid_step < 1.0 - 1e-12 {
        bids[n] = 1.0;
        best = best.max(mechanism.utility(value, &bids, n)?);
    }
    Ok((best - truthful).max(0.0))
}
