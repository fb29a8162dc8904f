//! Regret oracles, held-out evaluation and experiment sweeps.

mod grid;
mod report;
mod sweep;

pub use grid::exact_regret_grid;
pub use report::{evaluate_mechanism, evaluate_model, evaluate_model_with, EvalConfig, EvalReport};
pub use sweep::{
    compare_semcom, heldout_seeds, run_cell, sweep_apps, sweep_vsps, sweep_with, CellResult,
    CellRunner, CellSummary, SweepKind, SweepResult, SweepRow, Trainer,
};
