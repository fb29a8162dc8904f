//! The learned auction: an allocation network and a payment network trained
//! jointly to maximize revenue under IR and IC penalties.

pub mod lagrange;
pub mod loss;
pub mod metrics;
pub mod model;
pub mod regret;
pub mod train;

pub use lagrange::LagrangeState;
pub use loss::{loss, LossOutput};
pub use metrics::{ir_penalty, revenue, utility, BatchMetrics};
pub use model::{AuctionModel, NetArch, PaymentMode};
pub use regret::{best_misreport, estimate_regret, Misreport, MisreportConfig};
pub use train::{train, train_on, TrainConfig, TrainOutcome};
