//! Learned multi-unit auctions for selling edge computing units to virtual
//! service providers whose valuations come from a sensing/communication
//! latency model, together with classical baselines and an evaluation harness.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod auction;
pub mod baselines;
pub mod error;
pub mod eval;
pub mod io;
pub mod market;
pub mod mechanism;
pub mod nn;
pub mod rng;
pub mod tolerances;

pub use error::{Error, Result};
pub use market::{MarketConfig, ValuationProfile};
pub use mechanism::{DifferentiableMechanism, Mechanism, Outcome};
