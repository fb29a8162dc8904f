//! Dense feed-forward networks with exact reverse-mode gradients.
//!
//! Only what the auction networks need: fully connected layers, a shared
//! hidden activation, one output activation, gradients with respect to both
//! parameters and inputs, and first-order optimizers.

mod fd;
mod net;
mod optim;

pub use fd::finite_diff_gradient;
pub use net::{Activation, DenseNet, Gradients, Matrix, NetDocument, Trace, NET_FORMAT_VERSION};
pub use optim::{AdamState, Optimizer, OptimizerKind};
