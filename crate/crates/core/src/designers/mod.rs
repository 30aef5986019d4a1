//! Non-neural designers: modified Yule-Walker and gradient descent.

mod myw;
mod sgd;

pub use myw::{myw_design, MywConfig};
pub use sgd::{sgd_design, SgdConfig, SgdOptimizer, SgdResult};
