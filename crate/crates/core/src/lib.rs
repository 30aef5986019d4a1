//! Matching arbitrary magnitude responses with minimum-phase biquad cascades.

pub mod designers;
pub mod dsp;
pub mod error;
pub mod eval;
pub mod grad;
pub mod ingest;
pub mod linalg;
pub mod mlp;
pub mod poly;
pub mod randfilt;

pub use error::{Error, Result};
