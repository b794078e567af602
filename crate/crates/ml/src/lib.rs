//! Learning components trained on solver telemetry: feature screening,
//! linear and logistic baselines, and a small feed-forward network.

pub mod data;
pub mod error;
pub mod io;
pub mod linear;
pub mod metrics;
pub mod mlp;
pub mod stats;

pub use error::{Error, Result};
