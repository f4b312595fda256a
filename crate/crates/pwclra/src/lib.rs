//! Piecewise low-rank channel estimation for RIS-assisted MU-MIMO uplinks.

pub mod channel;
pub mod config;
pub mod error;
pub mod baselines;
pub mod estimator;
pub mod geometry;
pub mod linalg;
pub mod matio;
pub mod metrics;
pub mod pieces;
pub mod training;

pub use error::{Error, Result};
