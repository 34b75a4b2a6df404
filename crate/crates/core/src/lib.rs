//! Battery state-of-charge prediction with a 9-7-1 backpropagation network,
//! plus detection of substituted cycle data through prediction error.
//!
//! The pipeline: [`dataset`] parses cycle logs, [`trainer`] fits the
//! [`network`] on one battery, [`tamper`] stages substitution attacks on
//! another and [`sentinel`] raises an alarm when [`metrics::mape`] exceeds
//! a threshold.

pub mod cli;
pub mod dataset;
pub mod error;
pub mod metrics;
pub mod network;
pub mod persist;
pub mod sentinel;
pub mod tamper;
pub mod trainer;

pub use error::{Error, Result};
