//! Equivalent model of a uniform quantizer with noisy input, ADC-array noise
//! figure analysis for MRC uplink receivers, ADC resolution selection, and a
//! Monte-Carlo uplink simulator that validates the analytic quantities.

pub mod cli;
pub mod equiv_model;
pub mod error;
pub mod metrics;
pub mod mimo_sim;
pub mod quantizer;

pub use error::{Error, Result};
pub use quantizer::QuantizerSpec;
