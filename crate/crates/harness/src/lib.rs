//! Experiment orchestration for weylab: configuration, spectrum cache,
//! curve fitting and artifact emission.

pub mod cache;
pub mod config;
pub mod criteria;
pub mod error;
pub mod fit;
pub mod output;
pub mod runner;

pub use error::{HarnessError, Result};
