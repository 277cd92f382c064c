//! Static time-series features learned by a window classifier, and a
//! feature-weighted forecast combination pipeline built on them.
//!
//! * [`nn`]: tensors, layers, loss, Adam and the weight format.
//! * [`data`]: ingestion, splitting and labelled sliding windows.
//! * [`extractor`]: classifier training and feature extraction.
//! * [`forecasters`]: the base forecaster pool.
//! * [`metalearner`]: gradient-boosted trees producing combination weights.
//! * [`evaluation`]: sMAPE and the two-phase backtest.
//! * [`analysis`]: stability, clustering, projection and similarity diagnostics.
//! * [`cli`]: the `tsfeat` command line.

pub mod analysis;
pub mod cli;
pub mod config;
pub mod data;
pub mod error;
pub mod evaluation;
pub mod extractor;
pub mod forecasters;
pub mod metalearner;
pub mod nn;
pub mod rng;
pub mod synthetic;

pub use error::{Error, Result};
