//! Ambiguity-function analysis of affine frequency division multiplexing
//! (AFDM) waveforms with random QAM payloads.

pub mod ambiguity;
pub mod cli;
pub mod constellation;
pub mod error;
pub mod grid;
pub mod harness;
pub mod metrics;
pub mod modulator;
pub mod output;
pub mod rng;
pub mod special;
pub mod statistics;

pub use error::{Error, Result};
