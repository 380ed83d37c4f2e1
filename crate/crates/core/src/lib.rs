//! Information-theoretic analysis of autoregressive language generators.
//!
//! Scores strings by information content (negative log-probability, in nats),
//! computes model entropy exactly or by Monte Carlo, runs the standard decoding
//! strategies, builds typical sets, and tests whether highly rated strings
//! cluster in the band `[Ĥ − σ, Ĥ + σ]` around the model entropy.

pub mod decoding;
pub mod error;
pub mod information;
pub mod lm;
pub mod pipeline;
pub mod rng;
pub mod stats;
pub mod typicality;

pub use error::{Error, Result};
