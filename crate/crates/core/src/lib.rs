//! Simulation library for adversarial online learning under noisy binary
//! feedback.
//!
//! Binary losses are observed through a symmetric channel that flips each
//! bit with probability `(1 - eps) / 2`, where the noise level `eps` is
//! constant, drawn i.i.d. per action, or drawn once per round and shared.
//! The crate provides the exponential-weights learners and loss estimators
//! for each feedback/noise setting, the stochastic lower-bound adversaries,
//! an oracle module of independent verifiers, and a replication harness
//! that measures pseudo-regret scaling across horizons.

#![forbid(unsafe_code)]

pub mod adversaries;
pub mod error;
pub mod estimators;
pub mod harness;
pub mod learners;
pub mod noise;
pub mod oracle;
pub mod rng;
pub mod sim;

pub use error::{Error, Result};
