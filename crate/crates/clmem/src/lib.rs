//! Class-incremental continual learning with consistency-aware episodic
//! memory population.
//!
//! The crate is organized around one question: *which samples should a
//! bounded replay memory keep?* It provides:
//!
//! - [`nn`] — a small dense classifier (ReLU hidden layers, softmax
//!   cross-entropy, SGD with momentum) with flat-gradient access.
//! - [`data`] — MNIST-style IDX ingestion, CSV datasets, synthetic Gaussian
//!   blobs, and class-incremental scenario construction.
//! - [`cscore`] — per-sample learning-consistency scores in `[0, 1]`,
//!   loaded from files or estimated by holdout retraining.
//! - [`memory`] — a class-balanced episodic buffer with five population
//!   strategies: random reservoir, high-c, low-c, COBS (consistency-balanced
//!   bins), and CAWS (threshold-restricted random sampling).
//! - [`methods`] — Experience Replay, GDumb, and A-GEM training loops plus
//!   MIR retrieval.
//! - [`metrics`] — accuracy matrices, average accuracy, and forgetting.
//! - [`harness`] — config-driven experiment and grid runners with
//!   machine-readable outputs.
//!
//! See the `examples/` directory for one runnable program per capability,
//! and the `clmem` binary for the config-file CLI.

pub mod cscore;
pub mod data;
pub mod error;
pub mod harness;
pub mod memory;
pub mod methods;
pub mod metrics;
pub mod nn;
pub mod rng;

pub use error::{Error, Result};
