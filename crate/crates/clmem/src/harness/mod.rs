//! Config-driven experiment runner.
//!
//! [`run_experiment`] executes one (config, seed) pair: build the scenario,
//! loop tasks (train, populate memory, evaluate all seen tasks), and return
//! a [`RunResult`]. [`run_grid`] runs the cartesian grid of configured axes
//! across all seeds, with isolated per-run RNG streams, and aggregates mean
//! and sample standard deviation per cell. [`emit_results`] writes JSONL,
//! an aggregate CSV, and a plot-ready long-format CSV.

mod config;
mod runner;

pub use config::{
    method_label, strategy_label, DatasetSource, ExperimentConfig, GridAxes, MethodSpec,
    ScenarioCfg, ScoreSource, SCHEMA_VERSION,
};
pub use runner::{
    build_context, emit_results, run_experiment, run_experiment_in_context, run_grid,
    AggregateRow, ExperimentContext, GridOutcome, RunFailure, RunResult,
};
