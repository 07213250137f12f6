//! Accuracy as a function of the per-task epoch budget for three
//! population strategies, written as a long-format CSV ready for plotting.
//!
//! ```bash
//! cargo run --release --example epoch_budget_curves -- /tmp/curves
//! ```

use std::path::PathBuf;

use clmem::harness::{emit_results, run_grid, ExperimentConfig, GridAxes};
use clmem::memory::Strategy;

fn main() -> clmem::Result<()> {
    let out: PathBuf = std::env::args()
        .nth(1)
        .map(Into::into)
        .unwrap_or_else(|| "curves-out".into());

    let mut cfg = ExperimentConfig::synth_trend();
    cfg.seeds = vec![11, 12, 13];
    cfg.grid = Some(GridAxes {
        strategies: Some(vec![Strategy::Random, Strategy::HighC, Strategy::LowC]),
        methods: None,
        capacities: None,
        epochs: Some(vec![1, 2, 5, 10, 15]),
    });

    let outcome = run_grid(&cfg, None)?;
    emit_results(&outcome, &out)?;

    println!("{:<10}{:>8}{:>10}{:>10}", "strategy", "epochs", "mean", "sd");
    for a in &outcome.aggregates {
        println!(
            "{:<10}{:>8}{:>9.1}%{:>9.1}%",
            a.strategy,
            a.epochs,
            100.0 * a.mean_acc,
            100.0 * a.sd_acc
        );
    }
    println!("\nlong-format data: {}", out.join("curves.csv").display());
    Ok(())
}
