//! Compares all memory population strategies on the same class-incremental
//! scenario, under a tight epoch budget and at convergence.
//!
//! The headline pattern: picking only the most consistent samples (high-c)
//! wins when training time is short, plain random sampling is a strong
//! baseline given enough epochs, and CAWS (random sampling above a
//! consistency threshold) beats random even at convergence.
//!
//! ```bash
//! cargo run --release --example strategy_comparison
//! ```

use clmem::harness::{build_context, run_experiment_in_context, ExperimentConfig};
use clmem::memory::Strategy;

fn mean_accuracy(
    cfg: &ExperimentConfig,
    ctx: &clmem::harness::ExperimentContext,
) -> clmem::Result<f64> {
    let mut total = 0.0;
    for &seed in &cfg.seeds {
        total += run_experiment_in_context(cfg, ctx, seed, None)?.avg_accuracy;
    }
    Ok(total / cfg.seeds.len() as f64)
}

fn main() -> clmem::Result<()> {
    let base = ExperimentConfig::synth_trend();
    // Build one context with estimated scores and share it across runs.
    let mut score_cfg = base.clone();
    score_cfg.strategy = Strategy::HighC;
    let ctx = build_context(&score_cfg)?;
    println!(
        "estimated consistency scores for {} samples ({} needed the in-training fallback)",
        ctx.train.len(),
        ctx.score_fallback_indices.len()
    );

    let strategies = [
        Strategy::Random,
        Strategy::HighC,
        Strategy::LowC,
        Strategy::Cobs { num_bins: 4 },
        Strategy::Caws { delta: 0.5 },
    ];

    println!("\nmean accuracy over {} seeds:", base.seeds.len());
    println!("{:<18}{:>12}{:>14}", "strategy", "1 epoch", "15 epochs");
    for strategy in strategies {
        let mut cfg = base.clone();
        cfg.strategy = strategy;
        cfg.train.epochs = 1;
        let budget = mean_accuracy(&cfg, &ctx)?;
        cfg.train.epochs = 15;
        let converged = mean_accuracy(&cfg, &ctx)?;
        println!(
            "{:<18}{:>11.1}%{:>13.1}%",
            clmem::harness::strategy_label(&strategy),
            100.0 * budget,
            100.0 * converged
        );
    }
    Ok(())
}
