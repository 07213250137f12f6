//! Experience Replay with uniform memory batches versus MIR retrieval,
//! which replays the memory samples most interfered with by the upcoming
//! update. MIR recomputes candidate losses at every step; population-side
//! selection (CAWS) gets comparable accuracy for free.
//!
//! ```bash
//! cargo run --release --example mir_vs_uniform
//! ```

use clmem::harness::{build_context, run_experiment_in_context, ExperimentConfig};
use clmem::memory::Strategy;
use clmem::methods::Retrieval;

fn main() -> clmem::Result<()> {
    let mut base = ExperimentConfig::synth_trend();
    base.train.epochs = 10;
    base.seeds = vec![11, 12, 13];

    let mut score_ctx_cfg = base.clone();
    score_ctx_cfg.strategy = Strategy::HighC;
    let ctx = build_context(&score_ctx_cfg)?;

    let variants: [(&str, Strategy, Retrieval); 4] = [
        ("random + uniform", Strategy::Random, Retrieval::Uniform),
        (
            "random + MIR",
            Strategy::Random,
            Retrieval::Mir {
                candidate_pool_size: 50,
                select_k: 16,
            },
        ),
        (
            "caws(0.5) + uniform",
            Strategy::Caws { delta: 0.5 },
            Retrieval::Uniform,
        ),
        (
            "caws(0.5) + MIR",
            Strategy::Caws { delta: 0.5 },
            Retrieval::Mir {
                candidate_pool_size: 50,
                select_k: 16,
            },
        ),
    ];

    println!("{:<22}{:>12}{:>12}", "variant", "mean acc", "time/run");
    for (label, strategy, retrieval) in variants {
        let mut cfg = base.clone();
        cfg.strategy = strategy;
        cfg.method.retrieval = retrieval;
        let mut total = 0.0;
        let mut seconds = 0.0;
        for &seed in &cfg.seeds {
            let r = run_experiment_in_context(&cfg, &ctx, seed, None)?;
            total += r.avg_accuracy;
            seconds += r.wall_time_s;
        }
        println!(
            "{:<22}{:>11.1}%{:>11.2}s",
            label,
            100.0 * total / cfg.seeds.len() as f64,
            seconds / cfg.seeds.len() as f64
        );
    }
    Ok(())
}
