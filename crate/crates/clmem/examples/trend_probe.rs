// scratch probe - will be replaced
use clmem::harness::{build_context, run_experiment_in_context, ExperimentConfig, DatasetSource, ScoreSource, MethodSpec, ScenarioCfg};
use clmem::memory::Strategy;
use clmem::methods::{Method, Retrieval};
use clmem::nn::TrainConfig;

fn base(spread: f64, capacity: usize, lr: f64) -> ExperimentConfig {
    ExperimentConfig {
        schema_version: 1,
        name: None,
        dataset: DatasetSource::Synth {
            classes: 10, train_per_class: 100, test_per_class: 30,
            dim: 16, spread, data_seed: 0,
        },
        scores: ScoreSource::Estimate {
            k_models: 8, subset_ratio: 0.5, hidden_layers: vec![32],
            epochs: 15, learning_rate: 0.05, momentum: 0.9, batch_size: 16, seed: 0,
        },
        scenario: ScenarioCfg { num_tasks: 5, seed: 0 },
        method: MethodSpec { kind: Method::Er, memory_batch_size: 16, retrieval: Retrieval::Uniform },
        train: TrainConfig { learning_rate: lr, momentum: 0.9, batch_size: 16, epochs: 1, seed: 0 },
        strategy: Strategy::Random,
        capacity,
        seeds: vec![11, 12, 13, 14, 15],
        hidden_layers: vec![32],
        output: None,
        grid: None,
    }
}

fn mean_acc(cfg: &ExperimentConfig, ctx: &clmem::harness::ExperimentContext) -> f64 {
    let accs: Vec<f64> = cfg.seeds.iter()
        .map(|&s| run_experiment_in_context(cfg, ctx, s, None).unwrap().avg_accuracy)
        .collect();
    accs.iter().sum::<f64>() / accs.len() as f64
}

fn main() {
    let spread: f64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(1.2);
    let capacity: usize = std::env::args().nth(2).and_then(|s| s.parse().ok()).unwrap_or(100);
    let lr: f64 = std::env::args().nth(3).and_then(|s| s.parse().ok()).unwrap_or(0.05);
    let t0 = std::time::Instant::now();

    let mut cfg = base(spread, capacity, lr);
    cfg.strategy = Strategy::HighC; // force estimation in context
    let ctx = build_context(&cfg).unwrap();
    println!("context built ({} fallback) in {:.1}s", ctx.score_fallback_indices.len(), t0.elapsed().as_secs_f64());
    // score distribution
    let scores = ctx.scored.as_ref().unwrap().scores();
    let mut s = scores.to_vec(); s.sort_by(f64::total_cmp);
    println!("score quantiles: p0={:.2} p25={:.2} p50={:.2} p75={:.2} p100={:.2}",
        s[0], s[s.len()/4], s[s.len()/2], s[3*s.len()/4], s[s.len()-1]);

    let strat = |st: Strategy, e: usize| { let mut c = base(spread, capacity, lr); c.strategy = st; c.train.epochs = e; c };

    let high1 = mean_acc(&strat(Strategy::HighC, 1), &ctx);
    let low1 = mean_acc(&strat(Strategy::LowC, 1), &ctx);
    let rand1 = mean_acc(&strat(Strategy::Random, 1), &ctx);
    println!("E=1:  high={high1:.4} low={low1:.4} random={rand1:.4}  | crit3a high>low: {}", high1 > low1);

    let high15 = mean_acc(&strat(Strategy::HighC, 15), &ctx);
    let rand15 = mean_acc(&strat(Strategy::Random, 15), &ctx);
    println!("E=15: high={high15:.4} random={rand15:.4} | crit3b rand>=high-0.01: {}", rand15 >= high15 - 0.01);

    for delta in [0.3, 0.5, 0.7] {
        let caws = mean_acc(&strat(Strategy::Caws { delta }, 15), &ctx);
        println!("E=15: caws({delta})={caws:.4} vs random={rand15:.4} diff={:+.4}", caws - rand15);
    }
    println!("total {:.1}s", t0.elapsed().as_secs_f64());
}
