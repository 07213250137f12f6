//! Smallest end-to-end run: a synthetic 6-class scenario, Experience
//! Replay, and consistency-aware memory population.
//!
//! ```bash
//! cargo run --release --example quickstart
//! ```

use clmem::harness::{
    run_experiment, DatasetSource, ExperimentConfig, MethodSpec, ScenarioCfg, ScoreSource,
};
use clmem::memory::Strategy;
use clmem::methods::{Method, Retrieval};
use clmem::nn::TrainConfig;

fn main() -> clmem::Result<()> {
    let cfg = ExperimentConfig {
        schema_version: 1,
        name: Some("quickstart".into()),
        dataset: DatasetSource::Synth {
            classes: 6,
            train_per_class: 80,
            test_per_class: 25,
            dim: 12,
            spread: 0.9,
            data_seed: 0,
        },
        scores: ScoreSource::Estimate {
            k_models: 6,
            subset_ratio: 0.5,
            hidden_layers: vec![24],
            epochs: 10,
            learning_rate: 0.05,
            momentum: 0.9,
            batch_size: 16,
            seed: 0,
        },
        scenario: ScenarioCfg {
            num_tasks: 3,
            seed: 0,
        },
        method: MethodSpec {
            kind: Method::Er,
            memory_batch_size: 16,
            retrieval: Retrieval::Uniform,
        },
        train: TrainConfig {
            learning_rate: 0.1,
            momentum: 0.9,
            batch_size: 16,
            epochs: 8,
            seed: 0,
        },
        strategy: Strategy::Caws { delta: 0.5 },
        capacity: 90,
        seeds: vec![1],
        hidden_layers: vec![24],
        output: None,
        grid: None,
    };

    let result = run_experiment(&cfg, 1)?;

    println!("cell: {}  (fingerprint {})", result.cell, result.fingerprint);
    println!("accuracy after each task (rows) on each seen task (columns):");
    for stage in 0..cfg.scenario.num_tasks {
        let row: Vec<String> = (0..=stage)
            .map(|task| format!("{:5.1}%", 100.0 * result.accuracy.get(stage, task).unwrap()))
            .collect();
        println!("  after task {stage}: {}", row.join("  "));
    }
    println!("average accuracy: {:.1}%", 100.0 * result.avg_accuracy);
    for (task, f) in result.forgetting.iter().enumerate() {
        println!("forgetting of task {task}: {:+.1} points", 100.0 * f);
    }
    Ok(())
}
