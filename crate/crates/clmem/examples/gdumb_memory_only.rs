//! GDumb across a task sequence: the memory is populated first, then a
//! fresh model trains on the buffer alone. Shows the class balance of the
//! buffer after every task next to the resulting accuracies.
//!
//! ```bash
//! cargo run --release --example gdumb_memory_only
//! ```

use clmem::harness::{DatasetSource, ExperimentConfig, MethodSpec, ScenarioCfg, ScoreSource};
use clmem::memory::Strategy;
use clmem::methods::{Method, Retrieval};
use clmem::nn::TrainConfig;

fn main() -> clmem::Result<()> {
    let cfg = ExperimentConfig {
        schema_version: 1,
        name: Some("gdumb-demo".into()),
        dataset: DatasetSource::Synth {
            classes: 8,
            train_per_class: 80,
            test_per_class: 25,
            dim: 12,
            spread: 0.8,
            data_seed: 1,
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
            num_tasks: 4,
            seed: 0,
        },
        method: MethodSpec {
            kind: Method::Gdumb,
            memory_batch_size: 16,
            retrieval: Retrieval::Uniform,
        },
        train: TrainConfig {
            learning_rate: 0.1,
            momentum: 0.9,
            batch_size: 16,
            epochs: 20,
            seed: 0,
        },
        strategy: Strategy::Caws { delta: 0.3 },
        capacity: 120,
        seeds: vec![1],
        hidden_layers: vec![24],
        output: None,
        grid: None,
    };

    let dir = std::env::temp_dir().join("clmem-gdumb-demo");
    let ctx = clmem::harness::build_context(&cfg)?;
    let result =
        clmem::harness::run_experiment_in_context(&cfg, &ctx, 1, Some(&dir))?;

    println!("GDumb with CAWS population, capacity {}:", cfg.capacity);
    for (t, snapshot) in result.buffer_snapshots.iter().enumerate() {
        let text = std::fs::read_to_string(snapshot)?;
        let mut per_class = std::collections::BTreeMap::new();
        for line in text.lines().skip(1) {
            let class: usize = line.split(',').next().unwrap().parse().unwrap();
            *per_class.entry(class).or_insert(0usize) += 1;
        }
        let balance: Vec<String> = per_class
            .iter()
            .map(|(c, n)| format!("{c}:{n}"))
            .collect();
        println!(
            "  after task {t}: buffer {} samples [{}], avg accuracy so far {:.1}%",
            text.lines().count() - 1,
            balance.join(" "),
            100.0
                * (0..=t)
                    .map(|i| result.accuracy.get(t, i).unwrap())
                    .sum::<f64>()
                / (t + 1) as f64
        );
    }
    println!("final average accuracy: {:.1}%", 100.0 * result.avg_accuracy);
    Ok(())
}
