//! The 5-split MNIST baseline: ER with a random reservoir, capacity 2000,
//! MLP 512/256, lr 0.001, momentum 0.9, batch 32.
//!
//! Runs on the bundled 10k MNIST subset by default; point it at a
//! directory with the full MNIST IDX files (raw or .gz, named
//! `train-images.idx3-ubyte[.gz]` etc.) to reproduce at full scale.
//!
//! One seed takes a few minutes of CPU time.
//!
//! ```bash
//! cargo run --release --example mnist_split -- [data_dir] [seed]
//! ```

use std::path::{Path, PathBuf};

use clmem::harness::{build_context, run_experiment_in_context, ExperimentConfig};

fn main() -> clmem::Result<()> {
    let data_dir: PathBuf = std::env::args().nth(1).map(Into::into).unwrap_or_else(|| {
        Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/mnist-subset")
    });
    let seed: u64 = std::env::args()
        .nth(2)
        .and_then(|s| s.parse().ok())
        .unwrap_or(1);

    let cfg = ExperimentConfig::mnist_5split(&data_dir);
    println!(
        "5-split MNIST from {} (seed {seed}, {} epochs/task, capacity {})",
        data_dir.display(),
        cfg.train.epochs,
        cfg.capacity
    );

    let ctx = build_context(&cfg)?;
    println!(
        "train: {} samples, test: {} samples",
        ctx.train.len(),
        ctx.test.len()
    );
    let result = run_experiment_in_context(&cfg, &ctx, seed, None)?;

    println!("\naccuracy on each seen task after each training stage:");
    for stage in 0..cfg.scenario.num_tasks {
        let row: Vec<String> = (0..=stage)
            .map(|task| format!("{:5.1}%", 100.0 * result.accuracy.get(stage, task).unwrap()))
            .collect();
        println!("  after task {stage}: {}", row.join("  "));
    }
    println!(
        "\nfinal average accuracy: {:.2}%  (wall time {:.0}s)",
        100.0 * result.avg_accuracy,
        result.wall_time_s
    );
    if let Some(mf) = result.mean_forgetting {
        println!("mean forgetting: {:.2} points", 100.0 * mf);
    }
    Ok(())
}
