//! A-GEM on a conflicting two-task scenario, with per-task projection
//! diagnostics: how many steps violated the memory gradient and were
//! projected, and the worst post-projection dot product (must never drop
//! below +tolerance of zero).
//!
//! ```bash
//! cargo run --release --example agem_projection
//! ```

use std::collections::BTreeMap;

use clmem::data::synth_blobs;
use clmem::memory::{MemoryBuffer, MemoryItem, Strategy};
use clmem::methods::{train_task_agem, Method, MethodConfig, Retrieval};
use clmem::nn::{MlpModel, TrainConfig};
use clmem::rng;

fn main() -> clmem::Result<()> {
    let dataset = synth_blobs(4, 60, 10, 1.1, 2)?;
    let cfg = MethodConfig {
        method: Method::Agem,
        retrieval: Retrieval::Uniform,
        train: TrainConfig {
            learning_rate: 0.05,
            momentum: 0.9,
            batch_size: 16,
            epochs: 6,
            seed: 0,
        },
        memory_batch_size: 16,
    };

    let mut model = MlpModel::init(&[10, 24, 4], 7)?;
    let mut buffer = MemoryBuffer::new(60, Strategy::RandomTaskEnd)?;
    let mut shuffle = rng::stream(1, "shuffle");
    let mut retrieval = rng::stream(1, "retrieval");
    let mut memory_rng = rng::stream(1, "memory");

    // Tasks of two classes each.
    for (task_id, classes) in [[0usize, 1], [2, 3]].iter().enumerate() {
        let indices: Vec<usize> = dataset
            .samples()
            .iter()
            .filter(|s| classes.contains(&s.label))
            .map(|s| s.index)
            .collect();
        let stats = train_task_agem(
            &mut model,
            &dataset,
            &indices,
            &buffer,
            &cfg,
            &mut shuffle,
            &mut retrieval,
        )?;
        println!(
            "task {task_id}: {} steps, {} projected, {} skipped (zero reference)",
            stats.steps, stats.projected_steps, stats.skipped_zero_ref
        );
        if stats.min_post_dot.is_finite() {
            println!(
                "         worst post-projection dot: {:+.3e} (>= -1e-10: {})",
                stats.min_post_dot,
                stats.min_post_dot >= -1e-10
            );
            println!(
                "         non-conflicting steps applied unchanged: {}",
                stats.kept_bitwise
            );
        } else {
            println!("         no memory yet, plain SGD");
        }

        let mut task_items: BTreeMap<usize, Vec<MemoryItem>> = BTreeMap::new();
        for &index in &indices {
            task_items
                .entry(dataset.sample(index).label)
                .or_default()
                .push(MemoryItem { index, score: 0.0 });
        }
        buffer.populate_task(&task_items, &mut memory_rng)?;
    }

    Ok(())
}
