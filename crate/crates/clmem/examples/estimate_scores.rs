//! Estimates consistency scores by holdout retraining and exports them as
//! an `index,score` CSV. Mislabels 10% of the samples first to show that
//! noisy samples land at the bottom of the score distribution.
//!
//! ```bash
//! cargo run --release --example estimate_scores -- /tmp/scores.csv
//! ```

use std::path::PathBuf;

use clmem::cscore::{estimate_cscores, export_scores, EstimateParams};
use clmem::data::{synth_blobs, Dataset};
use clmem::nn::TrainConfig;

fn main() -> clmem::Result<()> {
    let out: PathBuf = std::env::args()
        .nth(1)
        .map(Into::into)
        .unwrap_or_else(|| "scores.csv".into());

    let clean = synth_blobs(4, 60, 8, 0.8, 3)?;
    let mut samples = clean.samples().to_vec();
    let mut flipped = Vec::new();
    for (i, s) in samples.iter_mut().enumerate() {
        if i % 10 == 0 {
            s.label = (s.label + 1) % 4;
            flipped.push(i);
        }
    }
    let dataset = Dataset::new(samples, 4)?;

    let params = EstimateParams {
        k_models: 8,
        subset_ratio: 0.5,
        hidden_layers: vec![16],
    };
    let train_cfg = TrainConfig {
        learning_rate: 0.05,
        momentum: 0.9,
        batch_size: 16,
        epochs: 12,
        seed: 0,
    };
    let outcome = estimate_cscores(&dataset, &params, &train_cfg)?;
    if !outcome.fallback_indices.is_empty() {
        eprintln!(
            "warning: {} samples were never held out and use the in-training fallback",
            outcome.fallback_indices.len()
        );
    }

    let mean = |idx: &[usize]| idx.iter().map(|&i| outcome.scores[i]).sum::<f64>() / idx.len() as f64;
    let clean_idx: Vec<usize> = (0..dataset.len()).filter(|i| !flipped.contains(i)).collect();
    println!("mean score of clean samples:      {:.3}", mean(&clean_idx));
    println!("mean score of mislabeled samples: {:.3}", mean(&flipped));

    export_scores(&outcome.scores, &out)?;
    println!("wrote {} scores to {}", outcome.scores.len(), out.display());
    Ok(())
}
