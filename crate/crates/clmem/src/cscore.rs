//! Per-sample learning-consistency scores in `[0, 1]`.
//!
//! A score says how reliably models learn a sample: high means learned fast
//! and across initializations, low means hard or mislabeled. Scores come
//! from a precomputed `index,score` CSV or from [`estimate_cscores`], which
//! trains `k` models on class-stratified subsets and scores each sample by
//! holdout correctness — the learning-speed proxy that tracks the exact
//! multi-initialization metric while staying desk-scale. All strategies use
//! scores ordinally, so any rank-preserving proxy plugs in.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::nn::{argmax_lowest, shuffled_batches, MlpModel, TrainConfig};
use crate::rng;

/// A dataset plus one immutable score per sample, aligned by index.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoredDataset {
    dataset: Dataset,
    scores: Vec<f64>,
}

impl ScoredDataset {
    pub fn new(dataset: Dataset, scores: Vec<f64>) -> Result<Self> {
        if scores.len() != dataset.len() {
            return Err(Error::Data(format!(
                "{} scores for {} samples",
                scores.len(),
                dataset.len()
            )));
        }
        if let Some(i) = scores.iter().position(|s| !(0.0..=1.0).contains(s)) {
            return Err(Error::Data(format!(
                "score {} of sample {} outside [0, 1]",
                scores[i], i
            )));
        }
        Ok(ScoredDataset { dataset, scores })
    }

    pub fn dataset(&self) -> &Dataset {
        &self.dataset
    }

    pub fn scores(&self) -> &[f64] {
        &self.scores
    }

    pub fn score(&self, index: usize) -> f64 {
        self.scores[index]
    }

    /// `(index, score)` pairs grouped by class, ascending index order.
    pub fn items_by_class(&self) -> BTreeMap<usize, Vec<(usize, f64)>> {
        let mut map: BTreeMap<usize, Vec<(usize, f64)>> = BTreeMap::new();
        for s in self.dataset.samples() {
            map.entry(s.label)
                .or_default()
                .push((s.index, self.scores[s.index]));
        }
        map
    }
}

/// Joins an `index,score` CSV onto a dataset. Every dataset index must be
/// present exactly once; a header row is detected and skipped.
pub fn load_scores(path: &Path, dataset: Dataset) -> Result<ScoredDataset> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_path(path)
        .map_err(|e| Error::format(path, format!("cannot open: {e}")))?;

    let mut scores: Vec<Option<f64>> = vec![None; dataset.len()];
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::format(path, format!("row {}: {e}", i + 1)))?;
        if i == 0 && record.get(0).map(|c| c.trim().parse::<usize>().is_err()) == Some(true) {
            continue; // header row
        }
        if record.len() != 2 {
            return Err(Error::format(
                path,
                format!("row {}: expected index,score", i + 1),
            ));
        }
        let index: usize = record[0].trim().parse().map_err(|_| {
            Error::format(path, format!("row {}: bad index {:?}", i + 1, &record[0]))
        })?;
        let score: f64 = record[1].trim().parse().map_err(|_| {
            Error::format(path, format!("index {index}: bad score {:?}", &record[1]))
        })?;
        if index >= dataset.len() {
            return Err(Error::format(
                path,
                format!("index {index} outside dataset of {} samples", dataset.len()),
            ));
        }
        if !(0.0..=1.0).contains(&score) {
            return Err(Error::format(
                path,
                format!("index {index}: score {score} outside [0, 1]"),
            ));
        }
        if scores[index].is_some() {
            return Err(Error::format(path, format!("index {index} appears twice")));
        }
        scores[index] = Some(score);
    }
    if let Some(missing) = scores.iter().position(|s| s.is_none()) {
        return Err(Error::format(path, format!("index {missing} missing")));
    }
    ScoredDataset::new(dataset, scores.into_iter().map(Option::unwrap).collect())
}

/// Writes scores as `index,score` with a header and six decimal places.
pub fn export_scores(scores: &[f64], path: &Path) -> Result<()> {
    let mut file = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(file, "index,score")?;
    for (i, s) in scores.iter().enumerate() {
        writeln!(file, "{i},{s:.6}")?;
    }
    file.flush()?;
    Ok(())
}

/// Knobs for [`estimate_cscores`].
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct EstimateParams {
    pub k_models: usize,
    /// Fraction of each class used to train each holdout model.
    pub subset_ratio: f64,
    /// Hidden layer widths of the estimator models.
    pub hidden_layers: Vec<usize>,
}

impl Default for EstimateParams {
    fn default() -> Self {
        EstimateParams {
            k_models: 8,
            subset_ratio: 0.5,
            hidden_layers: vec![512, 256],
        }
    }
}

/// Result of score estimation. `fallback_indices` lists samples that were
/// never held out (scored from in-training correctness over the final
/// epochs instead); callers must surface this, never swallow it.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimateOutcome {
    pub scores: Vec<f64>,
    pub fallback_indices: Vec<usize>,
}

/// Estimates consistency scores by holdout retraining.
///
/// For each of `k_models` rounds, a fresh model trains on a class-stratified
/// random subset; a sample's score is the fraction of the models that held
/// it out *and* classify it correctly, among the models that held it out.
/// Scores are rounded to six decimals so exported files reload identically.
/// Deterministic given `(dataset, params, cfg.seed)`.
pub fn estimate_cscores(
    dataset: &Dataset,
    params: &EstimateParams,
    cfg: &TrainConfig,
) -> Result<EstimateOutcome> {
    cfg.validate()?;
    if params.k_models < 2 {
        return Err(Error::Config(format!(
            "k_models must be at least 2, got {}",
            params.k_models
        )));
    }
    if !(params.subset_ratio > 0.0 && params.subset_ratio < 1.0) {
        return Err(Error::Config(format!(
            "subset_ratio must be in (0, 1), got {}",
            params.subset_ratio
        )));
    }
    let by_class = dataset.indices_by_class();
    for (&class, members) in &by_class {
        let take = (members.len() as f64 * params.subset_ratio).floor() as usize;
        if take < 2 {
            return Err(Error::Config(format!(
                "class {class} has {} samples; subset_ratio {} leaves {take} (< 2) per subset",
                members.len(),
                params.subset_ratio
            )));
        }
    }

    let mut arch = vec![dataset.feature_dim()];
    arch.extend_from_slice(&params.hidden_layers);
    arch.push(dataset.num_classes());

    let n = dataset.len();
    let mut held_out = vec![0u32; n];
    let mut held_out_correct = vec![0u32; n];
    let mut in_train_evals = vec![0u32; n];
    let mut in_train_correct = vec![0u32; n];
    // In-training correctness is recorded over the final half of training.
    let final_epochs_from = cfg.epochs - cfg.epochs.div_ceil(2);

    for m in 0..params.k_models {
        let mut subset: Vec<usize> = Vec::new();
        let mut subset_rng = rng::stream(cfg.seed, &format!("cscore/subset/{m}"));
        for members in by_class.values() {
            let take = (members.len() as f64 * params.subset_ratio).floor() as usize;
            let mut pool = members.clone();
            pool.shuffle(&mut subset_rng);
            subset.extend(pool.into_iter().take(take));
        }
        subset.sort_unstable();

        let init_seed = rng::stream(cfg.seed, &format!("cscore/init/{m}")).gen::<u64>();
        let mut model = MlpModel::init(&arch, init_seed)?;
        let (features, labels) = dataset.view(&subset);
        let mut shuffle_rng = rng::stream(cfg.seed, &format!("cscore/shuffle/{m}"));
        for epoch in 0..cfg.epochs {
            for batch in shuffled_batches(subset.len(), cfg.batch_size, &mut shuffle_rng) {
                let bf: Vec<&[f64]> = batch.iter().map(|&i| features[i]).collect();
                let bl: Vec<usize> = batch.iter().map(|&i| labels[i]).collect();
                let (_, grad) = model.loss_and_grad(&bf, &bl)?;
                model.sgd_step(&grad, cfg)?;
            }
            if epoch >= final_epochs_from {
                for (&idx, (f, &l)) in subset.iter().zip(features.iter().zip(&labels)) {
                    in_train_evals[idx] += 1;
                    if predict(&model, f)? == l {
                        in_train_correct[idx] += 1;
                    }
                }
            }
        }

        let mut in_subset = vec![false; n];
        for &i in &subset {
            in_subset[i] = true;
        }
        for s in dataset.samples() {
            if !in_subset[s.index] {
                held_out[s.index] += 1;
                if predict(&model, &s.features)? == s.label {
                    held_out_correct[s.index] += 1;
                }
            }
        }
    }

    let mut scores = Vec::with_capacity(n);
    let mut fallback_indices = Vec::new();
    for i in 0..n {
        let raw = if held_out[i] > 0 {
            held_out_correct[i] as f64 / held_out[i] as f64
        } else {
            fallback_indices.push(i);
            in_train_correct[i] as f64 / in_train_evals[i] as f64
        };
        scores.push((raw * 1e6).round() / 1e6);
    }
    Ok(EstimateOutcome {
        scores,
        fallback_indices,
    })
}

fn predict(model: &MlpModel, features: &[f64]) -> Result<usize> {
    let logits = model.forward(&[features])?;
    Ok(argmax_lowest(&logits[0]))
}

/// `delta`-quantile (linear interpolation) of class `c`'s score multiset.
/// `delta = 0` returns the class minimum, so a cutoff at the returned value
/// excludes nothing.
pub fn quantile_threshold(scored: &ScoredDataset, class: usize, delta: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&delta) {
        return Err(Error::Config(format!("delta {delta} outside [0, 1]")));
    }
    let mut class_scores: Vec<f64> = scored
        .dataset()
        .samples()
        .iter()
        .filter(|s| s.label == class)
        .map(|s| scored.score(s.index))
        .collect();
    if class_scores.is_empty() {
        return Err(Error::Usage(format!("class {class} has no samples")));
    }
    class_scores.sort_by(f64::total_cmp);
    Ok(quantile_of_sorted(&class_scores, delta))
}

/// Linear-interpolation quantile of an ascending slice.
pub fn quantile_of_sorted(sorted: &[f64], delta: f64) -> f64 {
    debug_assert!(!sorted.is_empty());
    if sorted.len() == 1 {
        return sorted[0];
    }
    let pos = delta * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    let frac = pos - lo as f64;
    sorted[lo] + (sorted[hi] - sorted[lo]) * frac
}
