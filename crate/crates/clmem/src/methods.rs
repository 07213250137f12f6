//! Memory-based continual-learning methods.
//!
//! Three training loops share the episodic buffer in different ways:
//!
//! - [`train_task_er`] — Experience Replay: each current-task mini-batch is
//!   concatenated with a batch drawn from memory.
//! - [`train_task_gdumb`] — GDumb: a fresh model trains on memory contents
//!   only; current-task raw data never enters its gradient steps.
//! - [`train_task_agem`] — A-GEM: the current-task gradient is projected to
//!   not conflict with a reference gradient computed on a memory batch.
//!
//! [`mir_retrieve`] implements Maximally Interfered Retrieval: instead of a
//! uniform memory batch, pick the candidates whose loss would grow most
//! under a virtual (momentum-free) update on the current batch.

use rand::Rng;

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::memory::{MemoryBuffer, MemoryItem};
use crate::nn::{shuffled_batches, FlatGradient, MlpModel, TrainConfig};

/// Which continual-learning method drives training.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Er,
    Gdumb,
    Agem,
}

/// How ER picks its memory batch.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Retrieval {
    Uniform,
    Mir {
        candidate_pool_size: usize,
        select_k: usize,
    },
}

/// Method + retrieval + optimizer settings for one run.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct MethodConfig {
    pub method: Method,
    pub retrieval: Retrieval,
    pub train: TrainConfig,
    pub memory_batch_size: usize,
}

impl MethodConfig {
    pub fn validate(&self) -> Result<()> {
        self.train.validate()?;
        if self.memory_batch_size == 0 {
            return Err(Error::Config("memory_batch_size must be >= 1".into()));
        }
        if let Retrieval::Mir {
            candidate_pool_size,
            select_k,
        } = self.retrieval
        {
            if self.method != Method::Er {
                return Err(Error::Config(
                    "MIR retrieval only applies to experience replay".into(),
                ));
            }
            if select_k == 0 || candidate_pool_size < select_k {
                return Err(Error::Config(format!(
                    "MIR needs candidate_pool_size >= select_k >= 1, got {candidate_pool_size} and {select_k}"
                )));
            }
        }
        Ok(())
    }
}

/// Resolves buffer items to feature/label views over the training set.
fn resolve<'a>(dataset: &'a Dataset, items: &[MemoryItem]) -> (Vec<&'a [f64]>, Vec<usize>) {
    let features = items
        .iter()
        .map(|it| dataset.sample(it.index).features.as_slice())
        .collect();
    let labels = items.iter().map(|it| dataset.sample(it.index).label).collect();
    (features, labels)
}

/// Experience Replay over one task. With an empty buffer this is exactly
/// plain SGD on the task (same shuffle stream, no retrieval draws).
pub fn train_task_er<R: Rng>(
    model: &mut MlpModel,
    dataset: &Dataset,
    task_indices: &[usize],
    buffer: &MemoryBuffer,
    cfg: &MethodConfig,
    shuffle_rng: &mut R,
    retrieval_rng: &mut R,
) -> Result<()> {
    cfg.validate()?;
    let (task_features, task_labels) = dataset.view(task_indices);
    for _ in 0..cfg.train.epochs {
        for batch in shuffled_batches(task_indices.len(), cfg.train.batch_size, shuffle_rng) {
            let mut features: Vec<&[f64]> = batch.iter().map(|&i| task_features[i]).collect();
            let mut labels: Vec<usize> = batch.iter().map(|&i| task_labels[i]).collect();
            if !buffer.is_empty() {
                let memory_items = match cfg.retrieval {
                    Retrieval::Uniform => {
                        buffer.sample_batch(cfg.memory_batch_size, retrieval_rng)?.items
                    }
                    Retrieval::Mir { .. } => {
                        mir_retrieve(model, buffer, dataset, &features, &labels, cfg, retrieval_rng)?
                            .items
                    }
                };
                let (mem_features, mem_labels) = resolve(dataset, &memory_items);
                features.extend(mem_features);
                labels.extend(mem_labels);
            }
            let (_, grad) = model.loss_and_grad(&features, &labels)?;
            model.sgd_step(&grad, &cfg.train)?;
        }
    }
    Ok(())
}

/// GDumb: re-initializes a model and trains it on buffer contents only.
/// The signature admits no task data, so current-task samples can only
/// reach the loop through the buffer.
pub fn train_task_gdumb<R: Rng>(
    layer_sizes: &[usize],
    init_seed: u64,
    dataset: &Dataset,
    buffer: &MemoryBuffer,
    cfg: &MethodConfig,
    shuffle_rng: &mut R,
) -> Result<MlpModel> {
    cfg.validate()?;
    if buffer.is_empty() {
        return Err(Error::Usage("gdumb cannot train from an empty buffer".into()));
    }
    let items: Vec<MemoryItem> = buffer
        .classes()
        .into_iter()
        .flat_map(|c| buffer.class_items(c).to_vec())
        .collect();
    let (features, labels) = resolve(dataset, &items);
    let mut model = MlpModel::init(layer_sizes, init_seed)?;
    for _ in 0..cfg.train.epochs {
        for batch in shuffled_batches(items.len(), cfg.train.batch_size, shuffle_rng) {
            let bf: Vec<&[f64]> = batch.iter().map(|&i| features[i]).collect();
            let bl: Vec<usize> = batch.iter().map(|&i| labels[i]).collect();
            let (_, grad) = model.loss_and_grad(&bf, &bl)?;
            model.sgd_step(&grad, &cfg.train)?;
        }
    }
    Ok(model)
}

/// What [`project_gradient`] did to the gradient.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Projection {
    /// No conflict: the gradient passed through untouched.
    Kept,
    /// Conflicting directions: the component along the reference was removed.
    Projected,
    /// Reference gradient too small to project against; gradient kept.
    SkippedZeroRef,
}

/// A-GEM projection: if `g · g_ref < 0`, return
/// `g - (g · g_ref / g_ref · g_ref) * g_ref`, otherwise `g` unchanged.
pub fn project_gradient(
    grad: FlatGradient,
    reference: &FlatGradient,
) -> Result<(FlatGradient, Projection)> {
    let dot = grad.dot(reference)?;
    if dot >= 0.0 {
        return Ok((grad, Projection::Kept));
    }
    let ref_norm_sq = reference.dot(reference)?;
    if ref_norm_sq < 1e-12 {
        return Ok((grad, Projection::SkippedZeroRef));
    }
    let scale = dot / ref_norm_sq;
    let mut projected = grad;
    for (g, r) in projected.values_mut().iter_mut().zip(reference.values()) {
        *g -= scale * r;
    }
    Ok((projected, Projection::Projected))
}

/// Per-task diagnostics from an A-GEM pass.
#[derive(Debug, Clone, PartialEq)]
pub struct AgemStats {
    pub steps: usize,
    pub projected_steps: usize,
    pub skipped_zero_ref: usize,
    /// Minimum of `applied · g_ref` over steps that had a reference batch.
    pub min_post_dot: f64,
    /// Whether every non-projected step applied `g` bitwise unchanged.
    pub kept_bitwise: bool,
}

impl Default for AgemStats {
    fn default() -> Self {
        AgemStats {
            steps: 0,
            projected_steps: 0,
            skipped_zero_ref: 0,
            min_post_dot: f64::INFINITY,
            kept_bitwise: true,
        }
    }
}

/// A-GEM over one task: per step, project the current-task gradient against
/// a reference gradient from a uniform memory batch, then step.
pub fn train_task_agem<R: Rng>(
    model: &mut MlpModel,
    dataset: &Dataset,
    task_indices: &[usize],
    buffer: &MemoryBuffer,
    cfg: &MethodConfig,
    shuffle_rng: &mut R,
    retrieval_rng: &mut R,
) -> Result<AgemStats> {
    cfg.validate()?;
    let (task_features, task_labels) = dataset.view(task_indices);
    let mut stats = AgemStats::default();
    for _ in 0..cfg.train.epochs {
        for batch in shuffled_batches(task_indices.len(), cfg.train.batch_size, shuffle_rng) {
            let bf: Vec<&[f64]> = batch.iter().map(|&i| task_features[i]).collect();
            let bl: Vec<usize> = batch.iter().map(|&i| task_labels[i]).collect();
            let (_, grad) = model.loss_and_grad(&bf, &bl)?;
            stats.steps += 1;
            let applied = if buffer.is_empty() {
                grad
            } else {
                let memory_items = buffer
                    .sample_batch(cfg.memory_batch_size, retrieval_rng)?
                    .items;
                let (mem_features, mem_labels) = resolve(dataset, &memory_items);
                let (_, reference) = model.loss_and_grad(&mem_features, &mem_labels)?;
                let before = grad.clone();
                let (applied, outcome) = project_gradient(grad, &reference)?;
                match outcome {
                    Projection::Projected => stats.projected_steps += 1,
                    Projection::SkippedZeroRef => stats.skipped_zero_ref += 1,
                    Projection::Kept => stats.kept_bitwise &= applied == before,
                }
                let post_dot = applied.dot(&reference)?;
                debug_assert!(post_dot >= -1e-10, "projection left dot {post_dot}");
                stats.min_post_dot = stats.min_post_dot.min(post_dot);
                applied
            };
            model.sgd_step(&applied, &cfg.train)?;
        }
    }
    Ok(stats)
}

/// Result of a MIR retrieval. `clamped` flags pool or k limits that had to
/// shrink to the buffer size.
#[derive(Debug, Clone, PartialEq)]
pub struct MirSelection {
    pub items: Vec<MemoryItem>,
    pub clamped: bool,
}

/// Maximally Interfered Retrieval: rank a uniform candidate pool by the
/// loss increase a virtual momentum-free step on the current batch would
/// inflict, and return the top `select_k`. The live model and its optimizer
/// state are never touched.
pub fn mir_retrieve<R: Rng>(
    model: &MlpModel,
    buffer: &MemoryBuffer,
    dataset: &Dataset,
    current_features: &[&[f64]],
    current_labels: &[usize],
    cfg: &MethodConfig,
    rng: &mut R,
) -> Result<MirSelection> {
    let Retrieval::Mir {
        candidate_pool_size,
        select_k,
    } = cfg.retrieval
    else {
        return Err(Error::Usage("mir_retrieve called without MIR retrieval config".into()));
    };
    if buffer.is_empty() {
        return Err(Error::Usage("mir_retrieve on an empty buffer".into()));
    }
    let pool_size = candidate_pool_size.min(buffer.len());
    let k = select_k.min(pool_size);
    let clamped = pool_size != candidate_pool_size || k != select_k;

    let candidates = buffer.sample_batch(pool_size, rng)?.items;
    let (cand_features, cand_labels) = resolve(dataset, &candidates);
    let losses_before = model.per_sample_losses(&cand_features, &cand_labels)?;

    // Virtual plain-SGD step on scratch parameters; momentum state excluded.
    let (_, grad) = model.loss_and_grad(current_features, current_labels)?;
    let mut params = model.params_flat();
    for (p, g) in params.iter_mut().zip(grad.values()) {
        *p -= cfg.train.learning_rate * g;
    }
    let mut scratch = model.clone();
    scratch.set_params_flat(&params)?;
    let losses_after = scratch.per_sample_losses(&cand_features, &cand_labels)?;

    // Sort by loss differential descending, ties by lower sample index.
    let mut order: Vec<usize> = (0..candidates.len()).collect();
    order.sort_by(|&a, &b| {
        let da = losses_after[a] - losses_before[a];
        let db = losses_after[b] - losses_before[b];
        db.total_cmp(&da)
            .then(candidates[a].index.cmp(&candidates[b].index))
    });
    let items = order[..k].iter().map(|&i| candidates[i]).collect();
    Ok(MirSelection { items, clamped })
}
