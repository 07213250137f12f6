//! Experiment and grid execution.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;

use crate::cscore::{estimate_cscores, load_scores, ScoredDataset};
use crate::data::{make_scenario, Dataset, Scenario};
use crate::error::{Error, Result};
use crate::harness::config::{method_label, strategy_label, ExperimentConfig, ScoreSource};
use crate::memory::{MemoryBuffer, MemoryItem};
use crate::methods::{train_task_agem, train_task_er, train_task_gdumb, Method};
use crate::metrics::AccuracyMatrix;
use crate::rng;

/// Everything shareable across the runs of one cell: loaded datasets and
/// (when needed) resolved scores.
#[derive(Debug, Clone)]
pub struct ExperimentContext {
    pub train: Dataset,
    pub test: Dataset,
    pub scored: Option<ScoredDataset>,
    /// Indices that fell back to in-training scoring during estimation;
    /// non-empty means the score file deserves a second look.
    pub score_fallback_indices: Vec<usize>,
}

/// Loads datasets and resolves the score source. Score estimation is the
/// expensive path, so it only happens when the strategy reads scores;
/// file-backed scores are always joined.
pub fn build_context(cfg: &ExperimentConfig) -> Result<ExperimentContext> {
    cfg.validate()?;
    let (train, test) = cfg.dataset.load()?;
    let mut fallback = Vec::new();
    let scored = match &cfg.scores {
        ScoreSource::File { path } => Some(load_scores(path, train.clone())?),
        ScoreSource::Estimate { .. } => {
            if cfg.strategy.needs_scores() {
                let (params, train_cfg) = cfg.scores.estimate_params().unwrap();
                let outcome = estimate_cscores(&train, &params, &train_cfg)?;
                fallback = outcome.fallback_indices;
                Some(ScoredDataset::new(train.clone(), outcome.scores)?)
            } else {
                None
            }
        }
    };
    Ok(ExperimentContext {
        train,
        test,
        scored,
        score_fallback_indices: fallback,
    })
}

/// One completed run. `wall_time_s` is the only field excluded from the
/// determinism contract.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct RunResult {
    pub fingerprint: String,
    pub cell: String,
    pub seed: u64,
    pub strategy: String,
    pub method: String,
    pub capacity: usize,
    pub epochs: usize,
    pub accuracy: AccuracyMatrix,
    pub avg_accuracy: f64,
    pub forgetting: Vec<f64>,
    pub mean_forgetting: Option<f64>,
    pub buffer_snapshots: Vec<PathBuf>,
    pub wall_time_s: f64,
}

/// Runs one (config, seed) pair, loading data and scores itself.
pub fn run_experiment(cfg: &ExperimentConfig, seed: u64) -> Result<RunResult> {
    let ctx = build_context(cfg)?;
    run_experiment_in_context(cfg, &ctx, seed, None)
}

/// Runs one (config, seed) pair against preloaded data. `snapshot_dir`,
/// when given, receives one buffer snapshot CSV per task boundary.
pub fn run_experiment_in_context(
    cfg: &ExperimentConfig,
    ctx: &ExperimentContext,
    seed: u64,
    snapshot_dir: Option<&Path>,
) -> Result<RunResult> {
    let started = Instant::now();
    let method_cfg = {
        let mut m = cfg.method_config();
        m.train.seed = seed;
        m
    };

    // Purpose-keyed streams: consuming more of one never shifts another.
    let scenario_seed = rng::stream(seed, &format!("scenario/{}", cfg.scenario.seed)).gen::<u64>();
    let scenario = make_scenario(&ctx.train, &ctx.test, cfg.scenario.num_tasks, scenario_seed)?;
    let mut shuffle_rng = rng::stream(seed, "shuffle");
    let mut memory_rng = rng::stream(seed, "memory");
    let mut retrieval_rng = rng::stream(seed, "retrieval");

    let mut arch = vec![ctx.train.feature_dim()];
    arch.extend_from_slice(&cfg.hidden_layers);
    arch.push(ctx.train.num_classes());
    let init_seed = rng::stream(seed, "init").gen::<u64>();
    let mut model = crate::nn::MlpModel::init(&arch, init_seed)?;

    let mut buffer = MemoryBuffer::new(cfg.capacity, cfg.strategy)?;
    let mut matrix = AccuracyMatrix::new(scenario.num_tasks());
    let mut snapshots = Vec::new();

    for task in scenario.tasks() {
        let task_items = scored_task_items(ctx, task.task_id, &scenario);
        match method_cfg.method {
            Method::Gdumb => {
                // GDumb consumes the buffer as its whole training set, so
                // the current task enters the buffer first.
                buffer.populate_task(&task_items, &mut memory_rng)?;
                let gdumb_seed =
                    rng::stream(seed, &format!("gdumb-init/{}", task.task_id)).gen::<u64>();
                model = train_task_gdumb(
                    &arch,
                    gdumb_seed,
                    &ctx.train,
                    &buffer,
                    &method_cfg,
                    &mut shuffle_rng,
                )?;
            }
            Method::Er => {
                train_task_er(
                    &mut model,
                    &ctx.train,
                    &task.train_indices,
                    &buffer,
                    &method_cfg,
                    &mut shuffle_rng,
                    &mut retrieval_rng,
                )?;
                buffer.populate_task(&task_items, &mut memory_rng)?;
            }
            Method::Agem => {
                train_task_agem(
                    &mut model,
                    &ctx.train,
                    &task.train_indices,
                    &buffer,
                    &method_cfg,
                    &mut shuffle_rng,
                    &mut retrieval_rng,
                )?;
                buffer.populate_task(&task_items, &mut memory_rng)?;
            }
        }

        if let Some(dir) = snapshot_dir {
            std::fs::create_dir_all(dir)?;
            let path = dir.join(format!("seed{seed}-task{}.csv", task.task_id));
            buffer.write_snapshot(&path)?;
            snapshots.push(path);
        }

        let mut row = Vec::with_capacity(task.task_id + 1);
        for earlier in &scenario.tasks()[..=task.task_id] {
            let (features, labels) = ctx.test.view(&earlier.test_indices);
            row.push(model.evaluate(&features, &labels)?);
        }
        matrix.record_eval(task.task_id, row)?;
    }

    let forgetting = matrix.forgetting()?;
    Ok(RunResult {
        fingerprint: cfg.fingerprint(),
        cell: cfg.cell_id(),
        seed,
        strategy: strategy_label(&cfg.strategy),
        method: method_label(cfg.method.kind).to_string(),
        capacity: cfg.capacity,
        epochs: cfg.train.epochs,
        avg_accuracy: matrix.average_accuracy()?,
        forgetting: forgetting.per_task,
        mean_forgetting: forgetting.mean,
        accuracy: matrix,
        buffer_snapshots: snapshots,
        wall_time_s: started.elapsed().as_secs_f64(),
    })
}

/// The task's training samples grouped by class, carrying scores when the
/// run has them (0.0 otherwise; random strategies never read the value).
fn scored_task_items(
    ctx: &ExperimentContext,
    task_id: usize,
    scenario: &Scenario,
) -> BTreeMap<usize, Vec<MemoryItem>> {
    let task = &scenario.tasks()[task_id];
    let mut items: BTreeMap<usize, Vec<MemoryItem>> = BTreeMap::new();
    for &index in &task.train_indices {
        let sample = ctx.train.sample(index);
        let score = ctx.scored.as_ref().map_or(0.0, |s| s.score(index));
        items
            .entry(sample.label)
            .or_default()
            .push(MemoryItem { index, score });
    }
    items
}

/// Per-cell aggregate over seeds: mean and sample standard deviation.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct AggregateRow {
    pub cell: String,
    pub strategy: String,
    pub method: String,
    pub capacity: usize,
    pub epochs: usize,
    pub num_seeds: usize,
    pub mean_acc: f64,
    pub sd_acc: f64,
    pub mean_forgetting: f64,
    pub sd_forgetting: f64,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct RunFailure {
    pub cell: String,
    pub seed: u64,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridOutcome {
    pub results: Vec<RunResult>,
    pub aggregates: Vec<AggregateRow>,
    pub failures: Vec<RunFailure>,
}

fn mean_and_sd(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Runs every (cell, seed) pair of the config's grid. Cells and seeds run
/// in parallel isolated workers; results are merged in deterministic
/// (cell, seed) order. Failures are recorded, not fatal.
pub fn run_grid(cfg: &ExperimentConfig, snapshot_root: Option<&Path>) -> Result<GridOutcome> {
    cfg.validate()?;
    let cells = cfg.grid_cells();

    // One context per cell (scores depend on the strategy), built serially
    // to avoid re-estimating scores k times in parallel workers: contexts
    // that share a score source reuse the first estimation.
    let mut contexts: Vec<ExperimentContext> = Vec::with_capacity(cells.len());
    let mut scored_cache: Option<ScoredDataset> = None;
    for cell in &cells {
        let mut ctx = build_context(&with_scores_skipped(cell, scored_cache.is_some()))?;
        if ctx.scored.is_none() {
            if let Some(cached) = &scored_cache {
                if cell.strategy.needs_scores() {
                    ctx.scored = Some(cached.clone());
                }
            }
        } else if scored_cache.is_none() {
            scored_cache = ctx.scored.clone();
        }
        contexts.push(ctx);
    }

    let jobs: Vec<(usize, u64)> = cells
        .iter()
        .enumerate()
        .flat_map(|(i, cell)| cell.seeds.iter().map(move |&s| (i, s)))
        .collect();

    let mut outcomes: Vec<((usize, u64), std::result::Result<RunResult, String>)> = jobs
        .par_iter()
        .map(|&(cell_idx, seed)| {
            let cell = &cells[cell_idx];
            let snap_dir = snapshot_root.map(|root| root.join(cell.cell_id()));
            let run = run_experiment_in_context(cell, &contexts[cell_idx], seed, snap_dir.as_deref())
                .map_err(|e| e.to_string());
            ((cell_idx, seed), run)
        })
        .collect();
    outcomes.sort_by_key(|&((cell_idx, seed), _)| (cell_idx, seed));

    let mut results = Vec::new();
    let mut failures = Vec::new();
    for ((cell_idx, seed), outcome) in outcomes {
        match outcome {
            Ok(r) => results.push(r),
            Err(error) => failures.push(RunFailure {
                cell: cells[cell_idx].cell_id(),
                seed,
                error,
            }),
        }
    }

    let mut aggregates = Vec::new();
    for cell in &cells {
        let id = cell.cell_id();
        let cell_results: Vec<&RunResult> = results.iter().filter(|r| r.cell == id).collect();
        if cell_results.is_empty() {
            continue;
        }
        let accs: Vec<f64> = cell_results.iter().map(|r| r.avg_accuracy).collect();
        let forgets: Vec<f64> = cell_results
            .iter()
            .map(|r| r.mean_forgetting.unwrap_or(0.0))
            .collect();
        let (mean_acc, sd_acc) = mean_and_sd(&accs);
        let (mean_forgetting, sd_forgetting) = mean_and_sd(&forgets);
        aggregates.push(AggregateRow {
            cell: id,
            strategy: strategy_label(&cell.strategy),
            method: method_label(cell.method.kind).to_string(),
            capacity: cell.capacity,
            epochs: cell.train.epochs,
            num_seeds: cell_results.len(),
            mean_acc,
            sd_acc,
            mean_forgetting,
            sd_forgetting,
        });
    }

    Ok(GridOutcome {
        results,
        aggregates,
        failures,
    })
}

/// A copy of the cell whose estimate source is bypassed when a cached
/// estimation is available (cheap trick: random strategies skip estimation
/// on their own, so only score-needing cells hit the cache).
fn with_scores_skipped(cell: &ExperimentConfig, have_cache: bool) -> ExperimentConfig {
    if !have_cache || !cell.strategy.needs_scores() {
        return cell.clone();
    }
    let mut c = cell.clone();
    // Pretend the strategy does not need scores so build_context skips the
    // estimation; the caller injects the cached scores afterwards.
    c.strategy = crate::memory::Strategy::Random;
    c
}

/// Writes `results.jsonl`, `aggregate.csv`, and `curves.csv` under `dir`.
pub fn emit_results(outcome: &GridOutcome, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;

    let mut jsonl = std::io::BufWriter::new(std::fs::File::create(dir.join("results.jsonl"))?);
    for result in &outcome.results {
        let line = serde_json::to_string(result)
            .map_err(|e| Error::Data(format!("serialize run result: {e}")))?;
        writeln!(jsonl, "{line}")?;
    }
    jsonl.flush()?;

    let mut agg = std::io::BufWriter::new(std::fs::File::create(dir.join("aggregate.csv"))?);
    writeln!(
        agg,
        "cell,strategy,method,capacity,epochs,mean_acc,sd_acc,mean_forgetting,sd_forgetting"
    )?;
    for row in &outcome.aggregates {
        writeln!(
            agg,
            "{},{},{},{},{},{},{},{},{}",
            row.cell,
            row.strategy,
            row.method,
            row.capacity,
            row.epochs,
            row.mean_acc,
            row.sd_acc,
            row.mean_forgetting,
            row.sd_forgetting
        )?;
    }
    agg.flush()?;

    // Long format for accuracy-vs-epochs curves.
    let mut curves = std::io::BufWriter::new(std::fs::File::create(dir.join("curves.csv"))?);
    writeln!(curves, "cell,strategy,method,capacity,epochs,seed,avg_accuracy")?;
    for r in &outcome.results {
        writeln!(
            curves,
            "{},{},{},{},{},{},{}",
            r.cell, r.strategy, r.method, r.capacity, r.epochs, r.seed, r.avg_accuracy
        )?;
    }
    curves.flush()?;

    if !outcome.failures.is_empty() {
        let mut fail = std::io::BufWriter::new(std::fs::File::create(dir.join("failures.jsonl"))?);
        for f in &outcome.failures {
            let line = serde_json::to_string(f)
                .map_err(|e| Error::Data(format!("serialize failure: {e}")))?;
            writeln!(fail, "{line}")?;
        }
        fail.flush()?;
    }
    Ok(())
}
