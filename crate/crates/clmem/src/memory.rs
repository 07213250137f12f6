//! Class-balanced episodic memory.
//!
//! The buffer keeps `(sample index, score)` pairs per class under a total
//! capacity. When a task's classes arrive, per-class quotas are recomputed
//! over all classes seen, existing classes shrink to quota, and the new
//! classes fill according to the population strategy:
//!
//! - `Random` — per-class streaming reservoir over the task's samples.
//! - `RandomTaskEnd` — uniform draw without replacement over the whole
//!   task (the batch variant of `Random`; same selection routine CAWS
//!   degenerates to at `delta = 0`).
//! - `HighC` / `LowC` — top / bottom scored samples per class.
//! - `Cobs` — equal-width score bins with equal per-bin draws.
//! - `Caws` — uniform draw restricted to scores at or above the class's
//!   `delta`-quantile.
//!
//! Samples are referenced by dataset index, never copied, so buffers join
//! exactly with score files and snapshots stay cheap.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use rand::Rng;

use crate::cscore::quantile_of_sorted;
use crate::error::{Error, Result};

/// Memory population strategy.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Strategy {
    Random,
    RandomTaskEnd,
    HighC,
    LowC,
    Cobs { num_bins: usize },
    Caws { delta: f64 },
}

impl Strategy {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Strategy::Cobs { num_bins } if num_bins == 0 => {
                Err(Error::Config("cobs needs at least one bin".into()))
            }
            Strategy::Caws { delta } if !(0.0..=1.0).contains(&delta) => {
                Err(Error::Config(format!("caws delta {delta} outside [0, 1]")))
            }
            _ => Ok(()),
        }
    }

    /// Whether population decisions read consistency scores.
    pub fn needs_scores(&self) -> bool {
        !matches!(self, Strategy::Random | Strategy::RandomTaskEnd)
    }
}

/// One stored sample reference.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MemoryItem {
    pub index: usize,
    pub score: f64,
}

/// A batch drawn from the buffer. `with_replacement` flags the degenerate
/// case where more samples were requested than the buffer holds.
#[derive(Debug, Clone, PartialEq)]
pub struct MemoryBatch {
    pub items: Vec<MemoryItem>,
    pub with_replacement: bool,
}

/// Class-keyed episodic memory with a population strategy.
#[derive(Debug, Clone)]
pub struct MemoryBuffer {
    capacity: usize,
    strategy: Strategy,
    store: BTreeMap<usize, Vec<MemoryItem>>,
    /// Per-class stream lengths observed by the reservoir.
    seen: BTreeMap<usize, u64>,
}

impl MemoryBuffer {
    pub fn new(capacity: usize, strategy: Strategy) -> Result<Self> {
        if capacity == 0 {
            return Err(Error::Config("memory capacity must be positive".into()));
        }
        strategy.validate()?;
        Ok(MemoryBuffer {
            capacity,
            strategy,
            store: BTreeMap::new(),
            seen: BTreeMap::new(),
        })
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn strategy(&self) -> Strategy {
        self.strategy
    }

    pub fn len(&self) -> usize {
        self.store.values().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn classes(&self) -> Vec<usize> {
        self.store.keys().copied().collect()
    }

    pub fn class_items(&self, class: usize) -> &[MemoryItem] {
        self.store.get(&class).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Buffer contents as `(class, item)` rows sorted by class then index.
    pub fn snapshot(&self) -> Vec<(usize, MemoryItem)> {
        let mut rows: Vec<(usize, MemoryItem)> = self
            .store
            .iter()
            .flat_map(|(&c, items)| items.iter().map(move |&it| (c, it)))
            .collect();
        rows.sort_by_key(|(c, it)| (*c, it.index));
        rows
    }

    /// Writes the snapshot as CSV `class,sample_index,score`.
    pub fn write_snapshot(&self, path: &Path) -> Result<()> {
        let mut file = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(file, "class,sample_index,score")?;
        for (class, item) in self.snapshot() {
            writeln!(file, "{class},{},{:.6}", item.index, item.score)?;
        }
        file.flush()?;
        Ok(())
    }

    /// Per-class quotas for a class set: `capacity / n` each, remainder to
    /// the lowest-numbered classes.
    pub fn compute_quotas(capacity: usize, classes: &[usize]) -> BTreeMap<usize, usize> {
        let mut sorted: Vec<usize> = classes.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        let n = sorted.len().max(1);
        let base = capacity / n;
        let extra = capacity % n;
        sorted
            .into_iter()
            .enumerate()
            .map(|(i, c)| (c, base + usize::from(i < extra)))
            .collect()
    }

    /// Recomputes quotas over the union of stored and incoming classes and
    /// shrinks over-quota classes per strategy. Returns the quota map.
    pub fn rebalance<R: Rng>(
        &mut self,
        incoming_classes: &[usize],
        rng: &mut R,
    ) -> BTreeMap<usize, usize> {
        let mut all: Vec<usize> = self.store.keys().copied().collect();
        all.extend_from_slice(incoming_classes);
        let quotas = Self::compute_quotas(self.capacity, &all);
        for (&class, items) in self.store.iter_mut() {
            let quota = quotas[&class];
            if items.len() > quota {
                *items = match self.strategy {
                    Strategy::Random | Strategy::RandomTaskEnd | Strategy::Caws { .. } => {
                        draw_without_replacement(items, quota, rng)
                    }
                    Strategy::HighC => select_top(items, quota),
                    Strategy::LowC => select_bottom(items, quota),
                    Strategy::Cobs { num_bins } => cobs_select(items, quota, num_bins, rng),
                };
            }
        }
        self.debug_check_capacity();
        quotas
    }

    /// Adds one task's training data (grouped by class) according to the
    /// buffer's strategy. Task classes must not have been seen before.
    pub fn populate_task<R: Rng>(
        &mut self,
        task_data: &BTreeMap<usize, Vec<MemoryItem>>,
        rng: &mut R,
    ) -> Result<()> {
        for class in task_data.keys() {
            if self.store.contains_key(class) {
                return Err(Error::Usage(format!(
                    "class {class} was already populated; tasks must carry unseen classes"
                )));
            }
        }
        let incoming: Vec<usize> = task_data.keys().copied().collect();
        let quotas = self.rebalance(&incoming, rng);
        for (&class, pool) in task_data {
            let quota = quotas[&class];
            let selected = match self.strategy {
                Strategy::Random => {
                    let (kept, seen) = reservoir_select(pool, quota, rng);
                    self.seen.insert(class, seen);
                    kept
                }
                Strategy::RandomTaskEnd => draw_without_replacement(pool, quota, rng),
                Strategy::HighC => select_top(pool, quota),
                Strategy::LowC => select_bottom(pool, quota),
                Strategy::Cobs { num_bins } => cobs_select(pool, quota, num_bins, rng),
                Strategy::Caws { delta } => caws_select(pool, quota, delta, rng),
            };
            self.store.insert(class, selected);
        }
        self.debug_check_capacity();
        Ok(())
    }

    /// Draws `k` samples uniformly without replacement across the whole
    /// buffer; falls back to with-replacement (flagged) when `k` exceeds
    /// the buffer size.
    pub fn sample_batch<R: Rng>(&self, k: usize, rng: &mut R) -> Result<MemoryBatch> {
        if self.is_empty() {
            return Err(Error::Usage("sample_batch on an empty buffer".into()));
        }
        if k == 0 {
            return Err(Error::Usage("sample_batch needs k >= 1".into()));
        }
        let flat: Vec<MemoryItem> = self
            .store
            .values()
            .flat_map(|items| items.iter().copied())
            .collect();
        if k <= flat.len() {
            Ok(MemoryBatch {
                items: draw_without_replacement(&flat, k, rng),
                with_replacement: false,
            })
        } else {
            let items = (0..k).map(|_| flat[rng.gen_range(0..flat.len())]).collect();
            Ok(MemoryBatch {
                items,
                with_replacement: true,
            })
        }
    }

    fn debug_check_capacity(&self) {
        debug_assert!(
            self.len() <= self.capacity,
            "buffer holds {} items over capacity {}",
            self.len(),
            self.capacity
        );
    }
}

/// Uniform sample of `min(k, n)` items without replacement. Consumes one
/// RNG draw per selected item, so two callers handing the same pool, count,
/// and RNG state produce identical output.
pub fn draw_without_replacement<R: Rng>(
    pool: &[MemoryItem],
    k: usize,
    rng: &mut R,
) -> Vec<MemoryItem> {
    let n = pool.len();
    let k = k.min(n);
    let mut idx: Vec<usize> = (0..n).collect();
    for i in 0..k {
        let j = rng.gen_range(i..n);
        idx.swap(i, j);
    }
    idx[..k].iter().map(|&i| pool[i]).collect()
}

/// Streaming reservoir (Algorithm R) of size `quota` over the pool in
/// stream order. Returns the kept items and the stream length.
pub fn reservoir_select<R: Rng>(
    pool: &[MemoryItem],
    quota: usize,
    rng: &mut R,
) -> (Vec<MemoryItem>, u64) {
    let mut kept: Vec<MemoryItem> = Vec::with_capacity(quota.min(pool.len()));
    let mut seen: u64 = 0;
    for &item in pool {
        seen += 1;
        if quota == 0 {
            continue;
        }
        if kept.len() < quota {
            kept.push(item);
        } else {
            let j = rng.gen_range(0..seen);
            if (j as usize) < quota {
                kept[j as usize] = item;
            }
        }
    }
    (kept, seen)
}

/// The `quota` highest-scored items, ties to the lower index.
pub fn select_top(pool: &[MemoryItem], quota: usize) -> Vec<MemoryItem> {
    let mut sorted = pool.to_vec();
    sorted.sort_by(|a, b| b.score.total_cmp(&a.score).then(a.index.cmp(&b.index)));
    sorted.truncate(quota);
    sorted
}

/// The `quota` lowest-scored items, ties to the lower index.
pub fn select_bottom(pool: &[MemoryItem], quota: usize) -> Vec<MemoryItem> {
    let mut sorted = pool.to_vec();
    sorted.sort_by(|a, b| a.score.total_cmp(&b.score).then(a.index.cmp(&b.index)));
    sorted.truncate(quota);
    sorted
}

/// Zero-based bin of a score under `num_bins` equal-width bins of `[0, 1]`,
/// last bin closed at 1.0.
pub fn score_bin(score: f64, num_bins: usize) -> usize {
    ((score * num_bins as f64) as usize).min(num_bins - 1)
}

/// Consistency-balanced selection: equal per-bin targets (remainder to
/// lower bins), uniform within each bin, deficits of short bins pushed to
/// the nearest bins with spare samples (lower index wins distance ties).
pub fn cobs_select<R: Rng>(
    pool: &[MemoryItem],
    quota: usize,
    num_bins: usize,
    rng: &mut R,
) -> Vec<MemoryItem> {
    assert!(num_bins > 0, "cobs needs at least one bin");
    if quota == 0 {
        return Vec::new();
    }
    let mut bins: Vec<Vec<MemoryItem>> = vec![Vec::new(); num_bins];
    for &item in pool {
        bins[score_bin(item.score, num_bins)].push(item);
    }

    let base = quota / num_bins;
    let extra = quota % num_bins;
    let mut take: Vec<usize> = (0..num_bins)
        .map(|i| (base + usize::from(i < extra)).min(bins[i].len()))
        .collect();
    let targets: Vec<usize> = (0..num_bins).map(|i| base + usize::from(i < extra)).collect();

    // Redistribute each bin's unmet target to its nearest neighbours.
    let available = |bins: &[Vec<MemoryItem>], take: &[usize], j: usize| bins[j].len() - take[j];
    for i in 0..num_bins {
        // take[i] may already exceed the bin's own target if earlier
        // deficits spilled into it.
        let mut deficit = targets[i].saturating_sub(take[i]);
        let mut dist = 1;
        while deficit > 0 && dist < num_bins {
            for j in [i.checked_sub(dist), i.checked_add(dist).filter(|&j| j < num_bins)]
                .into_iter()
                .flatten()
            {
                let grab = deficit.min(available(&bins, &take, j));
                take[j] += grab;
                deficit -= grab;
                if deficit == 0 {
                    break;
                }
            }
            dist += 1;
        }
    }

    let mut selected = Vec::with_capacity(take.iter().sum());
    for (bin, &k) in bins.iter().zip(&take) {
        if k > 0 {
            selected.extend(draw_without_replacement(bin, k, rng));
        }
    }
    selected
}

/// Consistency-aware selection: uniform draw from the items whose score is
/// at or above the class's `delta`-quantile; a short pool is topped up with
/// the highest-scored excluded items.
pub fn caws_select<R: Rng>(
    pool: &[MemoryItem],
    quota: usize,
    delta: f64,
    rng: &mut R,
) -> Vec<MemoryItem> {
    if pool.is_empty() || quota == 0 {
        return Vec::new();
    }
    let mut scores: Vec<f64> = pool.iter().map(|it| it.score).collect();
    scores.sort_by(f64::total_cmp);
    let threshold = quantile_of_sorted(&scores, delta);
    let eligible: Vec<MemoryItem> = pool
        .iter()
        .filter(|it| it.score >= threshold)
        .copied()
        .collect();
    if eligible.len() >= quota {
        draw_without_replacement(&eligible, quota, rng)
    } else {
        let mut selected = eligible.clone();
        let excluded: Vec<MemoryItem> = pool
            .iter()
            .filter(|it| it.score < threshold)
            .copied()
            .collect();
        selected.extend(select_top(&excluded, quota - eligible.len()));
        selected
    }
}
