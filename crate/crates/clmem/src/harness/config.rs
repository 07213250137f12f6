//! Experiment configuration: a versioned TOML schema covering dataset
//! source, score source, scenario, method, population strategy, memory
//! capacity, and seeds. See `configs/` in the repository root for worked
//! examples.

use std::path::{Path, PathBuf};

use crate::cscore::EstimateParams;
use crate::data::{load_csv, load_idx, synth_blobs, Dataset};
use crate::error::{Error, Result};
use crate::memory::Strategy;
use crate::methods::{Method, MethodConfig, Retrieval};
use crate::nn::TrainConfig;

pub const SCHEMA_VERSION: u32 = 1;

/// Where the train/test datasets come from. Exactly one source.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DatasetSource {
    /// IDX image/label pairs (raw or gzipped), as distributed for MNIST.
    Idx {
        train_images: PathBuf,
        train_labels: PathBuf,
        test_images: PathBuf,
        test_labels: PathBuf,
    },
    /// `label,f1,...,fd` CSV files.
    Csv {
        train: PathBuf,
        test: PathBuf,
        #[serde(default)]
        has_header: bool,
    },
    /// Synthetic Gaussian blobs.
    Synth {
        classes: usize,
        train_per_class: usize,
        test_per_class: usize,
        dim: usize,
        spread: f64,
        #[serde(default)]
        data_seed: u64,
    },
}

impl DatasetSource {
    pub fn load(&self) -> Result<(Dataset, Dataset)> {
        match self {
            DatasetSource::Idx {
                train_images,
                train_labels,
                test_images,
                test_labels,
            } => Ok((
                load_idx(train_images, train_labels)?,
                load_idx(test_images, test_labels)?,
            )),
            DatasetSource::Csv {
                train,
                test,
                has_header,
            } => Ok((load_csv(train, *has_header)?, load_csv(test, *has_header)?)),
            DatasetSource::Synth {
                classes,
                train_per_class,
                test_per_class,
                dim,
                spread,
                data_seed,
            } => Ok((
                synth_blobs(*classes, *train_per_class, *dim, *spread, *data_seed)?,
                synth_blobs(*classes, *test_per_class, *dim, *spread, data_seed.wrapping_add(1))?,
            )),
        }
    }

    fn referenced_files(&self) -> Vec<&Path> {
        match self {
            DatasetSource::Idx {
                train_images,
                train_labels,
                test_images,
                test_labels,
            } => vec![train_images, train_labels, test_images, test_labels],
            DatasetSource::Csv { train, test, .. } => vec![train, test],
            DatasetSource::Synth { .. } => vec![],
        }
    }
}

/// Where consistency scores come from. Exactly one source. Estimation is
/// skipped when nothing in the run reads scores (saves k trainings);
/// file-backed scores are always loaded.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ScoreSource {
    File {
        path: PathBuf,
    },
    Estimate {
        #[serde(default = "default_k_models")]
        k_models: usize,
        #[serde(default = "default_subset_ratio")]
        subset_ratio: f64,
        #[serde(default = "default_estimate_hidden")]
        hidden_layers: Vec<usize>,
        #[serde(default = "default_estimate_epochs")]
        epochs: usize,
        #[serde(default = "default_lr")]
        learning_rate: f64,
        #[serde(default = "default_momentum")]
        momentum: f64,
        #[serde(default = "default_batch")]
        batch_size: usize,
        /// Scores are a dataset-level artifact: the estimation seed is
        /// fixed in the config, not varied per run seed.
        #[serde(default)]
        seed: u64,
    },
}

fn default_k_models() -> usize {
    8
}
fn default_subset_ratio() -> f64 {
    0.5
}
fn default_estimate_hidden() -> Vec<usize> {
    vec![512, 256]
}
fn default_estimate_epochs() -> usize {
    10
}
fn default_lr() -> f64 {
    0.001
}
fn default_momentum() -> f64 {
    0.9
}
fn default_batch() -> usize {
    32
}

impl ScoreSource {
    pub fn estimate_params(&self) -> Option<(EstimateParams, TrainConfig)> {
        match self {
            ScoreSource::File { .. } => None,
            ScoreSource::Estimate {
                k_models,
                subset_ratio,
                hidden_layers,
                epochs,
                learning_rate,
                momentum,
                batch_size,
                seed,
            } => Some((
                EstimateParams {
                    k_models: *k_models,
                    subset_ratio: *subset_ratio,
                    hidden_layers: hidden_layers.clone(),
                },
                TrainConfig {
                    learning_rate: *learning_rate,
                    momentum: *momentum,
                    batch_size: *batch_size,
                    epochs: *epochs,
                    seed: *seed,
                },
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ScenarioCfg {
    pub num_tasks: usize,
    /// Shifts the family of class orderings; the run seed still changes
    /// the ordering within the family.
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct MethodSpec {
    pub kind: Method,
    #[serde(default = "default_batch")]
    pub memory_batch_size: usize,
    #[serde(default = "default_retrieval")]
    pub retrieval: Retrieval,
}

fn default_retrieval() -> Retrieval {
    Retrieval::Uniform
}

/// Optional axes for `run_grid`; unset axes fall back to the base value.
#[derive(Debug, Clone, Default, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct GridAxes {
    pub strategies: Option<Vec<Strategy>>,
    pub methods: Option<Vec<Method>>,
    pub capacities: Option<Vec<usize>>,
    pub epochs: Option<Vec<usize>>,
}

/// One experiment cell: everything but the run seed.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    #[serde(default)]
    pub name: Option<String>,
    pub dataset: DatasetSource,
    pub scores: ScoreSource,
    pub scenario: ScenarioCfg,
    pub method: MethodSpec,
    pub train: TrainConfig,
    pub strategy: Strategy,
    pub capacity: usize,
    pub seeds: Vec<u64>,
    /// Hidden layer widths of the classifier.
    #[serde(default = "default_hidden")]
    pub hidden_layers: Vec<usize>,
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub grid: Option<GridAxes>,
}

fn default_hidden() -> Vec<usize> {
    vec![512, 256]
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig =
            toml::from_str(text).map_err(|e| Error::Config(format!("config parse: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
        let cfg = Self::from_toml_str(&text)?;
        for file in cfg.referenced_files() {
            if !file.exists() {
                return Err(Error::Config(format!(
                    "referenced file {} does not exist",
                    file.display()
                )));
            }
        }
        Ok(cfg)
    }

    fn referenced_files(&self) -> Vec<&Path> {
        let mut files = self.dataset.referenced_files();
        if let ScoreSource::File { path } = &self.scores {
            files.push(path);
        }
        files
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::Config(format!(
                "schema_version {} unsupported (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        if self.seeds.is_empty() {
            return Err(Error::Config("seeds must not be empty".into()));
        }
        if self.capacity == 0 {
            return Err(Error::Config("capacity must be positive".into()));
        }
        if self.scenario.num_tasks == 0 {
            return Err(Error::Config("num_tasks must be positive".into()));
        }
        self.strategy.validate()?;
        self.method_config().validate()?;
        if let Some((params, train)) = self.scores.estimate_params() {
            if params.k_models < 2 {
                return Err(Error::Config("estimate k_models must be >= 2".into()));
            }
            train.validate()?;
        }
        Ok(())
    }

    /// The method configuration handed to the training loops.
    pub fn method_config(&self) -> MethodConfig {
        MethodConfig {
            method: self.method.kind,
            retrieval: self.method.retrieval,
            train: self.train,
            memory_batch_size: self.method.memory_batch_size,
        }
    }

    /// Derives the grid cells. Without a `[grid]` section the base config
    /// is the single cell. MIR retrieval applies to ER only, so cells with
    /// other methods fall back to uniform retrieval.
    pub fn grid_cells(&self) -> Vec<ExperimentConfig> {
        let axes = self.grid.clone().unwrap_or_default();
        let strategies = axes.strategies.unwrap_or_else(|| vec![self.strategy]);
        let methods = axes.methods.unwrap_or_else(|| vec![self.method.kind]);
        let capacities = axes.capacities.unwrap_or_else(|| vec![self.capacity]);
        let epochs_list = axes.epochs.unwrap_or_else(|| vec![self.train.epochs]);

        let mut cells = Vec::new();
        for &strategy in &strategies {
            for &method in &methods {
                for &capacity in &capacities {
                    for &epochs in &epochs_list {
                        let mut cell = self.clone();
                        cell.grid = None;
                        cell.strategy = strategy;
                        cell.method.kind = method;
                        if method != Method::Er {
                            cell.method.retrieval = Retrieval::Uniform;
                        }
                        cell.capacity = capacity;
                        cell.train.epochs = epochs;
                        cells.push(cell);
                    }
                }
            }
        }
        cells
    }

    /// Short human-readable cell id, e.g. `er-caws0.5-c2000-e4`.
    pub fn cell_id(&self) -> String {
        format!(
            "{}-{}-c{}-e{}",
            method_label(self.method.kind),
            strategy_label(&self.strategy),
            self.capacity,
            self.train.epochs
        )
    }

    /// Stable hash of the canonicalized config with run-seed, seeds list,
    /// name, and output stripped: identical across seeds of one grid cell.
    pub fn fingerprint(&self) -> String {
        use sha2::{Digest, Sha256};
        let mut canonical = self.clone();
        canonical.seeds = Vec::new();
        canonical.train.seed = 0;
        canonical.name = None;
        canonical.output = None;
        canonical.grid = None;
        let json = serde_json::to_string(&canonical).expect("config serializes");
        let digest = Sha256::digest(json.as_bytes());
        let hex: String = digest.iter().map(|b| format!("{b:02x}")).collect();
        hex[..16].to_string()
    }

    /// Synthetic 10-class blob scenario used for the strategy-trend
    /// experiments: 5 tasks, ER, estimated scores, capacity 150. The
    /// difficulty (spread 1.0 in 16 dimensions) is calibrated so that one
    /// epoch per task is a real budget constraint while fifteen epochs
    /// reach the attainable ceiling.
    pub fn synth_trend() -> Self {
        ExperimentConfig {
            schema_version: SCHEMA_VERSION,
            name: Some("synth-trend".into()),
            dataset: DatasetSource::Synth {
                classes: 10,
                train_per_class: 100,
                test_per_class: 30,
                dim: 16,
                spread: 1.0,
                data_seed: 0,
            },
            scores: ScoreSource::Estimate {
                k_models: 8,
                subset_ratio: 0.5,
                hidden_layers: vec![32],
                epochs: 15,
                learning_rate: 0.05,
                momentum: 0.9,
                batch_size: 16,
                seed: 0,
            },
            scenario: ScenarioCfg {
                num_tasks: 5,
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
                epochs: 15,
                seed: 0,
            },
            strategy: Strategy::Random,
            capacity: 150,
            seeds: vec![11, 12, 13, 14, 15],
            hidden_layers: vec![32],
            output: None,
            grid: None,
        }
    }

    /// The desk-scale 5-split MNIST preset: MLP 512/256, lr 0.001,
    /// momentum 0.9, batch 32, ER with a random reservoir, capacity 2000,
    /// 3 seeds.
    pub fn mnist_5split(data_dir: &Path) -> Self {
        ExperimentConfig {
            schema_version: SCHEMA_VERSION,
            name: Some("mnist-5split".into()),
            dataset: DatasetSource::Idx {
                train_images: data_dir.join("train-images.idx3-ubyte.gz"),
                train_labels: data_dir.join("train-labels.idx1-ubyte.gz"),
                test_images: data_dir.join("test-images.idx3-ubyte.gz"),
                test_labels: data_dir.join("test-labels.idx1-ubyte.gz"),
            },
            scores: ScoreSource::Estimate {
                k_models: default_k_models(),
                subset_ratio: default_subset_ratio(),
                hidden_layers: default_estimate_hidden(),
                epochs: default_estimate_epochs(),
                learning_rate: default_lr(),
                momentum: default_momentum(),
                batch_size: default_batch(),
                seed: 0,
            },
            scenario: ScenarioCfg {
                num_tasks: 5,
                seed: 0,
            },
            method: MethodSpec {
                kind: Method::Er,
                memory_batch_size: 32,
                retrieval: Retrieval::Uniform,
            },
            train: TrainConfig {
                learning_rate: 0.001,
                momentum: 0.9,
                batch_size: 32,
                epochs: 4,
                seed: 0,
            },
            strategy: Strategy::Random,
            capacity: 2000,
            seeds: vec![1, 2, 3],
            hidden_layers: vec![512, 256],
            output: None,
            grid: None,
        }
    }
}

pub fn method_label(method: Method) -> &'static str {
    match method {
        Method::Er => "er",
        Method::Gdumb => "gdumb",
        Method::Agem => "agem",
    }
}

pub fn strategy_label(strategy: &Strategy) -> String {
    match strategy {
        Strategy::Random => "random".into(),
        Strategy::RandomTaskEnd => "random-task-end".into(),
        Strategy::HighC => "high-c".into(),
        Strategy::LowC => "low-c".into(),
        Strategy::Cobs { num_bins } => format!("cobs{num_bins}"),
        Strategy::Caws { delta } => format!("caws{delta}"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn synth_toml() -> String {
        r#"
schema_version = 1
name = "blob-demo"
capacity = 60
seeds = [1, 2]
hidden_layers = [16]

[dataset]
kind = "synth"
classes = 4
train_per_class = 30
test_per_class = 10
dim = 8
spread = 1.0

[scores]
kind = "estimate"
k_models = 4
subset_ratio = 0.5
hidden_layers = [8]
epochs = 3
learning_rate = 0.05

[scenario]
num_tasks = 2

[method]
kind = "er"
memory_batch_size = 16

[train]
learning_rate = 0.01
momentum = 0.9
batch_size = 16
epochs = 2

[strategy]
kind = "caws"
delta = 0.5
"#
        .to_string()
    }

    #[test]
    fn parses_synth_config() {
        let cfg = ExperimentConfig::from_toml_str(&synth_toml()).unwrap();
        assert_eq!(cfg.capacity, 60);
        assert_eq!(cfg.strategy, Strategy::Caws { delta: 0.5 });
        assert_eq!(cfg.method.kind, Method::Er);
        assert_eq!(cfg.seeds, vec![1, 2]);
        assert!(matches!(cfg.scores, ScoreSource::Estimate { .. }));
    }

    #[test]
    fn rejects_wrong_schema_version() {
        let text = synth_toml().replace("schema_version = 1", "schema_version = 9");
        assert!(matches!(
            ExperimentConfig::from_toml_str(&text),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn rejects_empty_seeds() {
        let text = synth_toml().replace("seeds = [1, 2]", "seeds = []");
        assert!(matches!(
            ExperimentConfig::from_toml_str(&text),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn rejects_missing_referenced_file() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.toml");
        let text = synth_toml().replace(
            "kind = \"estimate\"",
            "kind = \"file\"\npath = \"/nonexistent/scores.csv\"",
        );
        // Strip now-invalid estimate keys.
        let text: String = text
            .lines()
            .filter(|l| {
                !l.starts_with("k_models")
                    && !l.starts_with("subset_ratio")
                    && !l.starts_with("hidden_layers = [8]")
                    && !l.starts_with("epochs = 3")
                    && !l.starts_with("learning_rate = 0.05")
            })
            .collect::<Vec<_>>()
            .join("\n");
        std::fs::write(&p, text).unwrap();
        assert!(matches!(
            ExperimentConfig::load(&p),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn mir_with_gdumb_rejected() {
        let text = synth_toml().replace(
            "kind = \"er\"",
            "kind = \"gdumb\"\nretrieval = { kind = \"mir\", candidate_pool_size = 50, select_k = 16 }",
        );
        assert!(matches!(
            ExperimentConfig::from_toml_str(&text),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn fingerprint_ignores_seeds_and_name() {
        let a = ExperimentConfig::from_toml_str(&synth_toml()).unwrap();
        let mut b = a.clone();
        b.seeds = vec![7, 8, 9];
        b.name = Some("other".into());
        assert_eq!(a.fingerprint(), b.fingerprint());
        let mut c = a.clone();
        c.capacity = 61;
        assert_ne!(a.fingerprint(), c.fingerprint());
    }

    #[test]
    fn grid_cells_cover_cartesian_product() {
        let mut cfg = ExperimentConfig::from_toml_str(&synth_toml()).unwrap();
        cfg.grid = Some(GridAxes {
            strategies: Some(vec![Strategy::Random, Strategy::HighC]),
            methods: Some(vec![Method::Er, Method::Gdumb]),
            capacities: Some(vec![40, 60]),
            epochs: Some(vec![1, 2, 3]),
        });
        let cells = cfg.grid_cells();
        assert_eq!(cells.len(), 2 * 2 * 2 * 3);
        assert!(cells.iter().all(|c| c.grid.is_none()));
        // Cell ids unique.
        let mut ids: Vec<String> = cells.iter().map(|c| c.cell_id()).collect();
        ids.sort();
        ids.dedup();
        assert_eq!(ids.len(), 24);
    }

    #[test]
    fn toml_round_trip() {
        let cfg = ExperimentConfig::from_toml_str(&synth_toml()).unwrap();
        let text = toml::to_string(&cfg).unwrap();
        let back = ExperimentConfig::from_toml_str(&text).unwrap();
        assert_eq!(cfg, back);
    }
}
