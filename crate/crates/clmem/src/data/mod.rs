//! Dataset ingestion and class-incremental scenario construction.
//!
//! A [`Dataset`] is an immutable list of `(features, label)` samples with
//! stable indices (position in the source file / generation order). Indices
//! are the join key for consistency scores and memory snapshots, so nothing
//! downstream ever reorders or renumbers samples.

mod csvio;
mod idx;
mod scenario;
mod synth;

pub use csvio::{load_csv, write_csv};
pub use idx::load_idx;
pub use scenario::{make_scenario, Scenario, Task};
pub use synth::synth_blobs;

use std::collections::BTreeMap;

use crate::error::{Error, Result};

/// One labeled feature vector with its stable dataset index.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub features: Vec<f64>,
    pub label: usize,
    pub index: usize,
}

/// Immutable labeled dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    samples: Vec<Sample>,
    num_classes: usize,
    feature_dim: usize,
}

impl Dataset {
    /// Validates the invariants: uniform feature dimension, finite values,
    /// labels in range, indices equal to positions.
    pub fn new(samples: Vec<Sample>, num_classes: usize) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::Data("dataset has no samples".into()));
        }
        if num_classes == 0 {
            return Err(Error::Data("dataset needs at least one class".into()));
        }
        let feature_dim = samples[0].features.len();
        for (pos, s) in samples.iter().enumerate() {
            if s.features.len() != feature_dim {
                return Err(Error::Data(format!(
                    "sample {} has {} features, expected {}",
                    pos,
                    s.features.len(),
                    feature_dim
                )));
            }
            if s.features.iter().any(|v| !v.is_finite()) {
                return Err(Error::Data(format!("sample {} has non-finite features", pos)));
            }
            if s.label >= num_classes {
                return Err(Error::Data(format!(
                    "sample {} has label {} outside [0, {})",
                    pos, s.label, num_classes
                )));
            }
            if s.index != pos {
                return Err(Error::Data(format!(
                    "sample at position {} carries index {}",
                    pos, s.index
                )));
            }
        }
        Ok(Dataset {
            samples,
            num_classes,
            feature_dim,
        })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn feature_dim(&self) -> usize {
        self.feature_dim
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn sample(&self, index: usize) -> &Sample {
        &self.samples[index]
    }

    /// Dataset indices grouped by class, ascending within each class.
    pub fn indices_by_class(&self) -> BTreeMap<usize, Vec<usize>> {
        let mut map: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for s in &self.samples {
            map.entry(s.label).or_default().push(s.index);
        }
        map
    }

    /// Feature/label view for a list of dataset indices.
    pub fn view(&self, indices: &[usize]) -> (Vec<&[f64]>, Vec<usize>) {
        let features = indices
            .iter()
            .map(|&i| self.samples[i].features.as_slice())
            .collect();
        let labels = indices.iter().map(|&i| self.samples[i].label).collect();
        (features, labels)
    }
}
