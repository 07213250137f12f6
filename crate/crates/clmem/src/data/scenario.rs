//! Class-incremental scenario construction: a seeded permutation of the
//! class labels, chunked into an ordered sequence of disjoint tasks.

use rand::seq::SliceRandom;

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::rng;

/// One task: a set of classes with the train/test dataset indices that
/// carry those labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Task {
    pub task_id: usize,
    pub classes: Vec<usize>,
    pub train_indices: Vec<usize>,
    pub test_indices: Vec<usize>,
}

/// An ordered sequence of disjoint class-subsets over a train/test pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Scenario {
    tasks: Vec<Task>,
}

impl Scenario {
    pub fn tasks(&self) -> &[Task] {
        &self.tasks
    }

    pub fn num_tasks(&self) -> usize {
        self.tasks.len()
    }
}

/// Permutes class labels with a scenario-dedicated RNG stream, then chunks
/// them into `num_tasks` contiguous groups. When the class count does not
/// divide evenly, earlier tasks receive one extra class.
pub fn make_scenario(
    train: &Dataset,
    test: &Dataset,
    num_tasks: usize,
    seed: u64,
) -> Result<Scenario> {
    let num_classes = train.num_classes();
    if test.num_classes() != num_classes {
        return Err(Error::Config(format!(
            "train has {} classes but test has {}",
            num_classes,
            test.num_classes()
        )));
    }
    if train.feature_dim() != test.feature_dim() {
        return Err(Error::Config(format!(
            "train feature_dim {} != test feature_dim {}",
            train.feature_dim(),
            test.feature_dim()
        )));
    }
    if num_tasks == 0 {
        return Err(Error::Config("num_tasks must be positive".into()));
    }
    if num_tasks > num_classes {
        return Err(Error::Config(format!(
            "cannot split {num_classes} classes into {num_tasks} tasks"
        )));
    }

    let mut classes: Vec<usize> = (0..num_classes).collect();
    classes.shuffle(&mut rng::stream(seed, "scenario"));

    let base = num_classes / num_tasks;
    let extra = num_classes % num_tasks;
    let train_by_class = train.indices_by_class();
    let test_by_class = test.indices_by_class();

    let mut tasks = Vec::with_capacity(num_tasks);
    let mut cursor = 0;
    for t in 0..num_tasks {
        let size = base + usize::from(t < extra);
        let class_set: Vec<usize> = classes[cursor..cursor + size].to_vec();
        cursor += size;
        let mut train_indices = Vec::new();
        let mut test_indices = Vec::new();
        for &c in &class_set {
            if let Some(idx) = train_by_class.get(&c) {
                train_indices.extend_from_slice(idx);
            }
            if let Some(idx) = test_by_class.get(&c) {
                test_indices.extend_from_slice(idx);
            }
        }
        // Stable order: dataset order within the task.
        train_indices.sort_unstable();
        test_indices.sort_unstable();
        tasks.push(Task {
            task_id: t,
            classes: class_set,
            train_indices,
            test_indices,
        });
    }
    Ok(Scenario { tasks })
}
