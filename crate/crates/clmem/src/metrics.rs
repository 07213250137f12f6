//! Accuracy bookkeeping across a task sequence.
//!
//! Row `t` of the matrix holds the accuracy on each task `i <= t`, measured
//! right after training task `t`. Average accuracy is the mean of the final
//! row; forgetting of task `i` is its best past accuracy minus its final
//! accuracy.

use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};

/// Lower-triangular per-(stage, task) accuracy matrix.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct AccuracyMatrix {
    num_tasks: usize,
    rows: Vec<Option<Vec<f64>>>,
}

/// Per-task forgetting plus its mean. `mean` is `None` for single-task
/// scenarios, which have no forgetting entries. Raw values may be negative
/// (backward transfer); clamp only for display.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Forgetting {
    pub per_task: Vec<f64>,
    pub mean: Option<f64>,
}

impl AccuracyMatrix {
    pub fn new(num_tasks: usize) -> Self {
        AccuracyMatrix {
            num_tasks,
            rows: vec![None; num_tasks],
        }
    }

    pub fn num_tasks(&self) -> usize {
        self.num_tasks
    }

    /// Accuracy on task `task` measured after training stage `stage`, if
    /// that row was recorded.
    pub fn get(&self, stage: usize, task: usize) -> Option<f64> {
        self.rows.get(stage)?.as_ref()?.get(task).copied()
    }

    /// Records row `stage`: accuracies for tasks `0..=stage`. Each row can
    /// be written exactly once.
    pub fn record_eval(&mut self, stage: usize, accuracies: Vec<f64>) -> Result<()> {
        if stage >= self.num_tasks {
            return Err(Error::Usage(format!(
                "stage {stage} outside scenario of {} tasks",
                self.num_tasks
            )));
        }
        if accuracies.len() != stage + 1 {
            return Err(Error::Usage(format!(
                "row {stage} needs {} accuracies, got {}",
                stage + 1,
                accuracies.len()
            )));
        }
        if let Some(bad) = accuracies.iter().find(|a| !(0.0..=1.0).contains(*a)) {
            return Err(Error::Data(format!("accuracy {bad} outside [0, 1]")));
        }
        if self.rows[stage].is_some() {
            return Err(Error::Usage(format!("row {stage} already recorded")));
        }
        self.rows[stage] = Some(accuracies);
        Ok(())
    }

    fn final_row(&self) -> Result<&[f64]> {
        self.rows[self.num_tasks - 1]
            .as_deref()
            .ok_or_else(|| Error::Usage("final row not recorded yet".into()))
    }

    /// Mean accuracy over all tasks after the last training stage.
    pub fn average_accuracy(&self) -> Result<f64> {
        let last = self.final_row()?;
        Ok(last.iter().sum::<f64>() / last.len() as f64)
    }

    /// Forgetting per task: `max over past stages` minus final accuracy.
    /// The last task has no entry (it was never revisited).
    pub fn forgetting(&self) -> Result<Forgetting> {
        let last = self.final_row()?;
        let mut per_task = Vec::new();
        for task in 0..self.num_tasks.saturating_sub(1) {
            let mut best_past = f64::NEG_INFINITY;
            for stage in task..self.num_tasks - 1 {
                let row = self.rows[stage].as_ref().ok_or_else(|| {
                    Error::Usage(format!("row {stage} missing, cannot compute forgetting"))
                })?;
                best_past = best_past.max(row[task]);
            }
            per_task.push(best_past - last[task]);
        }
        let mean = if per_task.is_empty() {
            None
        } else {
            Some(per_task.iter().sum::<f64>() / per_task.len() as f64)
        };
        Ok(Forgetting { per_task, mean })
    }

    /// All recorded `(stage, task, accuracy)` entries in row order.
    pub fn entries(&self) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::new();
        for (stage, row) in self.rows.iter().enumerate() {
            if let Some(row) = row {
                for (task, &acc) in row.iter().enumerate() {
                    out.push((stage, task, acc));
                }
            }
        }
        out
    }

    /// Writes `stage,task,accuracy` CSV rows.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut file = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(file, "stage,task,accuracy")?;
        for (stage, task, acc) in self.entries() {
            writeln!(file, "{stage},{task},{acc}")?;
        }
        file.flush()?;
        Ok(())
    }

    /// JSON summary with raw (unclamped) forgetting values.
    pub fn summary_json(&self) -> Result<serde_json::Value> {
        let forgetting = self.forgetting()?;
        Ok(serde_json::json!({
            "avg_accuracy": self.average_accuracy()?,
            "forgetting": forgetting.per_task,
            "mean_forgetting": forgetting.mean,
        }))
    }
}
