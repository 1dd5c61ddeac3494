use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::trace::RunTrace;

/// Column order of `results.csv`.
pub const RESULT_COLUMNS: [&str; 10] = [
    "run_id",
    "algorithm",
    "instance",
    "T",
    "seed",
    "batches",
    "total_spent",
    "best_loss",
    "simple_regret",
    "wall_time_ms",
];

/// One line of `results.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub run_id: String,
    pub algorithm: String,
    pub instance: String,
    #[serde(rename = "T")]
    pub total_budget: u64,
    pub seed: u64,
    pub batches: usize,
    pub total_spent: u64,
    pub best_loss: f64,
    pub simple_regret: Option<f64>,
    pub wall_time_ms: u64,
}

impl ResultRow {
    pub fn from_trace(run_id: String, instance: &str, trace: &RunTrace, wall_time_ms: u64) -> Self {
        Self {
            run_id,
            algorithm: trace.algorithm.clone(),
            instance: instance.to_string(),
            total_budget: trace.total_budget,
            seed: trace.seed,
            batches: trace.batch_count(),
            total_spent: trace.total_spent,
            best_loss: trace.best_loss,
            simple_regret: trace.simple_regret,
            wall_time_ms,
        }
    }

    /// Row for a run that errored: no budget spent, NaN loss.
    pub fn failed(run_id: String, algorithm: &str, instance: &str, total_budget: u64, seed: u64) -> Self {
        Self {
            run_id,
            algorithm: algorithm.to_string(),
            instance: instance.to_string(),
            total_budget,
            seed,
            batches: 0,
            total_spent: 0,
            best_loss: f64::NAN,
            simple_regret: None,
            wall_time_ms: 0,
        }
    }
}

/// Stable identifier for a run.
pub fn run_id(algorithm: &str, instance: &str, total_budget: u64, seed: u64) -> String {
    format!("{algorithm}_{instance}_T{total_budget}_s{seed}")
}

pub fn write_results(path: &Path, rows: &[ResultRow]) -> Result<()> {
    let mut writer = csv::Writer::from_path(path).map_err(csv_error)?;
    if rows.is_empty() {
        writer.write_record(RESULT_COLUMNS).map_err(csv_error)?;
    }
    for row in rows {
        writer.serialize(row).map_err(csv_error)?;
    }
    writer.flush()?;
    Ok(())
}

pub fn read_results(path: &Path) -> Result<Vec<ResultRow>> {
    let mut reader = csv::Reader::from_path(path).map_err(csv_error)?;
    reader
        .deserialize()
        .map(|r| r.map_err(csv_error))
        .collect()
}

fn csv_error(e: csv::Error) -> crate::error::Error {
    crate::error::Error::Io(std::io::Error::other(e))
}

pub fn write_trace(dir: &Path, run_id: &str, trace: &RunTrace) -> Result<PathBuf> {
    let path = dir.join(format!("trace-{run_id}.json"));
    fs::write(&path, serde_json::to_vec_pretty(trace)?)?;
    Ok(path)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    fs::write(path, serde_json::to_vec_pretty(value)?)?;
    Ok(())
}
