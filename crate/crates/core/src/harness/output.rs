//! CSV and JSON writers.
//!
//! CSV: header `optimizer,seed,step,error,channel`, LF line endings, errors
//! in scientific notation with 17 significant digits (`{:.16e}`), and the
//! literal `diverged` in place of an error on a divergence row.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use super::config::RunConfig;
use super::run::{Aggregate, ErrorSeries, ErrorValue, ExperimentResult};
use crate::error::{Error, Result};

pub const CSV_HEADER: &str = "optimizer,seed,step,error,channel";

pub fn format_float(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn series_to_csv(series: &ErrorSeries) -> String {
    let mut out = String::with_capacity(64 * (series.rows.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for row in &series.rows {
        let error = match row.error {
            ErrorValue::Finite(v) => format_float(v),
            ErrorValue::Diverged => "diverged".to_string(),
        };
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            row.optimizer, row.seed, row.step, error, row.channel
        );
    }
    out
}

pub fn aggregate_to_json(aggregate: &Aggregate) -> String {
    let mut text = serde_json::to_string_pretty(aggregate).expect("aggregate serializes");
    text.push('\n');
    text
}

fn write_file(path: PathBuf, contents: &str) -> Result<PathBuf> {
    fs::write(&path, contents).map_err(|source| Error::Io {
        path: path.clone(),
        source,
    })?;
    Ok(path)
}

/// Writes `<optimizer>_seed<k>.csv` per seed and `<optimizer>_aggregate.json`
/// (plus `<optimizer>_raw_aggregate.json` for PADAM) into `dir`.
pub fn write_experiment(
    dir: &Path,
    config: &RunConfig,
    result: &ExperimentResult,
) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|source| Error::Io {
        path: dir.to_owned(),
        source,
    })?;
    let id = config.optimizer.id();
    let mut written = Vec::new();
    for (k, series) in result.runs.iter().enumerate() {
        let seed = config.seed_base + k as u64;
        written.push(write_file(
            dir.join(format!("{id}_seed{seed}.csv")),
            &series_to_csv(series),
        )?);
    }
    written.push(write_file(
        dir.join(format!("{id}_aggregate.json")),
        &aggregate_to_json(&result.aggregate),
    )?);
    if let Some(raw) = &result.raw_aggregate {
        written.push(write_file(
            dir.join(format!("{id}_raw_aggregate.json")),
            &aggregate_to_json(raw),
        )?);
    }
    Ok(written)
}
