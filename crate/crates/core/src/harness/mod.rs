//! Experiment driver: wires problems to optimizers, runs seeds, and writes
//! error series.

mod config;
mod output;
mod run;

pub use config::{
    default_lr, default_n_t, find_preset, parse_config, presets, ConfigOverrides, OptimizerKind,
    Preset, ProblemConfig, ProblemKind, RunConfig, Scale,
};
pub use output::{aggregate_to_json, format_float, series_to_csv, write_experiment, CSV_HEADER};
pub use run::{
    aggregate, raw_series_id, role_stream, run_experiment, run_single, run_with_objective,
    Aggregate, ErrorSeries, ErrorValue, ExperimentResult, SeriesRow, StreamRole,
};
