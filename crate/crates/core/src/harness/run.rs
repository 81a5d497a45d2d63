use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use super::config::{OptimizerKind, RunConfig};
use crate::error::{Error, Result};
use crate::optim::{
    adam_step, adamw_step, evaluate_and_select, momentum_sgd_step, padam_step, sgd_step, AdamState,
    HyperParams, PadamState,
};
use crate::params::ParamVector;
use crate::prng::{derive_stream, RngStream};
use crate::problems::StochasticObjective;

/// Fixed stream roles per seed. Each role gets its own stream so that, for
/// example, raising the Monte Carlo sample count never shifts training data.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum StreamRole {
    Init = 0,
    Train = 1,
    Selection = 2,
    Test = 3,
}

pub fn role_stream(seed: u64, role: StreamRole) -> RngStream {
    derive_stream(seed, role as u64)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ErrorValue {
    Finite(f64),
    Diverged,
}

impl ErrorValue {
    pub fn finite(self) -> Option<f64> {
        match self {
            ErrorValue::Finite(v) => Some(v),
            ErrorValue::Diverged => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeriesRow {
    pub optimizer: String,
    pub seed: u64,
    pub step: u64,
    pub error: ErrorValue,
    /// Selected channel (1-based) for PADAM rows, 0 for the PADAM raw
    /// iterate, -1 otherwise.
    pub channel: i64,
}

/// Error trajectory of one seeded run. PADAM runs carry two interleaved
/// series: the selected channel under the optimizer id and the underlying
/// Adam iterate under `<id>_raw`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ErrorSeries {
    pub rows: Vec<SeriesRow>,
}

impl ErrorSeries {
    pub fn rows_for<'a>(&'a self, optimizer: &'a str) -> impl Iterator<Item = &'a SeriesRow> + 'a {
        self.rows.iter().filter(move |r| r.optimizer == optimizer)
    }

    pub fn diverged(&self) -> bool {
        self.rows.iter().any(|r| r.error == ErrorValue::Diverged)
    }

    /// Last finite error logged under `optimizer`, unless that series diverged.
    pub fn final_error(&self, optimizer: &str) -> Option<f64> {
        self.rows_for(optimizer)
            .last()
            .and_then(|r| r.error.finite())
    }
}

pub fn raw_series_id(optimizer: OptimizerKind) -> String {
    format!("{}_raw", optimizer.id())
}

/// Optimizer state with a uniform step interface.
#[derive(Debug, Clone)]
enum Driver {
    Sgd(ParamVector),
    Momentum {
        params: ParamVector,
        velocity: Vec<f64>,
    },
    Adam {
        params: ParamVector,
        state: AdamState,
        decoupled_decay: bool,
    },
    Averaged {
        state: PadamState,
        select: bool,
    },
}

impl Driver {
    fn new(config: &RunConfig, initial: ParamVector) -> Result<Self> {
        let dim = initial.len();
        Ok(match config.optimizer {
            OptimizerKind::Sgd => Driver::Sgd(initial),
            OptimizerKind::Momentum => Driver::Momentum {
                params: initial,
                velocity: vec![0.0; dim],
            },
            OptimizerKind::Adam | OptimizerKind::Adamw => Driver::Adam {
                params: initial,
                state: AdamState::new(dim),
                decoupled_decay: config.optimizer == OptimizerKind::Adamw,
            },
            kind @ (OptimizerKind::AdamEma | OptimizerKind::Padam3 | OptimizerKind::Padam10) => {
                Driver::Averaged {
                    state: PadamState::new(initial, config.channel_specs()?)?,
                    select: kind.selects_channels(),
                }
            }
        })
    }

    /// Where the next gradient is evaluated.
    fn grad_point(&self) -> &[f64] {
        match self {
            Driver::Sgd(p) => p,
            Driver::Momentum { params, .. } | Driver::Adam { params, .. } => params,
            Driver::Averaged { state, .. } => state.raw(),
        }
    }

    fn step(&mut self, grad: &[f64], hp: &HyperParams) -> Result<()> {
        match self {
            Driver::Sgd(p) => sgd_step(p, grad, hp),
            Driver::Momentum { params, velocity } => momentum_sgd_step(velocity, params, grad, hp),
            Driver::Adam {
                params,
                state,
                decoupled_decay,
            } => {
                if *decoupled_decay {
                    adamw_step(state, params, grad, hp)
                } else {
                    adam_step(state, params, grad, hp)
                }
            }
            Driver::Averaged { state, .. } => padam_step(state, grad, hp),
        }
    }

    /// The iterate whose error is reported, and its channel column.
    fn reported(&self) -> (&[f64], i64) {
        match self {
            Driver::Averaged {
                state,
                select: true,
            } => (state.selected(), state.best_index() as i64),
            Driver::Averaged {
                state,
                select: false,
            } => (state.selected(), -1),
            other => (other.grad_point(), -1),
        }
    }
}

fn is_divergence(err: &Error) -> bool {
    matches!(err, Error::NonFinite { .. } | Error::Selection(_))
}

/// Test error with divergence folded into [`ErrorValue`]. Every evaluation in
/// a run reuses the same Monte Carlo points.
fn evaluate(
    objective: &dyn StochasticObjective,
    params: &[f64],
    test_base: &RngStream,
    samples: usize,
) -> Result<ErrorValue> {
    match objective.test_error(params, &mut test_base.clone(), samples) {
        Ok(v) if v.is_finite() => Ok(ErrorValue::Finite(v)),
        Ok(_) => Ok(ErrorValue::Diverged),
        Err(e) if is_divergence(&e) => Ok(ErrorValue::Diverged),
        Err(e) => Err(e),
    }
}

/// Runs one seed of `config` and returns its error series.
///
/// Errors are logged at step 0, at every multiple of `eval_every`, and at the
/// final step. PADAM re-selects its reported channel whenever the step is a
/// multiple of `n_t`, before logging. A non-finite gradient, iterate or test
/// error ends the run with a `Diverged` row.
pub fn run_single(config: &RunConfig, seed: u64) -> Result<ErrorSeries> {
    config.validate()?;
    let objective = config.problem.build()?;
    let objective = objective.as_ref();
    run_with_objective(config, objective, seed)
}

/// [`run_single`] against an already constructed objective.
pub fn run_with_objective(
    config: &RunConfig,
    objective: &dyn StochasticObjective,
    seed: u64,
) -> Result<ErrorSeries> {
    config.validate()?;
    let mut init_stream = role_stream(seed, StreamRole::Init);
    let mut train_stream = role_stream(seed, StreamRole::Train);
    let mut selection_stream = role_stream(seed, StreamRole::Selection);
    let test_base = role_stream(seed, StreamRole::Test);

    let initial = objective.init_params(&mut init_stream);
    let mut driver = Driver::new(config, initial)?;
    let id = config.optimizer.id().to_string();
    let raw_id = config
        .optimizer
        .selects_channels()
        .then(|| raw_series_id(config.optimizer));
    let mut series = ErrorSeries::default();

    let log = |driver: &Driver, step: u64, series: &mut ErrorSeries| -> Result<bool> {
        let (params, channel) = driver.reported();
        let error = evaluate(objective, params, &test_base, config.mc_samples)?;
        series.rows.push(SeriesRow {
            optimizer: id.clone(),
            seed,
            step,
            error,
            channel,
        });
        if error == ErrorValue::Diverged {
            return Ok(false);
        }
        if let Some(raw_id) = &raw_id {
            let raw = evaluate(
                objective,
                driver.grad_point(),
                &test_base,
                config.mc_samples,
            )?;
            if let ErrorValue::Finite(_) = raw {
                series.rows.push(SeriesRow {
                    optimizer: raw_id.clone(),
                    seed,
                    step,
                    error: raw,
                    channel: 0,
                });
            }
        }
        Ok(true)
    };
    let diverge = |driver: &Driver, step: u64, series: &mut ErrorSeries| {
        series.rows.push(SeriesRow {
            optimizer: id.clone(),
            seed,
            step,
            error: ErrorValue::Diverged,
            channel: driver.reported().1,
        });
    };

    if !log(&driver, 0, &mut series)? {
        return Ok(series);
    }
    for step in 1..=config.steps {
        let batch = objective.sample_batch(&mut train_stream, config.batch);
        let advanced = objective
            .grad(driver.grad_point(), &batch)
            .and_then(|grad| driver.step(&grad, &config.hyper));
        match advanced {
            Ok(()) => {}
            Err(e) if is_divergence(&e) => {
                diverge(&driver, step, &mut series);
                return Ok(series);
            }
            Err(e) => return Err(e),
        }
        if step % config.n_t == 0 {
            if let Driver::Averaged {
                state,
                select: true,
            } = &mut driver
            {
                match evaluate_and_select(state, objective, &mut selection_stream, config.batch) {
                    Ok(_) => {}
                    Err(e) if is_divergence(&e) => {
                        diverge(&driver, step, &mut series);
                        return Ok(series);
                    }
                    Err(e) => return Err(e),
                }
            }
        }
        if (step % config.eval_every == 0 || step == config.steps)
            && !log(&driver, step, &mut series)?
        {
            return Ok(series);
        }
    }
    Ok(series)
}

/// Per-step mean error across seeds plus divergence bookkeeping.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Aggregate {
    pub config_echo: RunConfig,
    pub per_step_mean_error: Vec<(u64, f64)>,
    pub final_mean_error: Option<f64>,
    pub diverged_seed_count: usize,
}

/// Averages the finite errors logged under `optimizer` step by step, in seed
/// order. Diverged seeds contribute only the steps they logged before
/// diverging and are excluded from the final mean.
pub fn aggregate(config: &RunConfig, runs: &[ErrorSeries], optimizer: &str) -> Aggregate {
    let mut sums: BTreeMap<u64, (f64, usize)> = BTreeMap::new();
    let mut diverged = 0;
    let mut finals = Vec::new();
    for run in runs {
        for row in run.rows_for(optimizer) {
            if let ErrorValue::Finite(v) = row.error {
                let entry = sums.entry(row.step).or_insert((0.0, 0));
                entry.0 += v;
                entry.1 += 1;
            }
        }
        if run
            .rows_for(optimizer)
            .any(|r| r.error == ErrorValue::Diverged)
        {
            diverged += 1;
        } else if let Some(v) = run.final_error(optimizer) {
            finals.push(v);
        }
    }
    let final_mean_error =
        (!finals.is_empty()).then(|| finals.iter().sum::<f64>() / finals.len() as f64);
    Aggregate {
        config_echo: config.clone(),
        per_step_mean_error: sums
            .into_iter()
            .map(|(step, (sum, count))| (step, sum / count as f64))
            .collect(),
        final_mean_error,
        diverged_seed_count: diverged,
    }
}

/// All seeds of one experiment.
#[derive(Debug, Clone)]
pub struct ExperimentResult {
    pub runs: Vec<ErrorSeries>,
    pub aggregate: Aggregate,
    /// Aggregate of the raw Adam iterate for PADAM runs.
    pub raw_aggregate: Option<Aggregate>,
}

impl ExperimentResult {
    pub fn any_diverged(&self) -> bool {
        self.aggregate.diverged_seed_count > 0
    }
}

/// Runs seeds `seed_base .. seed_base + seeds` in parallel, aggregates them,
/// and writes output files when `config.out` is set.
pub fn run_experiment(config: &RunConfig) -> Result<ExperimentResult> {
    config.validate()?;
    let objective = config.problem.build()?;
    let objective = objective.as_ref();
    let seeds: Vec<u64> = (0..config.seeds).map(|k| config.seed_base + k).collect();
    let runs = seeds
        .par_iter()
        .map(|&seed| run_with_objective(config, objective, seed))
        .collect::<Result<Vec<_>>>()?;
    let aggregate = aggregate(config, &runs, config.optimizer.id());
    let raw_aggregate = config
        .optimizer
        .selects_channels()
        .then(|| aggregate_raw(config, &runs));
    let result = ExperimentResult {
        runs,
        aggregate,
        raw_aggregate,
    };
    if let Some(dir) = &config.out {
        super::output::write_experiment(dir, config, &result)?;
    }
    Ok(result)
}

fn aggregate_raw(config: &RunConfig, runs: &[ErrorSeries]) -> Aggregate {
    aggregate(config, runs, &raw_series_id(config.optimizer))
}
