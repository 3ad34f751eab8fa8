//! Runs independent trials of an experiment, in parallel, and writes their
//! traces as they finish.

use std::path::{Path, PathBuf};
use std::sync::Mutex;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::experiment::config::ExperimentConfig;
use crate::experiment::trace::{Aggregate, RunTrace};
use crate::ga::{GaConfig, GaRun};
use crate::rng::trial_seed;
use crate::schema::stage_step_frequencies;

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "HYPERCLIMB_OUT_DIR";

#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    /// Where `trial_NNN.csv` and `aggregate.csv` go. Nothing is written when
    /// `None`.
    pub out_dir: Option<PathBuf>,
    /// Upper bound on concurrently running trials. `None` uses every core.
    pub jobs: Option<usize>,
}

#[derive(Clone, Debug)]
pub struct ExperimentResult {
    /// Ordered by trial index.
    pub traces: Vec<RunTrace>,
    pub aggregate: Aggregate,
}

pub fn trial_file_name(trial: usize) -> String {
    format!("trial_{trial:03}.csv")
}

/// Runs trial `trial` of `config` on the current thread.
pub fn run_trial(config: &ExperimentConfig, trial: usize) -> Result<RunTrace> {
    let fitness = config.fitness.for_trial(trial)?;
    let seed = trial_seed(config.ga.seed, trial as u64);
    let ga = GaConfig { seed, ..config.ga.clone() };
    let staircase = fitness.staircase();

    let mut columns: Vec<String> = ["generation", "avg_fitness", "best_fitness", "unmutated_loci"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    let mut depths = Vec::new();
    if let Some(d) = staircase {
        let multi = d.ladders().len() > 1;
        for ladder in d.ladders() {
            depths.push(config.record.step_depth.min(ladder.height()));
        }
        for kind in ["stage", "step"] {
            for (k, &depth) in depths.iter().enumerate() {
                for i in 1..=depth {
                    columns.push(if multi {
                        format!("{kind}_{}_{i}", k + 1)
                    } else {
                        format!("{kind}_{i}")
                    });
                }
            }
        }
    }
    let span = config.fitness.span();
    if config.record.one_frequencies {
        columns.extend((1..=span).map(|i| format!("freq_{i}")));
    }

    let mut run = GaRun::new(ga, &fitness)?.record_one_frequencies(config.record.one_frequencies);
    let mut rows = Vec::with_capacity(config.ga.generations as usize);
    for _ in 0..config.ga.generations {
        let stage_step = match staircase {
            Some(d) if depths.iter().any(|&x| x > 0) => Some(stage_step_frequencies(run.population(), d)?),
            _ => None,
        };
        let rec = run.step()?;
        let mut row = Vec::with_capacity(columns.len());
        row.push(rec.generation as f64);
        row.push(rec.avg_fitness);
        row.push(rec.best_fitness);
        row.push(rec.unmutated_loci as f64);
        if let Some(ss) = &stage_step {
            for pick in [|s: &crate::schema::StageStep| s.stage, |s: &crate::schema::StageStep| s.step] {
                for (ladder, &depth) in ss.iter().zip(&depths) {
                    row.extend(ladder[..depth].iter().map(pick));
                }
            }
        }
        if let Some(f) = rec.one_frequencies {
            row.extend(f);
        }
        rows.push(row);
    }
    Ok(RunTrace {
        trial,
        seed,
        config_digest: config.digest(),
        columns,
        rows,
    })
}

/// Runs every trial, writing each trace as soon as it completes, then the
/// aggregate.
pub fn run_experiment(config: &ExperimentConfig, options: &RunOptions) -> Result<ExperimentResult> {
    config.validate()?;
    if let Some(dir) = &options.out_dir {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(options.jobs.unwrap_or(0))
        .build()
        .map_err(|e| Error::InvalidConfig(format!("cannot start worker pool: {e}")))?;
    let write_lock = Mutex::new(());
    let write_trace = |trace: &RunTrace, dir: &Path| -> Result<()> {
        let _guard = write_lock.lock().unwrap_or_else(|p| p.into_inner());
        trace.write_csv(&dir.join(trial_file_name(trace.trial)))
    };

    let traces = pool.install(|| {
        (0..config.trials)
            .into_par_iter()
            .map(|t| {
                let trace = run_trial(config, t)?;
                if let Some(dir) = &options.out_dir {
                    write_trace(&trace, dir)?;
                }
                Ok(trace)
            })
            .collect::<Result<Vec<RunTrace>>>()
    })?;
    let aggregate = Aggregate::from_traces(&traces)?;
    if let Some(dir) = &options.out_dir {
        aggregate.write_csv(&dir.join("aggregate.csv"))?;
    }
    Ok(ExperimentResult { traces, aggregate })
}
