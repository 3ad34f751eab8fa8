//! Multi-trial experiments: configuration, trace files and the runner.

mod config;
mod runner;
mod trace;

pub use config::{ExperimentConfig, FitnessSpec, MaxSatSource, RecordOptions, TrialFitness};
pub use runner::{run_experiment, run_trial, trial_file_name, ExperimentResult, RunOptions, OUT_DIR_ENV};
pub use trace::{Aggregate, RunTrace};
