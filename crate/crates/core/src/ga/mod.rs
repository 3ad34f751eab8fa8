//! The simple genetic algorithm: sigma scaling, stochastic universal
//! sampling, uniform crossover, bit-flip mutation and clamping.

mod clamp;
mod config;
mod engine;
mod operators;

pub use clamp::{ClampState, LocusClamp};
pub use config::{ClampingConfig, Crossover, GaConfig};
pub use engine::{init_population, step_generation, GaRun, GenerationRecord};
pub use operators::{mutate, sigma_scale, sus_select, uniform_crossover, Selection};
