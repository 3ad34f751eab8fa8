//! Simple genetic algorithm with staircase and MAX 3-SAT fitness functions,
//! schema signal analysis, locus clamping and fractal fitness plots.

pub mod error;
pub mod experiment;
pub mod fitness;
pub mod fractal;
pub mod ga;
pub mod genome;
pub mod maxsat;
pub mod rng;
pub mod schema;
pub mod staircase;
pub mod verify;

pub use error::{Error, Result};
pub use fitness::Fitness;
pub use ga::{ClampState, ClampingConfig, Crossover, GaConfig, GaRun, GenerationRecord};
pub use genome::{Genome, Population};
pub use maxsat::Sat3Instance;
pub use staircase::{Descriptor, MultiStaircaseDescriptor, Staircase, StaircaseDescriptor};
