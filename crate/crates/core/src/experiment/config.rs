//! Experiment configuration and its TOML file form.
//!
//! ```toml
//! [experiment]
//! trials = 20
//! seed = 1
//!
//! [ga]
//! population_size = 500
//! mutation_rate = 0.003
//! crossover = "uniform"
//! generations = 2500
//!
//! [clamping]          # optional
//! flag_freq = 0.01
//! unflag_freq = 0.1
//! flag_period = 200
//!
//! [fitness]
//! kind = "staircase"  # or "multi_staircase", "maxsat"
//! basic = [50, 4, 0.3, 1]
//!
//! [record]
//! one_frequencies = false
//! step_depth = 7
//! ```
//!
//! Relative paths in `[fitness]` resolve against the config file's directory.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::fitness::Fitness;
use crate::ga::{ClampingConfig, Crossover, GaConfig};
use crate::genome::Genome;
use crate::maxsat::Sat3Instance;
use crate::rng::{stream, trial_seed, Purpose};
use crate::staircase::{Descriptor, MultiStaircaseDescriptor, Staircase, StaircaseDescriptor};

#[derive(Clone, Debug, PartialEq)]
pub enum MaxSatSource {
    /// One instance shared by every trial.
    Instance(Sat3Instance),
    /// A fresh uniform random instance per trial, seeded from
    /// `instance_seed` and the trial index.
    Random {
        vars: usize,
        clauses: usize,
        instance_seed: u64,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub enum FitnessSpec {
    Staircase(StaircaseDescriptor),
    MultiStaircase(MultiStaircaseDescriptor),
    MaxSat(MaxSatSource),
}

/// A fitness function ready to run for one trial.
pub enum TrialFitness<'a> {
    Staircase(&'a StaircaseDescriptor),
    MultiStaircase(&'a MultiStaircaseDescriptor),
    MaxSat(std::borrow::Cow<'a, Sat3Instance>),
}

impl TrialFitness<'_> {
    pub fn staircase(&self) -> Option<&dyn Staircase> {
        match self {
            TrialFitness::Staircase(d) => Some(*d),
            TrialFitness::MultiStaircase(d) => Some(*d),
            TrialFitness::MaxSat(_) => None,
        }
    }
}

impl Fitness for TrialFitness<'_> {
    fn span(&self) -> usize {
        match self {
            TrialFitness::Staircase(d) => d.span(),
            TrialFitness::MultiStaircase(d) => d.span(),
            TrialFitness::MaxSat(i) => i.num_vars(),
        }
    }

    fn evaluate(&self, genome: &Genome, rng: &mut dyn rand::RngCore) -> Result<f64> {
        match self {
            TrialFitness::Staircase(d) => d.evaluate(genome, rng),
            TrialFitness::MultiStaircase(d) => d.evaluate(genome, rng),
            TrialFitness::MaxSat(i) => i.evaluate(genome, rng),
        }
    }
}

impl FitnessSpec {
    pub fn span(&self) -> usize {
        match self {
            FitnessSpec::Staircase(d) => d.span(),
            FitnessSpec::MultiStaircase(d) => d.span(),
            FitnessSpec::MaxSat(MaxSatSource::Instance(i)) => i.num_vars(),
            FitnessSpec::MaxSat(MaxSatSource::Random { vars, .. }) => *vars,
        }
    }

    pub fn for_trial(&self, trial: usize) -> Result<TrialFitness<'_>> {
        Ok(match self {
            FitnessSpec::Staircase(d) => TrialFitness::Staircase(d),
            FitnessSpec::MultiStaircase(d) => TrialFitness::MultiStaircase(d),
            FitnessSpec::MaxSat(MaxSatSource::Instance(i)) => TrialFitness::MaxSat(std::borrow::Cow::Borrowed(i)),
            FitnessSpec::MaxSat(MaxSatSource::Random {
                vars,
                clauses,
                instance_seed,
            }) => {
                let mut rng = stream(trial_seed(*instance_seed, trial as u64), Purpose::Instance);
                TrialFitness::MaxSat(std::borrow::Cow::Owned(Sat3Instance::generate(*vars, *clauses, &mut rng)?))
            }
        })
    }

    fn canonical_text(&self) -> String {
        match self {
            FitnessSpec::Staircase(d) => Descriptor::Staircase(d.clone()).to_text(),
            FitnessSpec::MultiStaircase(d) => Descriptor::Multi(d.clone()).to_text(),
            FitnessSpec::MaxSat(MaxSatSource::Instance(i)) => i.to_dimacs(),
            FitnessSpec::MaxSat(MaxSatSource::Random {
                vars,
                clauses,
                instance_seed,
            }) => format!("maxsat random vars={vars} clauses={clauses} instance_seed={instance_seed}\n"),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RecordOptions {
    /// Record the one-frequency of every locus in every generation.
    pub one_frequencies: bool,
    /// Record stage and step frequencies for stages `1..=step_depth` of every
    /// ladder. Ignored for MAX-SAT.
    pub step_depth: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub fitness: FitnessSpec,
    /// `ga.seed` is the master seed; trial `t` runs with `trial_seed(ga.seed, t)`.
    pub ga: GaConfig,
    pub trials: usize,
    pub record: RecordOptions,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        self.ga.validate()?;
        if self.trials == 0 {
            return Err(Error::InvalidConfig("trials must be at least 1".into()));
        }
        if self.fitness.span() == 0 {
            return Err(Error::InvalidConfig("fitness span must be positive".into()));
        }
        if let FitnessSpec::MaxSat(MaxSatSource::Random { vars, .. }) = &self.fitness {
            if *vars < 3 {
                return Err(Error::InvalidConfig("a 3-SAT instance needs at least 3 variables".into()));
            }
        }
        Ok(())
    }

    /// SHA-256 of a canonical rendering of the whole configuration.
    pub fn digest(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update(self.fitness.canonical_text());
        hasher.update(toml::to_string(&self.ga).expect("GaConfig serializes"));
        hasher.update(format!("trials={}\n", self.trials));
        hasher.update(toml::to_string(&self.record).expect("RecordOptions serializes"));
        hex::encode(hasher.finalize())
    }

    pub fn from_toml_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let base = path.parent().unwrap_or(Path::new("."));
        ExperimentConfig::from_toml_str(&text, base)
    }

    pub fn from_toml_str(text: &str, base_dir: &Path) -> Result<Self> {
        let file: ConfigFile = toml::from_str(text).map_err(|e| Error::InvalidConfig(e.to_string()))?;
        file.into_config(base_dir)
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    #[serde(default)]
    experiment: ExperimentSection,
    #[serde(default)]
    ga: GaSection,
    clamping: Option<ClampingConfig>,
    fitness: FitnessSection,
    #[serde(default)]
    record: RecordOptions,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct ExperimentSection {
    trials: usize,
    seed: u64,
}

impl Default for ExperimentSection {
    fn default() -> Self {
        ExperimentSection { trials: 1, seed: 0 }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct GaSection {
    population_size: Option<usize>,
    mutation_rate: Option<f64>,
    crossover: Option<Crossover>,
    crossover_probability: Option<f64>,
    generations: Option<u32>,
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "snake_case")]
enum FitnessKind {
    Staircase,
    MultiStaircase,
    Maxsat,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct FitnessSection {
    kind: FitnessKind,
    basic: Option<(usize, usize, f64, f64)>,
    basic_multi: Option<(usize, usize, usize, f64, f64)>,
    descriptor: Option<PathBuf>,
    dimacs: Option<PathBuf>,
    vars: Option<usize>,
    clauses: Option<usize>,
    instance_seed: Option<u64>,
}

impl ConfigFile {
    fn into_config(self, base: &Path) -> Result<ExperimentConfig> {
        let f = self.fitness;
        let resolve = |p: &PathBuf| if p.is_absolute() { p.clone() } else { base.join(p) };
        let fitness = match f.kind {
            FitnessKind::Staircase => match (f.basic, &f.descriptor) {
                (Some((h, o, d, s)), None) => FitnessSpec::Staircase(StaircaseDescriptor::basic(h, o, d, s)?),
                (None, Some(p)) => match Descriptor::read(&resolve(p))? {
                    Descriptor::Staircase(d) => FitnessSpec::Staircase(d),
                    Descriptor::Multi(_) => {
                        return Err(Error::InvalidConfig(
                            "descriptor file holds a multi-staircase; use kind = \"multi_staircase\"".into(),
                        ))
                    }
                },
                _ => return Err(Error::InvalidConfig("staircase fitness needs exactly one of `basic` or `descriptor`".into())),
            },
            FitnessKind::MultiStaircase => match (f.basic_multi, &f.descriptor) {
                (Some((c, h, o, d, s)), None) => {
                    FitnessSpec::MultiStaircase(MultiStaircaseDescriptor::basic(c, h, o, d, s)?)
                }
                (None, Some(p)) => match Descriptor::read(&resolve(p))? {
                    Descriptor::Multi(d) => FitnessSpec::MultiStaircase(d),
                    Descriptor::Staircase(d) => FitnessSpec::MultiStaircase(d.to_multi()),
                },
                _ => {
                    return Err(Error::InvalidConfig(
                        "multi-staircase fitness needs exactly one of `basic_multi` or `descriptor`".into(),
                    ))
                }
            },
            FitnessKind::Maxsat => match (&f.dimacs, f.vars, f.clauses) {
                (Some(p), None, None) => FitnessSpec::MaxSat(MaxSatSource::Instance(Sat3Instance::read_dimacs(&resolve(p))?)),
                (None, Some(vars), Some(clauses)) => FitnessSpec::MaxSat(MaxSatSource::Random {
                    vars,
                    clauses,
                    instance_seed: f.instance_seed.unwrap_or(0),
                }),
                _ => {
                    return Err(Error::InvalidConfig(
                        "maxsat fitness needs either `dimacs` or both `vars` and `clauses`".into(),
                    ))
                }
            },
        };

        let defaults = match fitness {
            FitnessSpec::MaxSat(_) => GaConfig::maxsat_defaults(),
            _ => GaConfig::staircase_defaults(),
        };
        let g = self.ga;
        let ga = GaConfig {
            population_size: g.population_size.unwrap_or(defaults.population_size),
            mutation_rate: g.mutation_rate.unwrap_or(defaults.mutation_rate),
            crossover: g.crossover.unwrap_or(defaults.crossover),
            crossover_probability: g.crossover_probability.unwrap_or(defaults.crossover_probability),
            generations: g.generations.unwrap_or(defaults.generations),
            seed: self.experiment.seed,
            clamping: self.clamping,
        };
        let config = ExperimentConfig {
            fitness,
            ga,
            trials: self.experiment.trials,
            record: self.record,
        };
        config.validate()?;
        Ok(config)
    }
}
