//! Generation loop of the simple GA.

use rand::seq::SliceRandom;
use rand::{Rng, RngCore};

use crate::error::{Error, Result};
use crate::fitness::Fitness;
use crate::ga::clamp::ClampState;
use crate::ga::config::{Crossover, GaConfig};
use crate::ga::operators::{mutate_in_place, sigma_scale, sus_select, uniform_crossover};
use crate::genome::{Genome, Population};
use crate::rng::RunStreams;
use crate::schema::one_frequencies;

/// Metrics of one generation, measured on the population before selection.
#[derive(Clone, Debug, PartialEq)]
pub struct GenerationRecord {
    pub generation: u64,
    pub avg_fitness: f64,
    pub best_fitness: f64,
    /// Loci exempt from mutation while producing this generation's offspring.
    pub unmutated_loci: usize,
    pub one_frequencies: Option<Vec<f64>>,
    pub selection_fallback: bool,
}

/// `population_size` genomes of length `span` with independent fair bits.
pub fn init_population<R: RngCore + ?Sized>(config: &GaConfig, span: usize, rng: &mut R) -> Result<Population> {
    if span == 0 {
        return Err(Error::InvalidConfig("span must be positive".into()));
    }
    if config.population_size == 0 {
        return Err(Error::InvalidConfig("population_size must be positive".into()));
    }
    let members = (0..config.population_size)
        .map(|_| Genome::random(span, rng))
        .collect();
    Population::new(members, 0)
}

/// Runs one generation: evaluate, record, update clamping, sigma-scale,
/// SUS-select, pair shuffled parents for crossover, mutate, replace.
pub fn step_generation<F: Fitness + ?Sized>(
    pop: &Population,
    fitness: &F,
    config: &GaConfig,
    state: &ClampState,
    streams: &mut RunStreams,
    record_one_frequencies: bool,
) -> Result<(Population, ClampState, GenerationRecord)> {
    if fitness.span() != pop.span() {
        return Err(Error::LengthMismatch {
            expected: fitness.span(),
            actual: pop.span(),
        });
    }
    let n = pop.size();

    let raw = pop
        .members()
        .iter()
        .map(|g| fitness.evaluate(g, &mut streams.noise))
        .collect::<Result<Vec<f64>>>()?;
    let avg_fitness = raw.iter().sum::<f64>() / n as f64;
    let best_fitness = raw.iter().copied().fold(f64::NEG_INFINITY, f64::max);

    let freqs = if config.clamping.is_some() || record_one_frequencies {
        Some(one_frequencies(pop)?)
    } else {
        None
    };
    let state = match (&config.clamping, &freqs) {
        (Some(clamping), Some(f)) => state.update(f, clamping)?,
        _ => state.clone(),
    };
    let mask = config.clamping.is_some().then(|| state.mask());
    let unmutated_loci = if mask.is_some() { state.masked_count() } else { 0 };

    let adjusted = sigma_scale(&raw)?;
    let selection = sus_select(&adjusted, n, &mut streams.selection)?;
    let mut parents = selection.indices;
    parents.shuffle(&mut streams.selection);

    let members = pop.members();
    let mut children = Vec::with_capacity(n);
    for pair in parents.chunks(2) {
        match *pair {
            [a, b] => {
                let (pa, pb) = (&members[a], &members[b]);
                let cross = config.crossover == Crossover::Uniform
                    && (config.crossover_probability >= 1.0
                        || streams.crossover.random::<f64>() < config.crossover_probability);
                if cross {
                    let (c1, c2) = uniform_crossover(pa, pb, &mut streams.crossover)?;
                    children.push(c1);
                    children.push(c2);
                } else {
                    children.push(pa.clone());
                    children.push(pb.clone());
                }
            }
            [a] => children.push(members[a].clone()),
            _ => unreachable!(),
        }
    }
    for child in &mut children {
        mutate_in_place(child, config.mutation_rate, mask.as_deref(), &mut streams.mutation)?;
    }

    let record = GenerationRecord {
        generation: pop.generation(),
        avg_fitness,
        best_fitness,
        unmutated_loci,
        one_frequencies: if record_one_frequencies { freqs } else { None },
        selection_fallback: selection.uniform_fallback,
    };
    let next = Population::new(children, pop.generation() + 1)?;
    Ok((next, state, record))
}

/// One seeded run of the GA on a fitness function.
pub struct GaRun<'f, F: Fitness + ?Sized> {
    config: GaConfig,
    fitness: &'f F,
    population: Population,
    clamp: ClampState,
    streams: RunStreams,
    record_one_frequencies: bool,
}

impl<'f, F: Fitness + ?Sized> GaRun<'f, F> {
    /// Seeds every stream from `config.seed`.
    pub fn new(config: GaConfig, fitness: &'f F) -> Result<Self> {
        config.validate()?;
        let mut streams = RunStreams::new(config.seed);
        let population = init_population(&config, fitness.span(), &mut streams.init)?;
        Ok(GaRun {
            clamp: ClampState::new(fitness.span()),
            config,
            fitness,
            population,
            streams,
            record_one_frequencies: false,
        })
    }

    /// Replaces the random initial population.
    pub fn with_population(mut self, population: Population) -> Result<Self> {
        if population.size() != self.config.population_size {
            return Err(Error::InvalidConfig(format!(
                "population has {} members, config expects {}",
                population.size(),
                self.config.population_size
            )));
        }
        population.members()[0].check_len(self.fitness.span())?;
        self.population = population;
        Ok(self)
    }

    pub fn record_one_frequencies(mut self, on: bool) -> Self {
        self.record_one_frequencies = on;
        self
    }

    pub fn population(&self) -> &Population {
        &self.population
    }

    pub fn clamp_state(&self) -> &ClampState {
        &self.clamp
    }

    pub fn config(&self) -> &GaConfig {
        &self.config
    }

    pub fn step(&mut self) -> Result<GenerationRecord> {
        let (pop, clamp, record) = step_generation(
            &self.population,
            self.fitness,
            &self.config,
            &self.clamp,
            &mut self.streams,
            self.record_one_frequencies,
        )?;
        self.population = pop;
        self.clamp = clamp;
        Ok(record)
    }

    /// Runs `config.generations` generations and returns every record.
    pub fn run(&mut self) -> Result<Vec<GenerationRecord>> {
        (0..self.config.generations).map(|_| self.step()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream, Purpose};
    use crate::staircase::StaircaseDescriptor;

    fn cfg(n: usize) -> GaConfig {
        GaConfig {
            population_size: n,
            generations: 10,
            seed: 17,
            ..GaConfig::staircase_defaults()
        }
    }

    #[test]
    fn init_is_seed_deterministic() {
        let c = cfg(4);
        let a = init_population(&c, 8, &mut stream(1, Purpose::Init)).unwrap();
        let b = init_population(&c, 8, &mut stream(1, Purpose::Init)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.size(), 4);
        assert_eq!(a.span(), 8);
        assert_eq!(a.generation(), 0);
    }

    #[test]
    fn init_rejects_degenerate() {
        assert!(init_population(&cfg(0), 8, &mut stream(1, Purpose::Init)).is_err());
        assert!(init_population(&cfg(4), 0, &mut stream(1, Purpose::Init)).is_err());
    }

    #[test]
    fn init_is_balanced() {
        let pop = init_population(&cfg(500), 200, &mut stream(3, Purpose::Init)).unwrap();
        let f = one_frequencies(&pop).unwrap();
        let mean = f.iter().sum::<f64>() / f.len() as f64;
        assert!((mean - 0.5).abs() < 0.1);
    }

    #[test]
    fn no_variation_keeps_identical_population() {
        let f = StaircaseDescriptor::basic(2, 2, 1.0, 0.0).unwrap();
        let g: Genome = "1100".parse().unwrap();
        let pop = Population::new(vec![g.clone(), g.clone()], 0).unwrap();
        let c = GaConfig {
            mutation_rate: 0.0,
            crossover: Crossover::None,
            ..cfg(2)
        };
        let mut run = GaRun::new(c, &f).unwrap().with_population(pop.clone()).unwrap();
        for _ in 0..5 {
            run.step().unwrap();
        }
        assert_eq!(run.population().members(), pop.members());
        assert_eq!(run.population().generation(), 5);
    }

    #[test]
    fn all_ones_basic_staircase_scores_h_delta() {
        let f = StaircaseDescriptor::basic(2, 2, 1.0, 0.0).unwrap();
        let pop = Population::new(vec![Genome::ones(4); 6], 0).unwrap();
        let c = GaConfig {
            mutation_rate: 0.0,
            ..cfg(6)
        };
        let mut run = GaRun::new(c, &f).unwrap().with_population(pop).unwrap();
        for rec in run.run().unwrap() {
            assert_eq!(rec.avg_fitness, 2.0);
            assert_eq!(rec.best_fitness, 2.0);
        }
    }

    #[test]
    fn runs_are_deterministic() {
        let f = StaircaseDescriptor::basic(5, 2, 0.5, 1.0).unwrap();
        let c = GaConfig {
            clamping: Some(crate::ga::ClampingConfig::new(0.05, 0.2, 3).unwrap()),
            ..cfg(31)
        };
        let a = GaRun::new(c.clone(), &f).unwrap().record_one_frequencies(true).run().unwrap();
        let b = GaRun::new(c, &f).unwrap().record_one_frequencies(true).run().unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn odd_population_size_is_preserved() {
        let f = StaircaseDescriptor::basic(3, 3, 1.0, 1.0).unwrap();
        let mut run = GaRun::new(cfg(7), &f).unwrap();
        run.run().unwrap();
        assert_eq!(run.population().size(), 7);
        assert_eq!(run.population().span(), 9);
    }

    #[test]
    fn span_mismatch_is_error() {
        let f = StaircaseDescriptor::basic(2, 2, 1.0, 0.0).unwrap();
        let pop = Population::new(vec![Genome::ones(5); 2], 0).unwrap();
        let mut streams = RunStreams::new(0);
        let res = step_generation(&pop, &f, &cfg(2), &ClampState::new(5), &mut streams, false);
        assert!(matches!(res, Err(Error::LengthMismatch { .. })));
    }
}
