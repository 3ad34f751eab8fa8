use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Crossover {
    Uniform,
    None,
}

impl std::str::FromStr for Crossover {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform" => Ok(Crossover::Uniform),
            "none" => Ok(Crossover::None),
            other => Err(Error::InvalidConfig(format!(
                "unknown crossover {other:?} (expected \"uniform\" or \"none\")"
            ))),
        }
    }
}

/// Parameters of the clamping mechanism.
///
/// A locus is flagged when its one-frequency leaves `[flag_freq, 1 - flag_freq]`,
/// stays flagged while it remains outside `[unflag_freq, 1 - unflag_freq]`, and
/// is exempt from mutation once it has been flagged for `flag_period`
/// consecutive generations.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClampingConfig {
    pub flag_freq: f64,
    pub unflag_freq: f64,
    pub flag_period: u32,
}

impl ClampingConfig {
    pub fn new(flag_freq: f64, unflag_freq: f64, flag_period: u32) -> Result<Self> {
        let cfg = ClampingConfig {
            flag_freq,
            unflag_freq,
            flag_period,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// `flagFreq = 0.01`, `unflagFreq = 0.1`, `flagPeriod = 200`.
    pub fn standard() -> Self {
        ClampingConfig {
            flag_freq: 0.01,
            unflag_freq: 0.1,
            flag_period: 200,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=0.5).contains(&self.flag_freq) {
            return Err(Error::InvalidConfig(format!(
                "flag_freq {} not in [0, 0.5]",
                self.flag_freq
            )));
        }
        if !(self.flag_freq..=0.5).contains(&self.unflag_freq) {
            return Err(Error::InvalidConfig(format!(
                "unflag_freq {} not in [flag_freq, 0.5]",
                self.unflag_freq
            )));
        }
        if self.flag_period == 0 {
            return Err(Error::InvalidConfig("flag_period must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaConfig {
    pub population_size: usize,
    pub mutation_rate: f64,
    pub crossover: Crossover,
    pub crossover_probability: f64,
    pub generations: u32,
    pub seed: u64,
    #[serde(default)]
    pub clamping: Option<ClampingConfig>,
}

impl GaConfig {
    /// Population 500, mutation 0.003 per bit, uniform crossover with probability 1.
    pub fn staircase_defaults() -> Self {
        GaConfig {
            population_size: 500,
            mutation_rate: 0.003,
            crossover: Crossover::Uniform,
            crossover_probability: 1.0,
            generations: 2500,
            seed: 0,
            clamping: None,
        }
    }

    /// Same as the staircase defaults but with population 200 and 4000 generations.
    pub fn maxsat_defaults() -> Self {
        GaConfig {
            population_size: 200,
            generations: 4000,
            ..GaConfig::staircase_defaults()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.population_size == 0 {
            return Err(Error::InvalidConfig("population_size must be positive".into()));
        }
        if !(0.0..=1.0).contains(&self.mutation_rate) {
            return Err(Error::InvalidConfig(format!(
                "mutation_rate {} not in [0, 1]",
                self.mutation_rate
            )));
        }
        if !(0.0..=1.0).contains(&self.crossover_probability) {
            return Err(Error::InvalidConfig(format!(
                "crossover_probability {} not in [0, 1]",
                self.crossover_probability
            )));
        }
        if self.generations == 0 {
            return Err(Error::InvalidConfig("generations must be positive".into()));
        }
        if let Some(c) = &self.clamping {
            c.validate()?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        GaConfig::staircase_defaults().validate().unwrap();
        let m = GaConfig::maxsat_defaults();
        assert_eq!(m.population_size, 200);
        assert_eq!(m.mutation_rate, 0.003);
        m.validate().unwrap();
    }

    #[test]
    fn rejects_out_of_range() {
        let mut c = GaConfig::staircase_defaults();
        c.mutation_rate = 1.5;
        assert!(c.validate().is_err());
        let mut c = GaConfig::staircase_defaults();
        c.population_size = 0;
        assert!(c.validate().is_err());
        assert!(ClampingConfig::new(0.2, 0.1, 10).is_err());
        assert!(ClampingConfig::new(0.01, 0.6, 10).is_err());
        assert!(ClampingConfig::new(0.01, 0.1, 0).is_err());
        ClampingConfig::standard().validate().unwrap();
    }
}
