use rand::RngCore;

use crate::error::Result;
use crate::genome::Genome;

/// A (possibly stochastic) fitness function over bitstrings of a fixed span.
///
/// Stochastic functions draw fresh noise from `rng` on every call.
pub trait Fitness: Sync {
    fn span(&self) -> usize;

    fn evaluate(&self, genome: &Genome, rng: &mut dyn RngCore) -> Result<f64>;
}

impl<F: Fitness + ?Sized> Fitness for &F {
    fn span(&self) -> usize {
        (**self).span()
    }

    fn evaluate(&self, genome: &Genome, rng: &mut dyn RngCore) -> Result<f64> {
        (**self).evaluate(genome, rng)
    }
}
