//! Selection and variation operators of the simple GA.

use rand::{Rng, RngCore};
use rand_distr::{Distribution, Geometric};

use crate::error::{Error, Result};
use crate::genome::Genome;

/// Sigma scaling of raw fitness values.
///
/// Each value becomes `max(0, 1 + (f - mean) / sd)` where `sd` is the
/// population (divide-by-N) standard deviation; if `sd == 0` every value
/// becomes 1.
pub fn sigma_scale(raw: &[f64]) -> Result<Vec<f64>> {
    if raw.is_empty() {
        return Err(Error::EmptyInput("sigma_scale needs at least one fitness"));
    }
    let n = raw.len() as f64;
    let mean = raw.iter().sum::<f64>() / n;
    let var = raw.iter().map(|f| (f - mean) * (f - mean)).sum::<f64>() / n;
    let sd = var.sqrt();
    if sd == 0.0 || !sd.is_finite() {
        return Ok(vec![1.0; raw.len()]);
    }
    Ok(raw
        .iter()
        .map(|f| (1.0 + (f - mean) / sd).max(0.0))
        .collect())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Selection {
    pub indices: Vec<usize>,
    /// Set when every weight was zero and selection fell back to uniform.
    pub uniform_fallback: bool,
}

/// Stochastic universal sampling: one random offset in `[0, T/count)`,
/// then `count` pointers spaced `T/count` apart over the cumulative weights.
pub fn sus_select<R: RngCore + ?Sized>(weights: &[f64], count: usize, rng: &mut R) -> Result<Selection> {
    if weights.is_empty() {
        return Err(Error::EmptyInput("sus_select needs at least one weight"));
    }
    if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w >= 0.0)) {
        return Err(Error::InvalidConfig(format!(
            "selection weights must be finite and non-negative, got {w}"
        )));
    }
    let total: f64 = weights.iter().sum();
    if total <= 0.0 {
        let indices = (0..count).map(|_| rng.random_range(0..weights.len())).collect();
        return Ok(Selection {
            indices,
            uniform_fallback: true,
        });
    }

    let spacing = total / count as f64;
    let start = rng.random::<f64>() * spacing;
    let mut indices = Vec::with_capacity(count);
    let mut idx = 0;
    let mut cumulative = weights[0];
    for k in 0..count {
        let pointer = start + k as f64 * spacing;
        while pointer >= cumulative && idx + 1 < weights.len() {
            idx += 1;
            cumulative += weights[idx];
        }
        indices.push(idx);
    }
    Ok(Selection {
        indices,
        uniform_fallback: false,
    })
}

/// Uniform crossover: each locus independently swaps between the children
/// with probability 1/2. The children are complementary reassortments.
pub fn uniform_crossover<R: RngCore + ?Sized>(a: &Genome, b: &Genome, rng: &mut R) -> Result<(Genome, Genome)> {
    b.check_len(a.len())?;
    let (mut c1, mut c2) = (Vec::with_capacity(a.words().len()), Vec::with_capacity(a.words().len()));
    for (&wa, &wb) in a.words().iter().zip(b.words()) {
        let swap = rng.next_u64();
        c1.push((wa & !swap) | (wb & swap));
        c2.push((wb & !swap) | (wa & swap));
    }
    Ok((Genome::from_words(c1, a.len()), Genome::from_words(c2, a.len())))
}

/// Bit-flip mutation. Loci whose `mask` entry is `true` are never flipped.
pub fn mutate<R: RngCore + ?Sized>(
    genome: &Genome,
    rate: f64,
    mask: Option<&[bool]>,
    rng: &mut R,
) -> Result<Genome> {
    let mut out = genome.clone();
    mutate_in_place(&mut out, rate, mask, rng)?;
    Ok(out)
}

pub(crate) fn mutate_in_place<R: RngCore + ?Sized>(
    genome: &mut Genome,
    rate: f64,
    mask: Option<&[bool]>,
    rng: &mut R,
) -> Result<()> {
    if !(0.0..=1.0).contains(&rate) {
        return Err(Error::InvalidConfig(format!("mutation rate {rate} not in [0, 1]")));
    }
    if let Some(m) = mask {
        if m.len() != genome.len() {
            return Err(Error::LengthMismatch {
                expected: genome.len(),
                actual: m.len(),
            });
        }
    }
    if rate == 0.0 {
        return Ok(());
    }
    // Skip ahead by geometric gaps instead of drawing one uniform per locus.
    let gaps = Geometric::new(rate).expect("rate checked above");
    let len = genome.len() as u64;
    let mut pos = gaps.sample(rng);
    while pos < len {
        let i = pos as usize;
        if !mask.is_some_and(|m| m[i]) {
            genome.flip(i);
        }
        pos = pos.saturating_add(1).saturating_add(gaps.sample(rng));
    }
    Ok(())
}
