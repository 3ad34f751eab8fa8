//! Schema partitions, fitness signals and population frequency statistics.
//!
//! Loci are 1-based throughout, as in descriptors.

use crate::error::{Error, Result};
use crate::genome::{Genome, Population};
use crate::staircase::{Staircase, StaircaseDescriptor};

/// Largest number of free loci the brute-force oracle will enumerate.
pub const ENUMERATION_CAP_BITS: usize = 20;

/// A tuple of distinct defining loci. The tuple order matters for projection.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SchemaPartition(Vec<usize>);

impl SchemaPartition {
    pub fn new(loci: Vec<usize>) -> Result<Self> {
        let mut sorted = loci.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidConfig(format!(
                "schema partition loci must be distinct: {loci:?}"
            )));
        }
        if loci.contains(&0) {
            return Err(Error::IndexOutOfRange { index: 0, len: 0 });
        }
        Ok(SchemaPartition(loci))
    }

    pub fn loci(&self) -> &[usize] {
        &self.0
    }

    pub fn order(&self) -> usize {
        self.0.len()
    }

    pub fn is_orthogonal(&self, other: &SchemaPartition) -> bool {
        self.0.iter().all(|l| !other.0.contains(l))
    }

    pub fn concat(&self, other: &SchemaPartition) -> Result<SchemaPartition> {
        if !self.is_orthogonal(other) {
            return Err(Error::InvalidConfig(
                "only orthogonal schema partitions can be concatenated".into(),
            ));
        }
        Ok(SchemaPartition(self.0.iter().chain(&other.0).copied().collect()))
    }
}

/// One hyperplane of a partition: the genomes whose projection equals `pattern`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Schema {
    partition: SchemaPartition,
    pattern: Vec<u8>,
}

impl Schema {
    pub fn new(partition: SchemaPartition, pattern: Vec<u8>) -> Result<Self> {
        if pattern.len() != partition.order() {
            return Err(Error::LengthMismatch {
                expected: partition.order(),
                actual: pattern.len(),
            });
        }
        if pattern.iter().any(|&b| b > 1) {
            return Err(Error::InvalidConfig("schema pattern must be binary".into()));
        }
        Ok(Schema { partition, pattern })
    }

    /// The whole genome space.
    pub fn everything() -> Self {
        Schema {
            partition: SchemaPartition(Vec::new()),
            pattern: Vec::new(),
        }
    }

    pub fn partition(&self) -> &SchemaPartition {
        &self.partition
    }

    pub fn pattern(&self) -> &[u8] {
        &self.pattern
    }

    pub fn concat(&self, other: &Schema) -> Result<Schema> {
        Ok(Schema {
            partition: self.partition.concat(&other.partition)?,
            pattern: self.pattern.iter().chain(&other.pattern).copied().collect(),
        })
    }

    pub fn contains(&self, g: &Genome) -> Result<bool> {
        Ok(project(g, &self.partition)? == self.pattern)
    }
}

/// Bits of `g` at the partition's loci, in tuple order.
pub fn project(g: &Genome, partition: &SchemaPartition) -> Result<Vec<u8>> {
    partition
        .loci()
        .iter()
        .map(|&l| {
            if l == 0 || l > g.len() {
                Err(Error::IndexOutOfRange {
                    index: l,
                    len: g.len(),
                })
            } else {
                Ok(g.get(l - 1) as u8)
            }
        })
        .collect()
}

/// Stage `i` (1-based) of ladder `ladder` (0-based).
pub fn stage_schema<S: Staircase + ?Sized>(d: &S, ladder: usize, i: usize) -> Result<Schema> {
    let l = d.ladders().get(ladder).ok_or(Error::IndexOutOfRange {
        index: ladder + 1,
        len: d.ladders().len(),
    })?;
    if i == 0 || i > d.height() {
        return Err(Error::IndexOutOfRange {
            index: i,
            len: d.height(),
        });
    }
    Schema::new(
        SchemaPartition(l.loci()[i - 1].clone()),
        l.values()[i - 1].clone(),
    )
}

/// Step `i`: the concatenation of stages `1..=i`.
pub fn step_schema<S: Staircase + ?Sized>(d: &S, ladder: usize, i: usize) -> Result<Schema> {
    let mut s = stage_schema(d, ladder, 1)?;
    for k in 2..=i {
        s = s.concat(&stage_schema(d, ladder, k)?)?;
    }
    Ok(s)
}

/// Exact fitness signal of `schema`: the mean noise-free fitness over every
/// genome in the schema, found by enumeration.
pub fn signal_bruteforce<S: Staircase + ?Sized>(d: &S, schema: &Schema) -> Result<f64> {
    let span = d.span();
    let fixed = schema.partition().loci();
    for &l in fixed {
        if l > span {
            return Err(Error::IndexOutOfRange { index: l, len: span });
        }
    }
    let free: Vec<usize> = (1..=span).filter(|l| !fixed.contains(l)).collect();
    if free.len() > ENUMERATION_CAP_BITS {
        return Err(Error::EnumerationCap {
            free_bits: free.len(),
            cap_bits: ENUMERATION_CAP_BITS,
        });
    }
    let mut g = Genome::zeros(span);
    for (&l, &b) in fixed.iter().zip(schema.pattern()) {
        g.set(l - 1, b == 1);
    }
    let count = 1u64 << free.len();
    let mut total = 0.0;
    for assignment in 0..count {
        for (k, &l) in free.iter().enumerate() {
            g.set(l - 1, (assignment >> k) & 1 == 1);
        }
        total += d.expected_fitness(&g)?;
    }
    Ok(total / count as f64)
}

/// `S(a | b) = S(ab) - S(b)` for schemata of orthogonal partitions.
pub fn conditional_signal_bruteforce<S: Staircase + ?Sized>(d: &S, a: &Schema, given: &Schema) -> Result<f64> {
    Ok(signal_bruteforce(d, &a.concat(given)?)? - signal_bruteforce(d, given)?)
}

/// Sum of the signals of every schema of partition `Γ1…Γi` except step `i`.
pub fn complement_signal_sum_bruteforce<S: Staircase + ?Sized>(d: &S, ladder: usize, i: usize) -> Result<f64> {
    let step = step_schema(d, ladder, i)?;
    let order = step.partition().order();
    if order > ENUMERATION_CAP_BITS {
        return Err(Error::EnumerationCap {
            free_bits: order,
            cap_bits: ENUMERATION_CAP_BITS,
        });
    }
    let mut total = 0.0;
    for bits in 0..(1u64 << order) {
        let pattern: Vec<u8> = (0..order).map(|k| ((bits >> k) & 1) as u8).collect();
        if pattern == step.pattern() {
            continue;
        }
        total += signal_bruteforce(d, &Schema::new(step.partition().clone(), pattern)?)?;
    }
    Ok(total)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Which {
    Step,
    Stage,
}

fn check_index(d: &StaircaseDescriptor, i: usize) -> Result<()> {
    if i == 0 || i > d.height() {
        return Err(Error::IndexOutOfRange {
            index: i,
            len: d.height(),
        });
    }
    Ok(())
}

/// Closed-form signals: step `i` has signal `i*delta`, stage `i` has
/// `delta / (2^o)^(i-1)`.
pub fn signal_analytic(d: &StaircaseDescriptor, which: Which, i: usize) -> Result<f64> {
    check_index(d, i)?;
    let delta = d.increment();
    Ok(match which {
        Which::Step => i as f64 * delta,
        Which::Stage => delta / 2f64.powi((d.order() * (i - 1)) as i32),
    })
}

pub fn snr_analytic(d: &StaircaseDescriptor, which: Which, i: usize) -> Result<f64> {
    let sigma = d.noise();
    if sigma == 0.0 {
        return Err(Error::InvalidConfig("signal-to-noise ratio needs sigma > 0".into()));
    }
    Ok(signal_analytic(d, which, i)? / sigma)
}

/// Conditional signal-to-noise ratio of stage `i` given step `i-1`: `delta / sigma`.
pub fn conditional_snr_analytic(d: &StaircaseDescriptor, i: usize) -> Result<f64> {
    check_index(d, i)?;
    if i < 2 {
        return Err(Error::IndexOutOfRange {
            index: i,
            len: d.height(),
        });
    }
    if d.noise() == 0.0 {
        return Err(Error::InvalidConfig("signal-to-noise ratio needs sigma > 0".into()));
    }
    Ok(d.increment() / d.noise())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StageStep {
    pub stage: f64,
    pub step: f64,
}

/// Per ladder, per stage `i`: the fraction of members in stage `i` and the
/// fraction in step `i`.
pub fn stage_step_frequencies<S: Staircase + ?Sized>(pop: &Population, d: &S) -> Result<Vec<Vec<StageStep>>> {
    if pop.span() != d.span() {
        return Err(Error::LengthMismatch {
            expected: d.span(),
            actual: pop.span(),
        });
    }
    let n = pop.size() as f64;
    Ok(d.ladders()
        .iter()
        .map(|ladder| {
            let h = ladder.height();
            let mut stage = vec![0usize; h];
            let mut step = vec![0usize; h];
            for g in pop.members() {
                let mut on_step = true;
                for i in 0..h {
                    let m = ladder.stage_matches(g, i);
                    stage[i] += m as usize;
                    on_step &= m;
                    step[i] += on_step as usize;
                }
            }
            stage
                .into_iter()
                .zip(step)
                .map(|(a, b)| StageStep {
                    stage: a as f64 / n,
                    step: b as f64 / n,
                })
                .collect()
        })
        .collect())
}

/// Fraction of members carrying a 1 at each locus.
pub fn one_frequencies(pop: &Population) -> Result<Vec<f64>> {
    let members = pop.members();
    if members.is_empty() {
        return Err(Error::EmptyInput("population has no members"));
    }
    let span = pop.span();
    let mut counts = vec![0u32; span];
    for g in members {
        for (w, &word) in g.words().iter().enumerate() {
            let mut bits = word;
            while bits != 0 {
                let t = bits.trailing_zeros() as usize;
                counts[w * 64 + t] += 1;
                bits &= bits - 1;
            }
        }
    }
    let n = members.len() as f64;
    Ok(counts.into_iter().map(|c| c as f64 / n).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ga::{init_population, GaConfig};
    use crate::rng::{stream, Purpose};

    fn g(s: &str) -> Genome {
        s.parse().unwrap()
    }

    fn part(l: &[usize]) -> SchemaPartition {
        SchemaPartition::new(l.to_vec()).unwrap()
    }

    #[test]
    fn projection() {
        assert_eq!(project(&g("1010"), &part(&[1, 3])).unwrap(), vec![1, 1]);
        let g16: Genome = "0110000000000010".parse().unwrap();
        assert_eq!(project(&g16, &part(&[2, 15, 3])).unwrap(), vec![1, 1, 1]);
        assert_eq!(project(&g16, &part(&[15, 1, 2])).unwrap(), vec![1, 0, 1]);
        assert_eq!(project(&g("0000"), &part(&[4, 2])).unwrap(), vec![0, 0]);
        assert!(project(&g("0000"), &part(&[5])).is_err());
    }

    #[test]
    fn partition_rules() {
        assert!(SchemaPartition::new(vec![1, 1]).is_err());
        assert!(part(&[1, 2]).is_orthogonal(&part(&[3])));
        assert!(part(&[1, 2]).concat(&part(&[2])).is_err());
        assert_eq!(part(&[2, 15]).concat(&part(&[3])).unwrap().loci(), &[2, 15, 3]);
        assert!(Schema::new(part(&[1]), vec![1, 0]).is_err());
    }

    #[test]
    fn bruteforce_small_cases() {
        let d = StaircaseDescriptor::basic(2, 1, 1.0, 0.0).unwrap();
        let step1 = Schema::new(part(&[1]), vec![1]).unwrap();
        assert_eq!(signal_bruteforce(&d, &step1).unwrap(), 1.0);
        let stage2 = Schema::new(part(&[2]), vec![1]).unwrap();
        assert_eq!(signal_bruteforce(&d, &stage2).unwrap(), 0.5);
        let d1 = StaircaseDescriptor::basic(1, 1, 1.0, 0.0).unwrap();
        assert_eq!(signal_bruteforce(&d1, &Schema::everything()).unwrap(), 0.0);
    }

    #[test]
    fn bruteforce_cap() {
        let d = StaircaseDescriptor::basic(7, 3, 1.0, 0.0).unwrap();
        assert!(matches!(
            signal_bruteforce(&d, &Schema::everything()),
            Err(Error::EnumerationCap { .. })
        ));
    }

    #[test]
    fn analytic_values() {
        let d = StaircaseDescriptor::basic(50, 4, 0.3, 1.0).unwrap();
        assert!((signal_analytic(&d, Which::Step, 7).unwrap() - 2.1).abs() < 1e-12);
        assert_eq!(signal_analytic(&d, Which::Stage, 3).unwrap(), 0.001171875);
        assert_eq!(signal_analytic(&d, Which::Stage, 1).unwrap(), signal_analytic(&d, Which::Step, 1).unwrap());
        assert!(signal_analytic(&d, Which::Step, 51).is_err());
        assert!(signal_analytic(&d, Which::Step, 0).is_err());
        assert!((snr_analytic(&d, Which::Step, 7).unwrap() - 2.1).abs() < 1e-12);
        assert!((conditional_snr_analytic(&d, 5).unwrap() - 0.3).abs() < 1e-15);
        let quiet = StaircaseDescriptor::basic(3, 2, 1.0, 0.0).unwrap();
        assert!(snr_analytic(&quiet, Which::Stage, 1).is_err());
    }

    #[test]
    fn stage_step_counts() {
        let d = StaircaseDescriptor::basic(2, 2, 1.0, 0.0).unwrap();
        let pop = Population::new(vec![g("1111"), g("1100")], 0).unwrap();
        let f = &stage_step_frequencies(&pop, &d).unwrap()[0];
        assert_eq!(f[0], StageStep { stage: 1.0, step: 1.0 });
        assert_eq!(f[1], StageStep { stage: 0.5, step: 0.5 });

        let ones = Population::new(vec![Genome::ones(4); 3], 0).unwrap();
        let zeros = Population::new(vec![Genome::zeros(4); 3], 0).unwrap();
        for s in &stage_step_frequencies(&ones, &d).unwrap()[0] {
            assert_eq!(*s, StageStep { stage: 1.0, step: 1.0 });
        }
        for s in &stage_step_frequencies(&zeros, &d).unwrap()[0] {
            assert_eq!(*s, StageStep { stage: 0.0, step: 0.0 });
        }
    }

    #[test]
    fn one_frequency_basics() {
        let ones = Population::new(vec![Genome::ones(70); 3], 0).unwrap();
        assert!(one_frequencies(&ones).unwrap().iter().all(|&f| f == 1.0));
        let mixed = Population::new(vec![g("10"), g("01")], 0).unwrap();
        assert_eq!(one_frequencies(&mixed).unwrap(), vec![0.5, 0.5]);
    }

    #[test]
    fn random_init_frequencies_concentrate() {
        // sd of a locus frequency at N = 500 is 0.0224, so 0.07 is > 3 sd.
        let cfg = GaConfig::staircase_defaults();
        let mut within = 0;
        let mut total = 0;
        for seed in 0..20 {
            let pop = init_population(&cfg, 100, &mut stream(seed, Purpose::Init)).unwrap();
            for f in one_frequencies(&pop).unwrap() {
                total += 1;
                within += ((f - 0.5).abs() <= 0.07) as usize;
            }
        }
        assert!(within as f64 / total as f64 >= 0.99);
    }
}
