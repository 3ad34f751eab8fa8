use std::collections::HashSet;

use rand::{Rng, RngCore};
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::fitness::Fitness;
use crate::genome::Genome;
use crate::staircase::ladder::Ladder;

/// Shared read access to staircase and multi-staircase descriptors.
pub trait Staircase: Fitness {
    fn height(&self) -> usize;
    fn order(&self) -> usize;
    fn increment(&self) -> f64;
    fn noise(&self) -> f64;
    fn ladders(&self) -> &[Ladder];

    /// Fitness with the Gaussian noise term removed, which is also the
    /// expected fitness of `g`.
    fn expected_fitness(&self, g: &Genome) -> Result<f64>;

    /// The basic form with the same `(c, h, o, delta, sigma)`.
    fn basic_form(&self) -> MultiStaircaseDescriptor {
        MultiStaircaseDescriptor::basic(
            self.ladders().len(),
            self.height(),
            self.order(),
            self.increment(),
            self.noise(),
        )
        .expect("parameters of a valid descriptor")
    }
}

#[derive(Clone, Debug, PartialEq)]
struct Params {
    height: usize,
    order: usize,
    delta: f64,
    sigma: f64,
    span: usize,
}

impl Params {
    fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidDescriptor(m));
        if self.height == 0 {
            return bad("height must be a positive integer".into());
        }
        if self.order == 0 || self.order > 62 {
            return bad(format!("order {} must be in 1..=62", self.order));
        }
        if self.span == 0 {
            return bad("span must be a positive integer".into());
        }
        if !(self.delta.is_finite() && self.delta > 0.0) {
            return bad(format!("increment {} must be positive", self.delta));
        }
        if !(self.sigma.is_finite() && self.sigma >= 0.0) {
            return bad(format!("noisiness {} must be non-negative", self.sigma));
        }
        Ok(())
    }

    fn penalty(&self) -> f64 {
        self.delta / (2f64.powi(self.order as i32) - 1.0)
    }

    fn draw_noise(&self, rng: &mut dyn RngCore) -> f64 {
        if self.sigma == 0.0 {
            0.0
        } else {
            let z: f64 = rng.sample(StandardNormal);
            self.sigma * z
        }
    }
}

/// One ladder's `(L, V)`: 1-based loci rows and 0/1 target rows.
pub type LadderSpec = (Vec<Vec<usize>>, Vec<Vec<u8>>);

fn validate_ladders(p: &Params, ladders: &[LadderSpec]) -> Result<()> {
    let bad = |m: String| Err(Error::InvalidDescriptor(m));
    let mut seen = HashSet::new();
    for (k, (loci, values)) in ladders.iter().enumerate() {
        let name = if ladders.len() == 1 {
            String::new()
        } else {
            format!("{}", k + 1)
        };
        if loci.len() != p.height || values.len() != p.height {
            return bad(format!("L{name} and V{name} must have h = {} rows", p.height));
        }
        for (i, (row, bits)) in loci.iter().zip(values).enumerate() {
            if row.len() != p.order || bits.len() != p.order {
                return bad(format!(
                    "row {} of L{name}/V{name} must have o = {} columns",
                    i + 1,
                    p.order
                ));
            }
            for &locus in row {
                if locus == 0 || locus > p.span {
                    return bad(format!(
                        "L{name} element {locus} is not in [1, {}]",
                        p.span
                    ));
                }
                if !seen.insert(locus) {
                    return bad(format!(
                        "elements of L must be distinct integers; {locus} repeats"
                    ));
                }
            }
            if row.windows(2).any(|w| w[0] >= w[1]) {
                return bad(format!(
                    "row {} of L{name} is not sorted in ascending order: {row:?}",
                    i + 1
                ));
            }
            if let Some(b) = bits.iter().find(|&&b| b > 1) {
                return bad(format!("V{name} entries must be binary digits, found {b}"));
            }
        }
    }
    Ok(())
}

fn basic_ladder(offset: usize, h: usize, o: usize) -> (Vec<Vec<usize>>, Vec<Vec<u8>>) {
    let loci = (0..h)
        .map(|i| (1..=o).map(|j| offset + o * i + j).collect())
        .collect();
    (loci, vec![vec![1; o]; h])
}

/// A staircase function `(h, o, delta, sigma, span, L, V)`.
#[derive(Clone, Debug, PartialEq)]
pub struct StaircaseDescriptor {
    params: Params,
    ladder: [Ladder; 1],
}

impl StaircaseDescriptor {
    pub fn new(
        height: usize,
        order: usize,
        delta: f64,
        sigma: f64,
        span: usize,
        loci: Vec<Vec<usize>>,
        values: Vec<Vec<u8>>,
    ) -> Result<Self> {
        let params = Params {
            height,
            order,
            delta,
            sigma,
            span,
        };
        params.validate()?;
        let ladders = [(loci, values)];
        validate_ladders(&params, &ladders)?;
        let [(loci, values)] = ladders;
        Ok(StaircaseDescriptor {
            params,
            ladder: [Ladder::new(loci, values)],
        })
    }

    /// `span = h*o`, `L` holds `1..=h*o` row-wise, `V` is all ones.
    pub fn basic(height: usize, order: usize, delta: f64, sigma: f64) -> Result<Self> {
        let (loci, values) = basic_ladder(0, height, order);
        StaircaseDescriptor::new(height, order, delta, sigma, height * order, loci, values)
    }

    pub fn span(&self) -> usize {
        self.params.span
    }

    pub fn loci(&self) -> &[Vec<usize>] {
        self.ladder[0].loci()
    }

    pub fn values(&self) -> &[Vec<u8>] {
        self.ladder[0].values()
    }

    pub fn ladder(&self) -> &Ladder {
        &self.ladder[0]
    }

    pub fn is_basic(&self) -> bool {
        self.params.span == self.params.height * self.params.order
            && *self == StaircaseDescriptor::basic(self.params.height, self.params.order, self.params.delta, self.params.sigma).unwrap()
    }

    /// Same function with a different noisiness.
    pub fn with_sigma(&self, sigma: f64) -> Result<Self> {
        StaircaseDescriptor::new(
            self.params.height,
            self.params.order,
            self.params.delta,
            sigma,
            self.params.span,
            self.loci().to_vec(),
            self.values().to_vec(),
        )
    }

    /// Same function with a different increment.
    pub fn with_delta(&self, delta: f64) -> Result<Self> {
        StaircaseDescriptor::new(
            self.params.height,
            self.params.order,
            delta,
            self.params.sigma,
            self.params.span,
            self.loci().to_vec(),
            self.values().to_vec(),
        )
    }

    /// Views this staircase as a multi-staircase of cardinality one.
    pub fn to_multi(&self) -> MultiStaircaseDescriptor {
        MultiStaircaseDescriptor {
            params: self.params.clone(),
            ladders: vec![self.ladder[0].clone()],
        }
    }
}

impl Fitness for StaircaseDescriptor {
    fn span(&self) -> usize {
        self.params.span
    }

    fn evaluate(&self, g: &Genome, rng: &mut dyn RngCore) -> Result<f64> {
        g.check_len(self.params.span)?;
        let y = self.params.draw_noise(rng);
        Ok(self.ladder[0].climb(g, y, self.params.delta, self.params.penalty()))
    }
}

impl Staircase for StaircaseDescriptor {
    fn height(&self) -> usize {
        self.params.height
    }

    fn order(&self) -> usize {
        self.params.order
    }

    fn increment(&self) -> f64 {
        self.params.delta
    }

    fn noise(&self) -> f64 {
        self.params.sigma
    }

    fn ladders(&self) -> &[Ladder] {
        &self.ladder
    }

    fn expected_fitness(&self, g: &Genome) -> Result<f64> {
        g.check_len(self.params.span)?;
        Ok(self.ladder[0].climb(g, 0.0, self.params.delta, self.params.penalty()))
    }
}

/// A multi-staircase function `(c, h, o, delta, sigma, span, L1..Lc, V1..Vc)`.
#[derive(Clone, Debug, PartialEq)]
pub struct MultiStaircaseDescriptor {
    params: Params,
    ladders: Vec<Ladder>,
}

impl MultiStaircaseDescriptor {
    pub fn new(
        height: usize,
        order: usize,
        delta: f64,
        sigma: f64,
        span: usize,
        ladders: Vec<LadderSpec>,
    ) -> Result<Self> {
        let params = Params {
            height,
            order,
            delta,
            sigma,
            span,
        };
        params.validate()?;
        if ladders.is_empty() {
            return Err(Error::InvalidDescriptor(
                "cardinality must be a positive integer".into(),
            ));
        }
        validate_ladders(&params, &ladders)?;
        Ok(MultiStaircaseDescriptor {
            params,
            ladders: ladders
                .into_iter()
                .map(|(l, v)| Ladder::new(l, v))
                .collect(),
        })
    }

    /// `span = c*h*o`, `L(k)` holds `h*o*(k-1)+1 ..= h*o*k` row-wise, `V(k)` all ones.
    pub fn basic(cardinality: usize, height: usize, order: usize, delta: f64, sigma: f64) -> Result<Self> {
        let block = height * order;
        let ladders = (0..cardinality)
            .map(|k| basic_ladder(k * block, height, order))
            .collect();
        MultiStaircaseDescriptor::new(height, order, delta, sigma, cardinality * block, ladders)
    }

    pub fn cardinality(&self) -> usize {
        self.ladders.len()
    }

    pub fn span(&self) -> usize {
        self.params.span
    }

    pub fn is_basic(&self) -> bool {
        let p = &self.params;
        *self == MultiStaircaseDescriptor::basic(self.cardinality(), p.height, p.order, p.delta, p.sigma).unwrap()
    }
}

impl Fitness for MultiStaircaseDescriptor {
    fn span(&self) -> usize {
        self.params.span
    }

    fn evaluate(&self, g: &Genome, rng: &mut dyn RngCore) -> Result<f64> {
        g.check_len(self.params.span)?;
        let penalty = self.params.penalty();
        let y = self.params.draw_noise(rng);
        Ok(self
            .ladders
            .iter()
            .fold(y, |y, ladder| ladder.climb(g, y, self.params.delta, penalty)))
    }
}

impl Staircase for MultiStaircaseDescriptor {
    fn height(&self) -> usize {
        self.params.height
    }

    fn order(&self) -> usize {
        self.params.order
    }

    fn increment(&self) -> f64 {
        self.params.delta
    }

    fn noise(&self) -> f64 {
        self.params.sigma
    }

    fn ladders(&self) -> &[Ladder] {
        &self.ladders
    }

    fn expected_fitness(&self, g: &Genome) -> Result<f64> {
        g.check_len(self.params.span)?;
        let penalty = self.params.penalty();
        Ok(self
            .ladders
            .iter()
            .fold(0.0, |y, ladder| ladder.climb(g, y, self.params.delta, penalty)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream, Purpose};

    fn g(s: &str) -> Genome {
        s.parse().unwrap()
    }

    fn eval0<F: Fitness>(f: &F, s: &str) -> f64 {
        f.evaluate(&g(s), &mut stream(0, Purpose::Noise)).unwrap()
    }

    #[test]
    fn basic_layout() {
        let d = StaircaseDescriptor::basic(2, 2, 1.0, 0.0).unwrap();
        assert_eq!(d.span(), 4);
        assert_eq!(d.loci(), &[vec![1, 2], vec![3, 4]]);
        assert_eq!(d.values(), &[vec![1, 1], vec![1, 1]]);
        let d = StaircaseDescriptor::basic(1, 1, 1.0, 0.0).unwrap();
        assert_eq!(d.span(), 1);
        assert_eq!(d.loci(), &[vec![1]]);
        assert_eq!(d.values(), &[vec![1]]);
        assert!(d.is_basic());
    }

    #[test]
    fn basic_multi_layout() {
        let d = MultiStaircaseDescriptor::basic(2, 1, 2, 1.0, 0.0).unwrap();
        assert_eq!(d.ladders()[0].loci(), &[vec![1, 2]]);
        assert_eq!(d.ladders()[1].loci(), &[vec![3, 4]]);
        assert_eq!(d.span(), 4);
    }

    #[test]
    fn paper_f1_descriptor_validates() {
        let d = StaircaseDescriptor::basic(50, 4, 0.3, 1.0).unwrap();
        assert_eq!(d.span(), 200);
    }

    #[test]
    fn rejects_repeated_locus() {
        let err = StaircaseDescriptor::new(2, 2, 1.0, 0.0, 4, vec![vec![1, 2], vec![2, 3]], vec![vec![1, 1]; 2])
            .unwrap_err();
        assert!(err.to_string().contains("distinct integers"), "{err}");
    }

    #[test]
    fn rejects_unsorted_row() {
        let err = StaircaseDescriptor::new(1, 4, 1.0, 0.0, 4, vec![vec![3, 1, 2, 4]], vec![vec![1; 4]])
            .unwrap_err();
        assert!(err.to_string().contains("ascending order"), "{err}");
    }

    #[test]
    fn rejects_out_of_range_and_non_binary() {
        assert!(StaircaseDescriptor::new(1, 2, 1.0, 0.0, 4, vec![vec![1, 5]], vec![vec![1, 1]]).is_err());
        assert!(StaircaseDescriptor::new(1, 2, 1.0, 0.0, 4, vec![vec![0, 1]], vec![vec![1, 1]]).is_err());
        assert!(StaircaseDescriptor::new(1, 2, 1.0, 0.0, 4, vec![vec![1, 2]], vec![vec![1, 2]]).is_err());
        // h*o > span forces a repeat or an out-of-range locus
        assert!(StaircaseDescriptor::new(3, 2, 1.0, 0.0, 5, vec![vec![1, 2], vec![3, 4], vec![5, 6]], vec![vec![1, 1]; 3]).is_err());
    }

    #[test]
    fn multi_rejects_cross_ladder_repeat() {
        let err = MultiStaircaseDescriptor::new(
            1,
            1,
            1.0,
            0.0,
            3,
            vec![(vec![vec![1]], vec![vec![1]]), (vec![vec![1]], vec![vec![0]])],
        )
        .unwrap_err();
        assert!(err.to_string().contains("distinct"));
    }

    #[test]
    fn staircase_trace_values() {
        let d = StaircaseDescriptor::basic(2, 2, 1.0, 0.0).unwrap();
        assert_eq!(eval0(&d, "1111"), 2.0);
        assert!((eval0(&d, "1100") - 2.0 / 3.0).abs() < 1e-15);
        assert!((eval0(&d, "0011") + 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn multi_trace_value() {
        let d = MultiStaircaseDescriptor::basic(2, 1, 1, 1.0, 0.0).unwrap();
        assert_eq!(eval0(&d, "10"), 0.0);
        assert_eq!(eval0(&d, "11"), 2.0);
        assert_eq!(eval0(&d, "00"), -2.0);
    }

    #[test]
    fn length_mismatch() {
        let d = StaircaseDescriptor::basic(2, 2, 1.0, 0.0).unwrap();
        assert!(d.evaluate(&g("111"), &mut stream(0, Purpose::Noise)).is_err());
    }

    #[test]
    fn noise_moments() {
        let d = StaircaseDescriptor::basic(2, 2, 1.0, 2.0).unwrap();
        let genome = g("1100");
        let mut rng = stream(4, Purpose::Noise);
        let n = 200_000;
        let xs: Vec<f64> = (0..n).map(|_| d.evaluate(&genome, &mut rng).unwrap()).collect();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        assert!((mean - 2.0 / 3.0).abs() < 0.02, "{mean}");
        assert!((var - 4.0).abs() < 0.08, "{var}");
    }

    #[test]
    fn monotone_steps() {
        let (h, o) = (5, 3);
        let d = StaircaseDescriptor::basic(h, o, 0.7, 0.0).unwrap();
        let mut prev = f64::NEG_INFINITY;
        for i in 0..=h {
            // matches steps 1..=i and fails stage i + 1 (if any)
            let s: String = (0..h * o).map(|k| if k < i * o { '1' } else { '0' }).collect();
            let v = d.expected_fitness(&g(&s)).unwrap();
            assert!(v > prev);
            prev = v;
        }
    }

    #[test]
    fn cardinality_one_matches_staircase() {
        let d = StaircaseDescriptor::new(2, 2, 1.5, 0.0, 6, vec![vec![2, 5], vec![1, 6]], vec![vec![1, 0], vec![0, 1]]).unwrap();
        let m = d.to_multi();
        for v in 0..64u64 {
            let genome = Genome::from_u64_msb_first(v, 6);
            assert_eq!(d.expected_fitness(&genome).unwrap(), m.expected_fitness(&genome).unwrap());
        }
    }
}
