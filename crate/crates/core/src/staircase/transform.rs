//! Genome-space symmetry that carries any staircase onto its basic form.

use crate::genome::Genome;
use crate::staircase::descriptor::Staircase;

/// A locus permutation plus per-locus complement.
///
/// `source[k]` is the 1-based locus of the original genome that lands at
/// 1-based position `k + 1` of the transformed genome. Stage loci come first,
/// in the row-wise order of the basic form (ladder by ladder); the remaining
/// loci follow in ascending order. `complement[l - 1]` is set for every
/// original locus `l` whose target bit is 0.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BasicFrame {
    pub source: Vec<usize>,
    pub complement: Vec<bool>,
    /// Span of the basic form, `c*h*o`.
    pub basic_span: usize,
}

impl BasicFrame {
    pub fn is_identity(&self) -> bool {
        self.source.iter().enumerate().all(|(k, &s)| s == k + 1)
    }

    pub fn complemented_loci(&self) -> Vec<usize> {
        self.complement
            .iter()
            .enumerate()
            .filter_map(|(i, &c)| c.then_some(i + 1))
            .collect()
    }

    /// Full-length transformed genome.
    pub fn apply(&self, g: &Genome) -> Genome {
        Genome::from_bits(
            self.source
                .iter()
                .map(|&s| g.get(s - 1) ^ self.complement[s - 1]),
        )
    }

    /// Transformed genome truncated to the basic form's span.
    pub fn apply_basic(&self, g: &Genome) -> Genome {
        Genome::from_bits(
            self.source[..self.basic_span]
                .iter()
                .map(|&s| g.get(s - 1) ^ self.complement[s - 1]),
        )
    }
}

pub fn transform_to_basic_frame<S: Staircase + ?Sized>(descriptor: &S) -> BasicFrame {
    let span = descriptor.span();
    let mut complement = vec![false; span];
    let mut source = Vec::with_capacity(span);
    let mut used = vec![false; span];
    for ladder in descriptor.ladders() {
        for (row, bits) in ladder.loci().iter().zip(ladder.values()) {
            for (&locus, &bit) in row.iter().zip(bits) {
                source.push(locus);
                used[locus - 1] = true;
                complement[locus - 1] = bit == 0;
            }
        }
    }
    let basic_span = source.len();
    source.extend((1..=span).filter(|&l| !used[l - 1]));
    BasicFrame {
        source,
        complement,
        basic_span,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::staircase::{MultiStaircaseDescriptor, StaircaseDescriptor};

    #[test]
    fn basic_is_identity() {
        let f = transform_to_basic_frame(&StaircaseDescriptor::basic(3, 2, 1.0, 0.0).unwrap());
        assert!(f.is_identity());
        assert!(f.complemented_loci().is_empty());
        let m = transform_to_basic_frame(&MultiStaircaseDescriptor::basic(3, 2, 2, 1.0, 0.0).unwrap());
        assert!(m.is_identity());
    }

    #[test]
    fn scrambled_ones_is_pure_permutation() {
        let d = StaircaseDescriptor::new(2, 2, 1.0, 0.0, 5, vec![vec![3, 5], vec![1, 4]], vec![vec![1, 1]; 2]).unwrap();
        let f = transform_to_basic_frame(&d);
        assert_eq!(f.source, vec![3, 5, 1, 4, 2]);
        assert!(f.complemented_loci().is_empty());
        assert!(!f.is_identity());
    }

    #[test]
    fn mixed_values_complement() {
        let d = StaircaseDescriptor::new(1, 2, 1.0, 0.0, 2, vec![vec![1, 2]], vec![vec![0, 1]]).unwrap();
        let f = transform_to_basic_frame(&d);
        assert_eq!(f.complemented_loci(), vec![1]);
        assert_eq!(f.apply(&"01".parse().unwrap()).to_string(), "11");
    }
}
