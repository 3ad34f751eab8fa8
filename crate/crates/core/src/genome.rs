//! Fixed-length bitstring genomes and populations of them.
//!
//! Bits are packed little-endian into `u64` words: locus `i` (0-based) lives
//! in word `i / 64` at bit `i % 64`. Bits past `len` in the last word are
//! always zero.

use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::error::{Error, Result};

const WORD_BITS: usize = 64;

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Genome {
    words: Vec<u64>,
    len: usize,
}

impl Genome {
    pub fn zeros(len: usize) -> Self {
        Genome {
            words: vec![0; len.div_ceil(WORD_BITS)],
            len,
        }
    }

    pub fn ones(len: usize) -> Self {
        let mut g = Genome {
            words: vec![u64::MAX; len.div_ceil(WORD_BITS)],
            len,
        };
        g.clear_tail();
        g
    }

    pub fn random<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Self {
        let mut g = Genome {
            words: (0..len.div_ceil(WORD_BITS)).map(|_| rng.next_u64()).collect(),
            len,
        };
        g.clear_tail();
        g
    }

    pub fn from_bits<I: IntoIterator<Item = bool>>(bits: I) -> Self {
        let mut words = Vec::new();
        let mut len = 0;
        for bit in bits {
            if len % WORD_BITS == 0 {
                words.push(0);
            }
            if bit {
                words[len / WORD_BITS] |= 1 << (len % WORD_BITS);
            }
            len += 1;
        }
        Genome { words, len }
    }

    /// Builds a genome of length `len` from the low `len` bits of `value`,
    /// with locus 0 holding the most significant of those bits.
    pub fn from_u64_msb_first(value: u64, len: usize) -> Self {
        assert!(len <= 64);
        Genome::from_bits((0..len).map(|i| (value >> (len - 1 - i)) & 1 == 1))
    }

    pub(crate) fn from_words(words: Vec<u64>, len: usize) -> Self {
        debug_assert_eq!(words.len(), len.div_ceil(WORD_BITS));
        let mut g = Genome { words, len };
        g.clear_tail();
        g
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Bit at 0-based locus `i`.
    #[inline]
    pub fn get(&self, i: usize) -> bool {
        debug_assert!(i < self.len);
        (self.words[i / WORD_BITS] >> (i % WORD_BITS)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, bit: bool) {
        debug_assert!(i < self.len);
        let mask = 1u64 << (i % WORD_BITS);
        if bit {
            self.words[i / WORD_BITS] |= mask;
        } else {
            self.words[i / WORD_BITS] &= !mask;
        }
    }

    #[inline]
    pub fn flip(&mut self, i: usize) {
        debug_assert!(i < self.len);
        self.words[i / WORD_BITS] ^= 1 << (i % WORD_BITS);
    }

    pub fn bits(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    #[inline]
    pub fn words(&self) -> &[u64] {
        &self.words
    }

    /// Mask of the valid bits in the last word.
    pub(crate) fn tail_mask(len: usize) -> u64 {
        match len % WORD_BITS {
            0 => u64::MAX,
            r => (1u64 << r) - 1,
        }
    }

    fn clear_tail(&mut self) {
        if let Some(last) = self.words.last_mut() {
            *last &= Genome::tail_mask(self.len);
        }
    }

    pub(crate) fn check_len(&self, expected: usize) -> Result<()> {
        if self.len != expected {
            return Err(Error::LengthMismatch {
                expected,
                actual: self.len,
            });
        }
        Ok(())
    }
}

impl fmt::Display for Genome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for bit in self.bits() {
            f.write_str(if bit { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for Genome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Genome({self})")
    }
}

impl FromStr for Genome {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bits = s
            .chars()
            .enumerate()
            .map(|(i, c)| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::parse(1, format!("invalid bit {other:?} at position {i}"))),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Genome::from_bits(bits))
    }
}

/// An ordered multiset of equal-length genomes plus the generation counter.
#[derive(Clone, Debug, PartialEq)]
pub struct Population {
    members: Vec<Genome>,
    span: usize,
    generation: u64,
}

impl Population {
    pub fn new(members: Vec<Genome>, generation: u64) -> Result<Self> {
        let first = members
            .first()
            .ok_or(Error::EmptyInput("population has no members"))?;
        let span = first.len();
        for g in &members {
            g.check_len(span)?;
        }
        Ok(Population {
            members,
            span,
            generation,
        })
    }

    pub fn members(&self) -> &[Genome] {
        &self.members
    }

    pub fn into_members(self) -> Vec<Genome> {
        self.members
    }

    pub fn size(&self) -> usize {
        self.members.len()
    }

    pub fn span(&self) -> usize {
        self.span
    }

    pub fn generation(&self) -> u64 {
        self.generation
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn parse_and_display() {
        let g: Genome = "1010011".parse().unwrap();
        assert_eq!(g.len(), 7);
        assert!(g.get(0) && !g.get(1) && g.get(6));
        assert_eq!(g.to_string(), "1010011");
        assert!("10x".parse::<Genome>().is_err());
    }

    #[test]
    fn ones_clears_tail() {
        let g = Genome::ones(70);
        assert_eq!(g.count_ones(), 70);
        assert_eq!(g.words()[1], (1 << 6) - 1);
    }

    #[test]
    fn random_respects_length() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for len in [1, 63, 64, 65, 130] {
            let g = Genome::random(len, &mut rng);
            assert_eq!(g.len(), len);
            assert!(g.count_ones() <= len);
        }
    }

    #[test]
    fn msb_first() {
        assert_eq!(Genome::from_u64_msb_first(0b1101, 4).to_string(), "1101");
        assert_eq!(Genome::from_u64_msb_first(1, 3).to_string(), "001");
    }

    #[test]
    fn population_rejects_ragged_members() {
        let err = Population::new(vec![Genome::zeros(3), Genome::zeros(4)], 0);
        assert!(matches!(err, Err(Error::LengthMismatch { .. })));
        assert!(Population::new(vec![], 0).is_err());
    }
}
