use crate::genome::Genome;

/// One staircase: an `h x o` matrix of 1-based loci and the matching target bits.
///
/// Row `i` of the matrices is stage `i + 1`. Stage membership is checked with
/// precomputed word masks so evaluation never walks individual loci.
#[derive(Clone, Debug)]
pub struct Ladder {
    loci: Vec<Vec<usize>>,
    values: Vec<Vec<u8>>,
    checks: Vec<Vec<WordCheck>>,
}

#[derive(Clone, Copy, Debug)]
struct WordCheck {
    word: usize,
    mask: u64,
    expected: u64,
}

impl PartialEq for Ladder {
    fn eq(&self, other: &Self) -> bool {
        self.loci == other.loci && self.values == other.values
    }
}

impl Ladder {
    /// Builds a ladder without validation; callers validate the enclosing
    /// descriptor first.
    pub(crate) fn new(loci: Vec<Vec<usize>>, values: Vec<Vec<u8>>) -> Self {
        let checks = loci
            .iter()
            .zip(&values)
            .map(|(row, bits)| {
                let mut checks: Vec<WordCheck> = Vec::new();
                for (&locus, &bit) in row.iter().zip(bits) {
                    let i = locus - 1;
                    let (word, shift) = (i / 64, i % 64);
                    let entry = match checks.iter_mut().find(|c| c.word == word) {
                        Some(c) => c,
                        None => {
                            checks.push(WordCheck {
                                word,
                                mask: 0,
                                expected: 0,
                            });
                            checks.last_mut().unwrap()
                        }
                    };
                    entry.mask |= 1 << shift;
                    if bit == 1 {
                        entry.expected |= 1 << shift;
                    }
                }
                checks
            })
            .collect();
        Ladder {
            loci,
            values,
            checks,
        }
    }

    pub fn loci(&self) -> &[Vec<usize>] {
        &self.loci
    }

    pub fn values(&self) -> &[Vec<u8>] {
        &self.values
    }

    pub fn height(&self) -> usize {
        self.loci.len()
    }

    /// Whether `g` lies in stage `stage` (0-based row index).
    #[inline]
    pub fn stage_matches(&self, g: &Genome, stage: usize) -> bool {
        let words = g.words();
        self.checks[stage]
            .iter()
            .all(|c| words[c.word] & c.mask == c.expected)
    }

    /// Number of leading stages `g` matches, i.e. the highest step it lies in.
    #[inline]
    pub fn level(&self, g: &Genome) -> usize {
        (0..self.height())
            .take_while(|&i| self.stage_matches(g, i))
            .count()
    }

    /// The staircase walk: `+delta` per matched stage, and on the first
    /// mismatch `-delta / (2^o - 1)` and stop.
    #[inline]
    pub(crate) fn climb(&self, g: &Genome, mut y: f64, delta: f64, penalty: f64) -> f64 {
        for i in 0..self.height() {
            if self.stage_matches(g, i) {
                y += delta;
            } else {
                y -= penalty;
                break;
            }
        }
        y
    }
}
