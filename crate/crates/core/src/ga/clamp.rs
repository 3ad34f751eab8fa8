use crate::error::{Error, Result};
use crate::ga::config::ClampingConfig;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct LocusClamp {
    pub flagged: bool,
    /// Generations the locus has been flagged without interruption,
    /// counting the current one.
    pub consecutive_flagged: u32,
    pub masked: bool,
}

/// Per-locus state of the clamping mechanism.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClampState {
    loci: Vec<LocusClamp>,
}

impl ClampState {
    pub fn new(span: usize) -> Self {
        ClampState {
            loci: vec![LocusClamp::default(); span],
        }
    }

    pub fn from_loci(loci: Vec<LocusClamp>) -> Self {
        ClampState { loci }
    }

    pub fn loci(&self) -> &[LocusClamp] {
        &self.loci
    }

    pub fn span(&self) -> usize {
        self.loci.len()
    }

    pub fn mask(&self) -> Vec<bool> {
        self.loci.iter().map(|l| l.masked).collect()
    }

    pub fn masked_count(&self) -> usize {
        self.loci.iter().filter(|l| l.masked).count()
    }

    /// Advances the state by one generation given the one-frequencies measured
    /// at the start of that generation.
    pub fn update(&self, one_frequencies: &[f64], config: &ClampingConfig) -> Result<ClampState> {
        if one_frequencies.len() != self.loci.len() {
            return Err(Error::LengthMismatch {
                expected: self.loci.len(),
                actual: one_frequencies.len(),
            });
        }
        let outside = |freq: f64, bound: f64| freq < bound || freq > 1.0 - bound;
        let loci = self
            .loci
            .iter()
            .zip(one_frequencies)
            .map(|(locus, &freq)| {
                let (flagged, consecutive_flagged) = if locus.flagged {
                    if outside(freq, config.unflag_freq) {
                        (true, locus.consecutive_flagged.saturating_add(1))
                    } else {
                        (false, 0)
                    }
                } else if outside(freq, config.flag_freq) {
                    (true, 1)
                } else {
                    (false, 0)
                };
                LocusClamp {
                    flagged,
                    consecutive_flagged,
                    masked: flagged && consecutive_flagged >= config.flag_period,
                }
            })
            .collect();
        Ok(ClampState { loci })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> ClampingConfig {
        ClampingConfig::standard()
    }

    #[test]
    fn fresh_locus_gets_flagged() {
        let s = ClampState::new(1).update(&[0.005], &cfg()).unwrap();
        assert_eq!(
            s.loci()[0],
            LocusClamp {
                flagged: true,
                consecutive_flagged: 1,
                masked: false
            }
        );
    }

    #[test]
    fn flag_period_reached_masks() {
        let s = ClampState::from_loci(vec![LocusClamp {
            flagged: true,
            consecutive_flagged: 199,
            masked: false,
        }]);
        let s = s.update(&[0.95], &cfg()).unwrap();
        assert_eq!(s.loci()[0].consecutive_flagged, 200);
        assert!(s.loci()[0].masked);
        assert_eq!(s.masked_count(), 1);
    }

    #[test]
    fn mid_frequency_unflags() {
        let s = ClampState::from_loci(vec![LocusClamp {
            flagged: true,
            consecutive_flagged: 500,
            masked: true,
        }]);
        let s = s.update(&[0.5], &cfg()).unwrap();
        assert_eq!(s.loci()[0], LocusClamp::default());
    }

    #[test]
    fn hysteresis_between_thresholds() {
        // 0.05 is inside [flag, 1-flag] but outside [unflag, 1-unflag].
        let fresh = ClampState::new(1).update(&[0.05], &cfg()).unwrap();
        assert!(!fresh.loci()[0].flagged);
        let flagged = ClampState::new(1).update(&[0.0], &cfg()).unwrap();
        let still = flagged.update(&[0.05], &cfg()).unwrap();
        assert!(still.loci()[0].flagged);
        assert_eq!(still.loci()[0].consecutive_flagged, 2);
    }

    #[test]
    fn masked_stays_masked_and_counts() {
        let c = ClampingConfig::new(0.01, 0.1, 2).unwrap();
        let s = ClampState::new(1).update(&[1.0], &c).unwrap();
        let s = s.update(&[1.0], &c).unwrap();
        assert!(s.loci()[0].masked);
        let s2 = s.update(&[1.0], &c).unwrap();
        assert!(s2.loci()[0].masked);
        assert_eq!(s2.loci()[0].consecutive_flagged, 3);
    }

    #[test]
    fn length_mismatch() {
        assert!(ClampState::new(2).update(&[0.5], &cfg()).is_err());
    }
}
