//! Self-checks: closed-form staircase signals against brute-force
//! expectation, and equivalence of a staircase with its basic form.

use crate::error::{Error, Result};
use crate::experiment::{run_experiment, Aggregate, ExperimentConfig, FitnessSpec, RecordOptions, RunOptions};
use crate::ga::GaConfig;
use crate::genome::Genome;
use crate::schema::{
    complement_signal_sum_bruteforce, conditional_signal_bruteforce, signal_analytic, signal_bruteforce, stage_schema,
    step_schema, Which, ENUMERATION_CAP_BITS,
};
use crate::staircase::{transform_to_basic_frame, Staircase, StaircaseDescriptor};

#[derive(Clone, Debug, PartialEq)]
pub struct SignalCheck {
    pub height: usize,
    pub order: usize,
    pub delta: f64,
    pub stage: usize,
    pub quantity: &'static str,
    pub analytic: f64,
    pub brute_force: f64,
}

impl SignalCheck {
    pub fn error(&self) -> f64 {
        (self.analytic - self.brute_force).abs()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SignalReport {
    pub checks: Vec<SignalCheck>,
    pub tolerance: f64,
}

impl SignalReport {
    pub fn max_error(&self) -> f64 {
        self.checks.iter().map(SignalCheck::error).fold(0.0, f64::max)
    }

    pub fn failures(&self) -> Vec<&SignalCheck> {
        self.checks.iter().filter(|c| c.error().is_nan() || c.error() > self.tolerance).collect()
    }

    pub fn passed(&self) -> bool {
        self.failures().is_empty()
    }
}

/// Checks step signal, stage signal, stage-given-previous-step signal and
/// complement sum of every basic staircase with `h <= max_h`, `o <= max_o`
/// and each of `deltas`, all with `sigma = 0`.
pub fn verify_signals(max_h: usize, max_o: usize, deltas: &[f64], tolerance: f64) -> Result<SignalReport> {
    if max_h * max_o > ENUMERATION_CAP_BITS {
        return Err(Error::EnumerationCap {
            free_bits: max_h * max_o,
            cap_bits: ENUMERATION_CAP_BITS,
        });
    }
    let mut checks = Vec::new();
    for h in 1..=max_h {
        for o in 1..=max_o {
            for &delta in deltas {
                let d = StaircaseDescriptor::basic(h, o, delta, 0.0)?;
                let mut push = |stage, quantity, analytic, brute_force| {
                    checks.push(SignalCheck {
                        height: h,
                        order: o,
                        delta,
                        stage,
                        quantity,
                        analytic,
                        brute_force,
                    })
                };
                for i in 1..=h {
                    push(
                        i,
                        "step signal",
                        signal_analytic(&d, Which::Step, i)?,
                        signal_bruteforce(&d, &step_schema(&d, 0, i)?)?,
                    );
                    push(
                        i,
                        "stage signal",
                        signal_analytic(&d, Which::Stage, i)?,
                        signal_bruteforce(&d, &stage_schema(&d, 0, i)?)?,
                    );
                    push(
                        i,
                        "complement sum",
                        -(i as f64) * delta,
                        complement_signal_sum_bruteforce(&d, 0, i)?,
                    );
                    if i >= 2 {
                        push(
                            i,
                            "stage given step",
                            delta,
                            conditional_signal_bruteforce(&d, &stage_schema(&d, 0, i)?, &step_schema(&d, 0, i - 1)?)?,
                        );
                    }
                }
            }
        }
    }
    Ok(SignalReport { checks, tolerance })
}

#[derive(Clone, Debug)]
pub struct SymmetryReport {
    /// Genomes compared pointwise with `sigma = 0`; 0 when the span exceeds
    /// the enumeration cap.
    pub pointwise_checked: u64,
    pub pointwise_mismatches: u64,
    pub original: Aggregate,
    pub basic: Aggregate,
    /// Largest per-generation gap between mean average-fitness curves, in
    /// pooled standard errors.
    pub max_gap_se: f64,
    pub threshold_se: f64,
}

impl SymmetryReport {
    pub fn passed(&self) -> bool {
        self.pointwise_mismatches == 0 && self.max_gap_se < self.threshold_se
    }
}

/// Runs the GA on `d` and on its basic form with independent seeds and
/// compares the mean average-fitness curves; also compares the two functions
/// pointwise through the basic-frame transform when `d.span()` is small
/// enough to enumerate.
pub fn verify_symmetry(
    d: &StaircaseDescriptor,
    ga: &GaConfig,
    trials: usize,
    threshold_se: f64,
    options: &RunOptions,
) -> Result<SymmetryReport> {
    let (mut checked, mut mismatches) = (0, 0);
    if d.span() <= ENUMERATION_CAP_BITS {
        let det = d.with_sigma(0.0)?;
        let basic = det.basic_form();
        let frame = transform_to_basic_frame(&det);
        for v in 0..(1u64 << d.span()) {
            let g = Genome::from_u64_msb_first(v, d.span());
            checked += 1;
            if det.expected_fitness(&g)? != basic.expected_fitness(&frame.apply_basic(&g))? {
                mismatches += 1;
            }
        }
    }

    let record = RecordOptions::default();
    let original = run_experiment(
        &ExperimentConfig {
            fitness: FitnessSpec::Staircase(d.clone()),
            ga: ga.clone(),
            trials,
            record,
        },
        options,
    )?
    .aggregate;
    let basic = run_experiment(
        &ExperimentConfig {
            fitness: FitnessSpec::MultiStaircase(d.basic_form()),
            ga: GaConfig {
                seed: ga.seed.wrapping_add(1),
                ..ga.clone()
            },
            trials,
            record,
        },
        &RunOptions {
            out_dir: options.out_dir.as_ref().map(|p| p.join("basic")),
            jobs: options.jobs,
        },
    )?
    .aggregate;

    let (ma, sa) = (original.mean_of("avg_fitness"), original.stderr_of("avg_fitness"));
    let (mb, sb) = (basic.mean_of("avg_fitness"), basic.stderr_of("avg_fitness"));
    let (Some(ma), Some(sa), Some(mb), Some(sb)) = (ma, sa, mb, sb) else {
        return Err(Error::ShapeMismatch("aggregate lacks avg_fitness".into()));
    };
    let mut max_gap_se = 0.0f64;
    for g in 0..ma.len() {
        let diff = (ma[g] - mb[g]).abs();
        let se = (sa[g].powi(2) + sb[g].powi(2)).sqrt();
        let gap = if se > 0.0 {
            diff / se
        } else if diff == 0.0 {
            0.0
        } else {
            f64::INFINITY
        };
        max_gap_se = max_gap_se.max(gap);
    }
    Ok(SymmetryReport {
        pointwise_checked: checked,
        pointwise_mismatches: mismatches,
        original,
        basic,
        max_gap_se,
        threshold_se,
    })
}

/// The scrambled-loci, mixed-target staircase used by default for the
/// symmetry check: `h = 3`, `o = 2`, `delta = 1`, `sigma = 1`, span 12.
pub fn default_symmetry_descriptor() -> StaircaseDescriptor {
    StaircaseDescriptor::new(
        3,
        2,
        1.0,
        1.0,
        12,
        vec![vec![2, 7], vec![5, 11], vec![4, 9]],
        vec![vec![1, 0], vec![0, 0], vec![0, 1]],
    )
    .expect("valid descriptor")
}
