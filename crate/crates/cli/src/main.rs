use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use hyperclimb::experiment::{
    run_experiment, ExperimentConfig, ExperimentResult, FitnessSpec, MaxSatSource, RecordOptions, RunOptions,
    RunTrace, OUT_DIR_ENV,
};
use hyperclimb::fractal::{
    emit_one_frequency_frames, example_staircase, render_fractal_plot, stage_driven_system,
};
use hyperclimb::ga::{ClampingConfig, Crossover, GaConfig};
use hyperclimb::maxsat::Sat3Instance;
use hyperclimb::rng::{stream, Purpose};
use hyperclimb::staircase::{Descriptor, MultiStaircaseDescriptor, StaircaseDescriptor};
use hyperclimb::verify::{default_symmetry_descriptor, verify_signals, verify_symmetry};

const DEFAULT_OUT_DIR: &str = "hyperclimb-out";

#[derive(Parser)]
#[command(name = "hyperclimb", version, about = "Simple GA experiments on staircase and MAX 3-SAT fitness functions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the GA on a staircase function.
    RunStaircase {
        /// Basic staircase `h o delta sigma`.
        #[arg(long, num_args = 4, value_names = ["H", "O", "DELTA", "SIGMA"])]
        basic: Option<Vec<f64>>,
        /// Descriptor file.
        #[arg(long, conflicts_with = "basic")]
        descriptor: Option<PathBuf>,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Run the GA on a multi-staircase function.
    RunMultistaircase {
        /// Basic multi-staircase `c h o delta sigma`.
        #[arg(long, num_args = 5, value_names = ["C", "H", "O", "DELTA", "SIGMA"])]
        basic: Option<Vec<f64>>,
        #[arg(long, conflicts_with = "basic")]
        descriptor: Option<PathBuf>,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Run the GA on MAX 3-SAT instances.
    RunMaxsat {
        /// DIMACS CNF instance shared by all trials.
        #[arg(long, conflicts_with_all = ["vars", "clauses"])]
        dimacs: Option<PathBuf>,
        /// Generate a fresh random instance per trial with this many variables.
        #[arg(long, requires = "clauses")]
        vars: Option<usize>,
        #[arg(long, requires = "vars")]
        clauses: Option<usize>,
        #[arg(long)]
        instance_seed: Option<u64>,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Write a uniform random 3-CNF instance in DIMACS format.
    GenMaxsat {
        #[arg(long)]
        vars: usize,
        #[arg(long)]
        clauses: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Render a fractal fitness plot as a binary PGM.
    PlotFractal {
        /// Staircase descriptor; defaults to the 16-bit example staircase.
        #[arg(long)]
        descriptor: Option<PathBuf>,
        /// Increment of the example staircase.
        #[arg(long, default_value_t = 3.0, conflicts_with = "descriptor")]
        delta: f64,
        /// Noise of the example staircase.
        #[arg(long, default_value_t = 1.0, conflicts_with = "descriptor")]
        sigma: f64,
        /// Addressing rows per axis (`m`); `n` is the staircase order.
        #[arg(long, default_value_t = 4)]
        m: usize,
        /// `a` maps stage rows to the coarsest address rows, `a-prime` to the finest.
        #[arg(long, default_value = "a", value_parser = ["a", "a-prime"])]
        system: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output file; defaults to `fractal.pgm` in the output directory.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, env = OUT_DIR_ENV)]
        out_dir: Option<PathBuf>,
    },
    /// Turn the one-frequencies of a trace into one PGM frame per generation.
    EmitFrames {
        #[arg(long)]
        trace: PathBuf,
        #[arg(long, env = OUT_DIR_ENV)]
        out_dir: Option<PathBuf>,
        /// Frame height in pixels.
        #[arg(long, default_value_t = 16)]
        band: usize,
    },
    /// Check the closed-form staircase signals against brute-force expectation.
    VerifySignals {
        #[arg(long, default_value_t = 4)]
        max_h: usize,
        #[arg(long, default_value_t = 3)]
        max_o: usize,
        #[arg(long, value_delimiter = ',', default_values_t = [0.3, 1.0])]
        deltas: Vec<f64>,
        #[arg(long, default_value_t = 1e-12)]
        tolerance: f64,
    },
    /// Check that a staircase and its basic form behave identically under the GA.
    VerifySymmetry {
        /// Staircase descriptor; defaults to a scrambled h=3, o=2 staircase on 12 loci.
        #[arg(long)]
        descriptor: Option<PathBuf>,
        #[arg(long, default_value_t = 50)]
        trials: usize,
        #[arg(long, default_value_t = 100)]
        generations: u32,
        #[arg(long, default_value_t = 100)]
        population: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        jobs: Option<usize>,
        /// Largest allowed curve gap in pooled standard errors.
        #[arg(long, default_value_t = 3.0)]
        threshold: f64,
    },
}

#[derive(Args)]
struct RunArgs {
    /// Experiment config file (TOML). Flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long, env = OUT_DIR_ENV)]
    out_dir: Option<PathBuf>,
    /// Maximum number of trials running at once.
    #[arg(long)]
    jobs: Option<usize>,
    #[arg(long)]
    generations: Option<u32>,
    #[arg(long)]
    population: Option<usize>,
    #[arg(long)]
    mutation_rate: Option<f64>,
    /// `uniform` or `none`.
    #[arg(long)]
    crossover: Option<Crossover>,
    /// Enable clamping with flagFreq 0.01, unflagFreq 0.1, flagPeriod 200.
    #[arg(long)]
    clamp: bool,
    /// Disable clamping even if the config enables it.
    #[arg(long, conflicts_with = "clamp")]
    no_clamp: bool,
    /// Record per-locus one-frequencies (needed by `emit-frames`).
    #[arg(long)]
    one_frequencies: bool,
    /// Record stage and step frequencies for the first N stages of each ladder.
    #[arg(long)]
    step_depth: Option<usize>,
}

fn as_count(v: f64, name: &str) -> Result<usize> {
    if v < 0.0 || v.fract() != 0.0 {
        bail!("{name} must be a non-negative integer, got {v}");
    }
    Ok(v as usize)
}

fn load_config(path: &Path) -> Result<ExperimentConfig> {
    if !path.exists() {
        bail!("config file not found: {}", path.display());
    }
    ExperimentConfig::from_toml_file(path).with_context(|| format!("invalid config {}", path.display()))
}

/// Starts from the config file (or defaults for `fitness`), then applies flags.
fn build_config(run: &RunArgs, fitness: Option<FitnessSpec>, expect: &str) -> Result<ExperimentConfig> {
    let mut config = match (&run.config, fitness) {
        (Some(path), fitness) => {
            let mut c = load_config(path)?;
            if let Some(f) = fitness {
                c.fitness = f;
            }
            c
        }
        (None, Some(fitness)) => {
            let ga = match fitness {
                FitnessSpec::MaxSat(_) => GaConfig::maxsat_defaults(),
                _ => GaConfig::staircase_defaults(),
            };
            ExperimentConfig {
                fitness,
                ga,
                trials: 1,
                record: RecordOptions::default(),
            }
        }
        (None, None) => bail!("no fitness given: pass --config or the fitness flags"),
    };
    let kind = match config.fitness {
        FitnessSpec::Staircase(_) => "staircase",
        FitnessSpec::MultiStaircase(_) => "multi_staircase",
        FitnessSpec::MaxSat(_) => "maxsat",
    };
    if kind != expect {
        bail!("config describes a {kind} fitness, but this subcommand runs {expect}");
    }
    let ga = &mut config.ga;
    if let Some(v) = run.seed {
        ga.seed = v;
    }
    if let Some(v) = run.generations {
        ga.generations = v;
    }
    if let Some(v) = run.population {
        ga.population_size = v;
    }
    if let Some(v) = run.mutation_rate {
        ga.mutation_rate = v;
    }
    if let Some(v) = run.crossover {
        ga.crossover = v;
    }
    if run.clamp {
        ga.clamping = Some(ClampingConfig::standard());
    }
    if run.no_clamp {
        ga.clamping = None;
    }
    if let Some(v) = run.trials {
        config.trials = v;
    }
    if run.one_frequencies {
        config.record.one_frequencies = true;
    }
    if let Some(v) = run.step_depth {
        config.record.step_depth = v;
    }
    config.validate()?;
    Ok(config)
}

fn out_dir(dir: &Option<PathBuf>) -> PathBuf {
    dir.clone().unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR))
}

fn execute(config: &ExperimentConfig, run: &RunArgs) -> Result<()> {
    let dir = out_dir(&run.out_dir);
    let options = RunOptions {
        out_dir: Some(dir.clone()),
        jobs: run.jobs,
    };
    let ExperimentResult { aggregate, .. } = run_experiment(config, &options)?;
    let report = |metric: &str| -> String {
        let m = aggregate.mean_of(metric).and_then(|v| v.last().copied()).unwrap_or(f64::NAN);
        let s = aggregate.stderr_of(metric).and_then(|v| v.last().copied()).unwrap_or(f64::NAN);
        format!("{m:.4} +- {s:.4}")
    };
    println!(
        "{} trial(s) x {} generation(s) written to {}",
        config.trials,
        config.ga.generations,
        dir.display()
    );
    println!("final avg fitness {}", report("avg_fitness"));
    println!("final best fitness {}", report("best_fitness"));
    if config.ga.clamping.is_some() {
        println!("final unmutated loci {}", report("unmutated_loci"));
    }
    Ok(())
}

fn read_staircase(path: &Path) -> Result<StaircaseDescriptor> {
    match Descriptor::read(path).with_context(|| format!("cannot load descriptor {}", path.display()))? {
        Descriptor::Staircase(d) => Ok(d),
        Descriptor::Multi(_) => bail!("{} holds a multi-staircase, expected a single staircase", path.display()),
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::RunStaircase { basic, descriptor, run } => {
            let fitness = match (basic, descriptor) {
                (Some(b), _) => Some(FitnessSpec::Staircase(StaircaseDescriptor::basic(
                    as_count(b[0], "h")?,
                    as_count(b[1], "o")?,
                    b[2],
                    b[3],
                )?)),
                (None, Some(p)) => Some(FitnessSpec::Staircase(read_staircase(&p)?)),
                (None, None) => None,
            };
            execute(&build_config(&run, fitness, "staircase")?, &run)
        }
        Command::RunMultistaircase { basic, descriptor, run } => {
            let fitness = match (basic, descriptor) {
                (Some(b), _) => Some(FitnessSpec::MultiStaircase(MultiStaircaseDescriptor::basic(
                    as_count(b[0], "c")?,
                    as_count(b[1], "h")?,
                    as_count(b[2], "o")?,
                    b[3],
                    b[4],
                )?)),
                (None, Some(p)) => Some(FitnessSpec::MultiStaircase(
                    match Descriptor::read(&p).with_context(|| format!("cannot load descriptor {}", p.display()))? {
                        Descriptor::Multi(d) => d,
                        Descriptor::Staircase(d) => d.to_multi(),
                    },
                )),
                (None, None) => None,
            };
            execute(&build_config(&run, fitness, "multi_staircase")?, &run)
        }
        Command::RunMaxsat {
            dimacs,
            vars,
            clauses,
            instance_seed,
            run,
        } => {
            let fitness = match (dimacs, vars, clauses) {
                (Some(p), _, _) => Some(FitnessSpec::MaxSat(MaxSatSource::Instance(
                    Sat3Instance::read_dimacs(&p).with_context(|| format!("cannot load instance {}", p.display()))?,
                ))),
                (None, Some(vars), Some(clauses)) => Some(FitnessSpec::MaxSat(MaxSatSource::Random {
                    vars,
                    clauses,
                    instance_seed: instance_seed.unwrap_or(0),
                })),
                _ => None,
            };
            execute(&build_config(&run, fitness, "maxsat")?, &run)
        }
        Command::GenMaxsat {
            vars,
            clauses,
            seed,
            out,
        } => {
            let inst = Sat3Instance::generate(vars, clauses, &mut stream(seed, Purpose::Instance))?;
            inst.write_dimacs(&out)?;
            println!("wrote {vars} variables, {clauses} clauses to {}", out.display());
            Ok(())
        }
        Command::PlotFractal {
            descriptor,
            delta,
            sigma,
            m,
            system,
            seed,
            out,
            out_dir: dir,
        } => {
            let d = match descriptor {
                Some(p) => read_staircase(&p)?,
                None => example_staircase(delta, sigma)?,
            };
            let sys = stage_driven_system(&d, m, system == "a")?;
            let plot = render_fractal_plot(&d, &sys, seed)?;
            let path = match out {
                Some(p) => p,
                None => {
                    let dir = out_dir(&dir);
                    std::fs::create_dir_all(&dir).with_context(|| format!("cannot create {}", dir.display()))?;
                    dir.join("fractal.pgm")
                }
            };
            plot.to_image().write_pgm(&path)?;
            println!("wrote {0}x{0} plot to {1}", plot.side, path.display());
            Ok(())
        }
        Command::EmitFrames { trace, out_dir: dir, band } => {
            if !trace.exists() {
                bail!("trace file not found: {}", trace.display());
            }
            let t = RunTrace::read_csv(&trace)?;
            let frames = t.one_frequency_frames();
            if frames.first().is_none_or(|f| f.is_empty()) {
                bail!(
                    "{} has no one-frequency columns; rerun with --one-frequencies",
                    trace.display()
                );
            }
            let dir = out_dir(&dir);
            let written = emit_one_frequency_frames(&frames, &dir, band)?;
            println!("wrote {} frames to {}", written.len(), dir.display());
            Ok(())
        }
        Command::VerifySignals {
            max_h,
            max_o,
            deltas,
            tolerance,
        } => {
            let report = verify_signals(max_h, max_o, &deltas, tolerance)?;
            for f in report.failures() {
                println!(
                    "MISMATCH h={} o={} delta={} i={} {}: analytic {} brute force {}",
                    f.height, f.order, f.delta, f.stage, f.quantity, f.analytic, f.brute_force
                );
            }
            println!(
                "{} of {} signal identities match (max error {:.1e}, tolerance {:.0e})",
                report.checks.len() - report.failures().len(),
                report.checks.len(),
                report.max_error(),
                tolerance
            );
            if !report.passed() {
                bail!("signal verification failed");
            }
            Ok(())
        }
        Command::VerifySymmetry {
            descriptor,
            trials,
            generations,
            population,
            seed,
            jobs,
            threshold,
        } => {
            let d = match descriptor {
                Some(p) => read_staircase(&p)?,
                None => default_symmetry_descriptor(),
            };
            let ga = GaConfig {
                population_size: population,
                generations,
                seed,
                ..GaConfig::staircase_defaults()
            };
            let options = RunOptions { out_dir: None, jobs };
            let r = verify_symmetry(&d, &ga, trials, threshold, &options)?;
            if r.pointwise_checked > 0 {
                println!(
                    "pointwise: {} genomes, {} mismatches",
                    r.pointwise_checked, r.pointwise_mismatches
                );
            } else {
                println!("pointwise: skipped, span {} too large to enumerate", d.span());
            }
            println!(
                "GA curves: max gap {:.2} pooled standard errors (threshold {threshold})",
                r.max_gap_se
            );
            if !r.passed() {
                return Err(anyhow!("symmetry verification failed"));
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
