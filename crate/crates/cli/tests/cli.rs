use std::path::Path;
use std::process::{Command, Output};

fn hyperclimb(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hyperclimb"))
        .args(args)
        .env_remove("HYPERCLIMB_OUT_DIR")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn verify_signals_reports_exact_matches() {
    let o = hyperclimb(&["verify-signals", "--max-h", "4", "--max-o", "3"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("216 of 216"), "{}", stdout(&o));
}

#[test]
fn run_staircase_writes_traces_and_aggregate() {
    let dir = tempfile::tempdir().unwrap();
    let o = hyperclimb(&[
        "run-staircase",
        "--basic",
        "50",
        "4",
        "0.3",
        "1",
        "--trials",
        "2",
        "--generations",
        "5",
        "--population",
        "40",
        "--out-dir",
        path(dir.path()),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    for f in ["trial_000.csv", "trial_001.csv", "aggregate.csv"] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
    let agg = std::fs::read_to_string(dir.path().join("aggregate.csv")).unwrap();
    assert!(agg.contains("avg_fitness_mean,avg_fitness_stderr,best_fitness_mean"));
}

#[test]
fn out_dir_falls_back_to_environment() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_hyperclimb"))
        .args(["run-maxsat", "--vars", "20", "--clauses", "60", "--generations", "3"])
        .env("HYPERCLIMB_OUT_DIR", dir.path())
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(dir.path().join("trial_000.csv").exists());
}

#[test]
fn reruns_are_byte_identical() {
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    for (k, d) in dirs.iter().enumerate() {
        let jobs = (k + 1).to_string();
        let o = hyperclimb(&[
            "run-multistaircase",
            "--basic",
            "2",
            "5",
            "2",
            "0.3",
            "1",
            "--trials",
            "3",
            "--generations",
            "20",
            "--population",
            "30",
            "--seed",
            "17",
            "--clamp",
            "--step-depth",
            "3",
            "--one-frequencies",
            "--jobs",
            &jobs,
            "--out-dir",
            path(d.path()),
        ]);
        assert!(o.status.success(), "{}", stderr(&o));
    }
    for f in ["trial_000.csv", "trial_002.csv", "aggregate.csv"] {
        assert_eq!(
            std::fs::read(dirs[0].path().join(f)).unwrap(),
            std::fs::read(dirs[1].path().join(f)).unwrap(),
            "{f}"
        );
    }
}

#[test]
fn config_file_drives_a_run_and_flags_override_it() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("exp.toml");
    std::fs::write(
        &cfg,
        "[experiment]\ntrials = 3\nseed = 2\n[ga]\ngenerations = 50\npopulation_size = 20\n\
         [fitness]\nkind = \"staircase\"\nbasic = [4, 2, 1, 1]\n",
    )
    .unwrap();
    let out = dir.path().join("out");
    let o = hyperclimb(&[
        "run-staircase",
        "--config",
        path(&cfg),
        "--trials",
        "1",
        "--generations",
        "4",
        "--out-dir",
        path(&out),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(out.join("trial_000.csv").exists());
    assert!(!out.join("trial_001.csv").exists());
    let trace = std::fs::read_to_string(out.join("trial_000.csv")).unwrap();
    assert_eq!(trace.lines().filter(|l| !l.starts_with('#')).count(), 1 + 4);

    let wrong = hyperclimb(&["run-maxsat", "--config", path(&cfg), "--out-dir", path(&out)]);
    assert!(!wrong.status.success());
    assert!(stderr(&wrong).contains("staircase"), "{}", stderr(&wrong));
}

#[test]
fn missing_config_names_the_path() {
    let o = hyperclimb(&["run-staircase", "--config", "/definitely/not/here.toml"]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("/definitely/not/here.toml"), "{}", stderr(&o));
}

#[test]
fn invalid_config_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "[fitness]\nkind = \"staircase\"\nbasic = [0, 2, 1, 1]\n").unwrap();
    let o = hyperclimb(&["run-staircase", "--config", path(&cfg)]);
    assert!(!o.status.success());
    assert!(stderr(&o).starts_with("error:"), "{}", stderr(&o));
}

#[test]
fn unknown_subcommand_fails() {
    let o = hyperclimb(&["fly"]);
    assert!(!o.status.success());
}

#[test]
fn gen_maxsat_writes_dimacs_that_run_maxsat_reads() {
    let dir = tempfile::tempdir().unwrap();
    let cnf = dir.path().join("i.cnf");
    let o = hyperclimb(&["gen-maxsat", "--vars", "30", "--clauses", "90", "--seed", "5", "--out", path(&cnf)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = std::fs::read_to_string(&cnf).unwrap();
    assert!(text.starts_with("p cnf 30 90\n"));
    assert_eq!(text.lines().count(), 91);
    let o = hyperclimb(&[
        "run-maxsat",
        "--dimacs",
        path(&cnf),
        "--generations",
        "3",
        "--clamp",
        "--out-dir",
        path(&dir.path().join("run")),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("unmutated loci"));
}

#[test]
fn plot_fractal_writes_a_greymap() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("a.pgm");
    let o = hyperclimb(&["plot-fractal", "--delta", "3", "--sigma", "1", "--out", path(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let bytes = std::fs::read(&out).unwrap();
    assert!(bytes.starts_with(b"P5\n256 256\n255\n"));
    assert_eq!(bytes.len(), "P5\n256 256\n255\n".len() + 256 * 256);
}

#[test]
fn emit_frames_needs_one_frequencies() {
    let dir = tempfile::tempdir().unwrap();
    let run = dir.path().join("run");
    let args = |extra: &[&'static str]| {
        let mut v = vec!["run-staircase", "--basic", "3", "2", "1", "1", "--generations", "7", "--population", "10"];
        v.extend_from_slice(extra);
        v
    };
    let mut a = args(&["--one-frequencies", "--out-dir"]);
    a.push(path(&run));
    assert!(hyperclimb(&a).status.success());
    let frames = dir.path().join("frames");
    let trace = run.join("trial_000.csv");
    let o = hyperclimb(&["emit-frames", "--trace", path(&trace), "--out-dir", path(&frames)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let mut names: Vec<String> = std::fs::read_dir(&frames)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    assert_eq!(names.len(), 7);
    assert_eq!(names[0], "frame_000000.pgm");

    let bare = dir.path().join("bare");
    let mut b = args(&["--out-dir"]);
    b.push(path(&bare));
    assert!(hyperclimb(&b).status.success());
    let o = hyperclimb(&["emit-frames", "--trace", path(&bare.join("trial_000.csv")), "--out-dir", path(&frames)]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("one-frequency"), "{}", stderr(&o));
}

#[test]
fn verify_symmetry_passes_on_default_descriptor() {
    let o = hyperclimb(&["verify-symmetry", "--trials", "20", "--generations", "30"]);
    assert!(o.status.success(), "{}{}", stdout(&o), stderr(&o));
    assert!(stdout(&o).contains("4096 genomes, 0 mismatches"));
}

#[test]
fn shipped_configs_are_valid() {
    let configs = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut seen = 0;
    for entry in std::fs::read_dir(&configs).unwrap() {
        let p = entry.unwrap().path();
        match p.extension().and_then(|e| e.to_str()) {
            Some("toml") => {
                hyperclimb::experiment::ExperimentConfig::from_toml_file(&p)
                    .unwrap_or_else(|e| panic!("{}: {e}", p.display()));
            }
            Some("staircase") => {
                hyperclimb::staircase::Descriptor::read(&p).unwrap_or_else(|e| panic!("{}: {e}", p.display()));
            }
            _ => continue,
        }
        seen += 1;
    }
    assert!(seen >= 10);
}
