//! Per-trial traces, their CSV form, and cross-trial aggregation.
//!
//! A trace file starts with `# key=value` comment lines holding the trial
//! seed and the config digest, followed by a CSV table with one row per
//! generation. Floats are written in shortest round-trip form, so identical
//! runs produce identical bytes.

use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use crate::error::{Error, Result};

/// One trial's per-generation metrics as named numeric columns.
///
/// The first column is always `generation`; the others follow
/// `avg_fitness, best_fitness, unmutated_loci`, then any `stage_*`,
/// `step_*` and `freq_*` columns.
#[derive(Clone, Debug, PartialEq)]
pub struct RunTrace {
    pub trial: usize,
    pub seed: u64,
    pub config_digest: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl RunTrace {
    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.column_index(name)?;
        Some(self.rows.iter().map(|r| r[k]).collect())
    }

    /// Rows of the `freq_*` columns, one vector per generation.
    pub fn one_frequency_frames(&self) -> Vec<Vec<f64>> {
        let idx: Vec<usize> = self
            .columns
            .iter()
            .enumerate()
            .filter(|(_, c)| c.starts_with("freq_"))
            .map(|(k, _)| k)
            .collect();
        self.rows
            .iter()
            .map(|r| idx.iter().map(|&k| r[k]).collect())
            .collect()
    }

    pub fn to_csv(&self) -> Result<Vec<u8>> {
        let mut out = Vec::new();
        writeln!(out, "# trial={}", self.trial).unwrap();
        writeln!(out, "# seed={}", self.seed).unwrap();
        writeln!(out, "# config_digest={}", self.config_digest).unwrap();
        write_table(&mut out, &self.columns, &self.rows)?;
        Ok(out)
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let bytes = self.to_csv()?;
        std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        RunTrace::parse_csv(&bytes)
    }

    pub fn parse_csv(bytes: &[u8]) -> Result<Self> {
        let mut trial = 0;
        let mut seed = 0;
        let mut digest = String::new();
        for (n, line) in BufReader::new(bytes).lines().enumerate() {
            let line = line.map_err(|e| Error::io("<trace>", e))?;
            let Some(meta) = line.strip_prefix('#') else { break };
            let Some((key, value)) = meta.trim().split_once('=') else { continue };
            let bad = |_| Error::parse(n + 1, format!("invalid value for `{key}`"));
            match key {
                "trial" => trial = value.parse().map_err(bad)?,
                "seed" => seed = value.parse().map_err(bad)?,
                "config_digest" => digest = value.to_string(),
                _ => {}
            }
        }
        let (columns, rows) = read_table(bytes)?;
        Ok(RunTrace {
            trial,
            seed,
            config_digest: digest,
            columns,
            rows,
        })
    }
}

fn write_table<W: Write>(out: W, columns: &[String], rows: &[Vec<f64>]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(columns)?;
    let mut buf = Vec::with_capacity(columns.len());
    for row in rows {
        if row.len() != columns.len() {
            return Err(Error::ShapeMismatch(format!(
                "row has {} values for {} columns",
                row.len(),
                columns.len()
            )));
        }
        buf.clear();
        buf.extend(row.iter().map(|v| v.to_string()));
        w.write_record(&buf)?;
    }
    w.flush().map_err(|e| Error::io("<csv>", e))?;
    Ok(())
}

fn read_table(bytes: &[u8]) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(bytes);
    let columns: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    let mut rows = Vec::new();
    for (n, rec) in r.records().enumerate() {
        let rec = rec?;
        let row = rec
            .iter()
            .map(|s| s.parse::<f64>().map_err(|_| Error::parse(n + 2, format!("not a number: {s:?}"))))
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    Ok((columns, rows))
}

/// Per-generation mean and standard error of every metric across trials.
#[derive(Clone, Debug, PartialEq)]
pub struct Aggregate {
    pub trials: usize,
    /// Metric names, without `generation`.
    pub metrics: Vec<String>,
    pub generations: Vec<f64>,
    pub mean: Vec<Vec<f64>>,
    /// Sample standard deviation over `sqrt(trials)`; 0 for a single trial.
    pub stderr: Vec<Vec<f64>>,
}

impl Aggregate {
    pub fn from_traces(traces: &[RunTrace]) -> Result<Self> {
        let first = traces.first().ok_or(Error::EmptyInput("no traces to aggregate"))?;
        for t in traces {
            if t.columns != first.columns || t.rows.len() != first.rows.len() {
                return Err(Error::ShapeMismatch(format!(
                    "trial {} does not match the shape of trial {}",
                    t.trial, first.trial
                )));
            }
        }
        if first.columns.first().map(String::as_str) != Some("generation") {
            return Err(Error::ShapeMismatch("first column must be `generation`".into()));
        }
        let k = traces.len() as f64;
        let width = first.columns.len() - 1;
        let mut mean = Vec::with_capacity(first.rows.len());
        let mut stderr = Vec::with_capacity(first.rows.len());
        for g in 0..first.rows.len() {
            let mut m = vec![0.0; width];
            for t in traces {
                for (acc, v) in m.iter_mut().zip(&t.rows[g][1..]) {
                    *acc += v;
                }
            }
            m.iter_mut().for_each(|v| *v /= k);
            let mut se = vec![0.0; width];
            if traces.len() > 1 {
                for t in traces {
                    for ((acc, v), mu) in se.iter_mut().zip(&t.rows[g][1..]).zip(&m) {
                        *acc += (v - mu).powi(2);
                    }
                }
                se.iter_mut().for_each(|v| *v = (*v / (k - 1.0)).sqrt() / k.sqrt());
            }
            mean.push(m);
            stderr.push(se);
        }
        Ok(Aggregate {
            trials: traces.len(),
            metrics: first.columns[1..].to_vec(),
            generations: first.rows.iter().map(|r| r[0]).collect(),
            mean,
            stderr,
        })
    }

    pub fn metric_index(&self, name: &str) -> Option<usize> {
        self.metrics.iter().position(|c| c == name)
    }

    pub fn mean_of(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.metric_index(name)?;
        Some(self.mean.iter().map(|r| r[k]).collect())
    }

    pub fn stderr_of(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.metric_index(name)?;
        Some(self.stderr.iter().map(|r| r[k]).collect())
    }

    /// Columns `generation`, then `<metric>_mean, <metric>_stderr` per metric.
    pub fn to_csv(&self) -> Result<Vec<u8>> {
        let mut columns = vec!["generation".to_string()];
        for m in &self.metrics {
            columns.push(format!("{m}_mean"));
            columns.push(format!("{m}_stderr"));
        }
        let rows: Vec<Vec<f64>> = (0..self.generations.len())
            .map(|g| {
                let mut row = vec![self.generations[g]];
                for (m, s) in self.mean[g].iter().zip(&self.stderr[g]) {
                    row.push(*m);
                    row.push(*s);
                }
                row
            })
            .collect();
        let mut out = Vec::new();
        writeln!(out, "# trials={}", self.trials).unwrap();
        write_table(&mut out, &columns, &rows)?;
        Ok(out)
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let bytes = self.to_csv()?;
        std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
    }
}
