//! Random MAX 3-SAT instances, DIMACS CNF I/O and clause-count fitness.

use std::fmt::Write as _;
use std::io::{BufRead, BufReader, Read};
use std::path::Path;

use rand::seq::index;
use rand::{Rng, RngCore};

use crate::error::{Error, Result};
use crate::fitness::Fitness;
use crate::genome::Genome;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Literal {
    /// 1-based variable index.
    pub var: u32,
    pub negated: bool,
}

impl Literal {
    pub fn to_dimacs(self) -> i64 {
        if self.negated {
            -(self.var as i64)
        } else {
            self.var as i64
        }
    }

    #[inline]
    pub fn is_true(self, assignment: &Genome) -> bool {
        assignment.get(self.var as usize - 1) != self.negated
    }
}

pub type Clause = [Literal; 3];

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Sat3Instance {
    num_vars: usize,
    clauses: Vec<Clause>,
}

impl Sat3Instance {
    pub fn new(num_vars: usize, clauses: Vec<Clause>) -> Result<Self> {
        for (k, clause) in clauses.iter().enumerate() {
            for lit in clause {
                if lit.var == 0 || lit.var as usize > num_vars {
                    return Err(Error::InvalidConfig(format!(
                        "clause {}: variable {} out of range 1..={num_vars}",
                        k + 1,
                        lit.var
                    )));
                }
            }
            let [a, b, c] = clause.map(|l| l.var);
            if a == b || b == c || a == c {
                return Err(Error::InvalidConfig(format!(
                    "clause {} repeats a variable",
                    k + 1
                )));
            }
        }
        Ok(Sat3Instance { num_vars, clauses })
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn num_clauses(&self) -> usize {
        self.clauses.len()
    }

    pub fn clauses(&self) -> &[Clause] {
        &self.clauses
    }

    /// Uniform random 3-CNF: each clause picks 3 distinct variables without
    /// replacement and negates each with probability 1/2.
    pub fn generate<R: RngCore + ?Sized>(num_vars: usize, num_clauses: usize, rng: &mut R) -> Result<Self> {
        if num_vars < 3 {
            return Err(Error::InvalidConfig(format!(
                "a 3-SAT instance needs at least 3 variables, got {num_vars}"
            )));
        }
        if num_vars > u32::MAX as usize {
            return Err(Error::InvalidConfig("too many variables".into()));
        }
        let clauses = (0..num_clauses)
            .map(|_| {
                let vars = index::sample(rng, num_vars, 3);
                let mut lits = [Literal {
                    var: 0,
                    negated: false,
                }; 3];
                for (lit, v) in lits.iter_mut().zip(vars.iter()) {
                    *lit = Literal {
                        var: v as u32 + 1,
                        negated: rng.random::<bool>(),
                    };
                }
                lits
            })
            .collect();
        Ok(Sat3Instance { num_vars, clauses })
    }

    /// Number of clauses satisfied by `assignment`.
    pub fn satisfied(&self, assignment: &Genome) -> Result<usize> {
        assignment.check_len(self.num_vars)?;
        Ok(self
            .clauses
            .iter()
            .filter(|c| c.iter().any(|l| l.is_true(assignment)))
            .count())
    }

    pub fn read_dimacs(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Sat3Instance::parse_dimacs(file).map_err(|e| match e {
            Error::Io { source, .. } => Error::io(path, source),
            other => other,
        })
    }

    pub fn parse_dimacs<R: Read>(reader: R) -> Result<Self> {
        let mut header: Option<(usize, usize)> = None;
        let mut clauses = Vec::new();
        let mut pending: Vec<i64> = Vec::new();
        for (n, line) in BufReader::new(reader).lines().enumerate() {
            let line_no = n + 1;
            let line = line.map_err(|e| Error::io("<dimacs>", e))?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('c') || line.starts_with('%') {
                continue;
            }
            if line.starts_with('p') {
                let f: Vec<&str> = line.split_whitespace().collect();
                if header.is_some() || f.len() != 4 || f[1] != "cnf" {
                    return Err(Error::parse(line_no, "malformed header, expected `p cnf <vars> <clauses>`"));
                }
                let vars = f[2].parse().map_err(|_| Error::parse(line_no, "malformed header variable count"))?;
                let count = f[3].parse().map_err(|_| Error::parse(line_no, "malformed header clause count"))?;
                header = Some((vars, count));
                continue;
            }
            let (num_vars, _) = header.ok_or_else(|| Error::parse(line_no, "clause before `p cnf` header"))?;
            for tok in line.split_whitespace() {
                let v: i64 = tok
                    .parse()
                    .map_err(|_| Error::parse(line_no, format!("invalid literal {tok:?}")))?;
                if v != 0 {
                    if v.unsigned_abs() as usize > num_vars {
                        return Err(Error::parse(
                            line_no,
                            format!("variable index {} out of range 1..={num_vars}", v.abs()),
                        ));
                    }
                    pending.push(v);
                    continue;
                }
                if pending.len() != 3 {
                    return Err(Error::parse(
                        line_no,
                        format!("clause width {} (expected 3)", pending.len()),
                    ));
                }
                let lit = |v: i64| Literal {
                    var: v.unsigned_abs() as u32,
                    negated: v < 0,
                };
                clauses.push([lit(pending[0]), lit(pending[1]), lit(pending[2])]);
                pending.clear();
            }
        }
        let (num_vars, count) = header.ok_or_else(|| Error::parse(0, "missing `p cnf` header"))?;
        if !pending.is_empty() {
            return Err(Error::parse(0, format!("clause width {} without terminating 0", pending.len())));
        }
        if clauses.len() != count {
            return Err(Error::parse(
                0,
                format!("header declares {count} clauses, found {}", clauses.len()),
            ));
        }
        Sat3Instance::new(num_vars, clauses).map_err(|e| Error::parse(0, e.to_string()))
    }

    pub fn to_dimacs(&self) -> String {
        let mut out = String::with_capacity(self.clauses.len() * 24);
        writeln!(out, "p cnf {} {}", self.num_vars, self.clauses.len()).unwrap();
        for c in &self.clauses {
            writeln!(out, "{} {} {} 0", c[0].to_dimacs(), c[1].to_dimacs(), c[2].to_dimacs()).unwrap();
        }
        out
    }

    pub fn write_dimacs(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_dimacs()).map_err(|e| Error::io(path, e))
    }
}

impl Fitness for Sat3Instance {
    fn span(&self) -> usize {
        self.num_vars
    }

    fn evaluate(&self, genome: &Genome, _rng: &mut dyn RngCore) -> Result<f64> {
        Ok(self.satisfied(genome)? as f64)
    }
}
