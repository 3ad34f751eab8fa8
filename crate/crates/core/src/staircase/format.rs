//! Plain-text descriptor files.
//!
//! ```text
//! # a staircase function
//! h: 4
//! o: 2
//! delta: 3
//! sigma: 1
//! span: 16
//! L:
//! 1 2
//! 3 4
//! 5 6
//! 7 8
//! V:
//! 1 0
//! 0 1
//! 0 0
//! 1 1
//! ```
//!
//! Multi-staircase files add `c: <cardinality>` and use `L1:`/`V1:` ...
//! `Lc:`/`Vc:` matrix blocks. The shorthands `basic: h o delta sigma` and
//! `basic_multi: c h o delta sigma` stand for a whole basic descriptor.
//! Lines starting with `#` are comments.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::staircase::descriptor::{MultiStaircaseDescriptor, Staircase, StaircaseDescriptor};

#[derive(Clone, Debug, PartialEq)]
pub enum Descriptor {
    Staircase(StaircaseDescriptor),
    Multi(MultiStaircaseDescriptor),
}

impl Descriptor {
    pub fn as_staircase(&self) -> &dyn Staircase {
        match self {
            Descriptor::Staircase(d) => d,
            Descriptor::Multi(d) => d,
        }
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Descriptor::parse(&text)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut scalars: BTreeMap<String, (usize, String)> = BTreeMap::new();
        let mut matrices: BTreeMap<String, (usize, Vec<Vec<String>>)> = BTreeMap::new();
        let mut current: Option<String> = None;

        for (n, raw) in text.lines().enumerate() {
            let line_no = n + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some((key, rest)) = line.split_once(':') {
                let key = key.trim().to_string();
                let rest = rest.trim();
                if rest.is_empty() {
                    if matrices.insert(key.clone(), (line_no, Vec::new())).is_some() {
                        return Err(Error::parse(line_no, format!("duplicate key {key:?}")));
                    }
                    current = Some(key);
                } else {
                    if scalars.insert(key.clone(), (line_no, rest.to_string())).is_some() {
                        return Err(Error::parse(line_no, format!("duplicate key {key:?}")));
                    }
                    current = None;
                }
            } else {
                let key = current
                    .as_ref()
                    .ok_or_else(|| Error::parse(line_no, "matrix row outside of a matrix block"))?;
                let row = line.split_whitespace().map(str::to_string).collect();
                matrices.get_mut(key).unwrap().1.push(row);
            }
        }

        let take = |scalars: &mut BTreeMap<String, (usize, String)>, key: &str| scalars.remove(key);

        if let Some((line, v)) = take(&mut scalars, "basic") {
            ensure_only(&scalars, &matrices, line)?;
            let f = fields(line, &v, 4)?;
            return Ok(Descriptor::Staircase(StaircaseDescriptor::basic(
                num(line, &f[0])?,
                num(line, &f[1])?,
                num(line, &f[2])?,
                num(line, &f[3])?,
            )?));
        }
        if let Some((line, v)) = take(&mut scalars, "basic_multi") {
            ensure_only(&scalars, &matrices, line)?;
            let f = fields(line, &v, 5)?;
            return Ok(Descriptor::Multi(MultiStaircaseDescriptor::basic(
                num(line, &f[0])?,
                num(line, &f[1])?,
                num(line, &f[2])?,
                num(line, &f[3])?,
                num(line, &f[4])?,
            )?));
        }

        let mut scalar = |key: &str| {
            take(&mut scalars, key).ok_or_else(|| Error::parse(0, format!("missing key {key:?}")))
        };
        let (l, h) = scalar("h")?;
        let h: usize = num(l, &h)?;
        let (l, o) = scalar("o")?;
        let o: usize = num(l, &o)?;
        let (l, delta) = scalar("delta")?;
        let delta: f64 = num(l, &delta)?;
        let (l, sigma) = scalar("sigma")?;
        let sigma: f64 = num(l, &sigma)?;
        let (l, span) = scalar("span")?;
        let span: usize = num(l, &span)?;
        let cardinality = match take(&mut scalars, "c") {
            Some((l, c)) => Some(num::<usize>(l, &c)?),
            None => None,
        };
        if let Some((key, (line, _))) = scalars.iter().next() {
            return Err(Error::parse(*line, format!("unknown key {key:?}")));
        }

        let mut matrix = |key: &str| -> Result<(usize, Vec<Vec<String>>)> {
            matrices
                .remove(key)
                .ok_or_else(|| Error::parse(0, format!("missing matrix {key:?}")))
        };
        let int_matrix = |(line, rows): (usize, Vec<Vec<String>>)| -> Result<Vec<Vec<usize>>> {
            rows.iter()
                .enumerate()
                .map(|(r, row)| row.iter().map(|v| num(line + 1 + r, v)).collect())
                .collect()
        };
        let bit_matrix = |(line, rows): (usize, Vec<Vec<String>>)| -> Result<Vec<Vec<u8>>> {
            rows.iter()
                .enumerate()
                .map(|(r, row)| row.iter().map(|v| num(line + 1 + r, v)).collect())
                .collect()
        };

        let descriptor = match cardinality {
            None => {
                let loci = int_matrix(matrix("L")?)?;
                let values = bit_matrix(matrix("V")?)?;
                Descriptor::Staircase(StaircaseDescriptor::new(h, o, delta, sigma, span, loci, values)?)
            }
            Some(c) => {
                let ladders = (1..=c)
                    .map(|k| {
                        Ok((
                            int_matrix(matrix(&format!("L{k}"))?)?,
                            bit_matrix(matrix(&format!("V{k}"))?)?,
                        ))
                    })
                    .collect::<Result<Vec<_>>>()?;
                Descriptor::Multi(MultiStaircaseDescriptor::new(h, o, delta, sigma, span, ladders)?)
            }
        };
        if let Some((key, (line, _))) = matrices.iter().next() {
            return Err(Error::parse(*line, format!("unexpected matrix {key:?}")));
        }
        Ok(descriptor)
    }

    /// Canonical full form; `parse(to_text(d)) == d`.
    pub fn to_text(&self) -> String {
        let s = self.as_staircase();
        let mut out = String::new();
        if let Descriptor::Multi(m) = self {
            writeln!(out, "c: {}", m.cardinality()).unwrap();
        }
        writeln!(out, "h: {}", s.height()).unwrap();
        writeln!(out, "o: {}", s.order()).unwrap();
        writeln!(out, "delta: {}", s.increment()).unwrap();
        writeln!(out, "sigma: {}", s.noise()).unwrap();
        writeln!(out, "span: {}", s.span()).unwrap();
        let multi = matches!(self, Descriptor::Multi(_));
        for (k, ladder) in s.ladders().iter().enumerate() {
            let suffix = if multi { (k + 1).to_string() } else { String::new() };
            writeln!(out, "L{suffix}:").unwrap();
            for row in ladder.loci() {
                writeln!(out, "{}", join(row)).unwrap();
            }
            writeln!(out, "V{suffix}:").unwrap();
            for row in ladder.values() {
                writeln!(out, "{}", join(row)).unwrap();
            }
        }
        out
    }
}

fn join<T: ToString>(row: &[T]) -> String {
    row.iter().map(T::to_string).collect::<Vec<_>>().join(" ")
}

fn ensure_only(
    scalars: &BTreeMap<String, (usize, String)>,
    matrices: &BTreeMap<String, (usize, Vec<Vec<String>>)>,
    line: usize,
) -> Result<()> {
    if scalars.is_empty() && matrices.is_empty() {
        Ok(())
    } else {
        Err(Error::parse(line, "a basic shorthand cannot be combined with other keys"))
    }
}

fn fields(line: usize, v: &str, n: usize) -> Result<Vec<String>> {
    let f: Vec<String> = v.split_whitespace().map(str::to_string).collect();
    if f.len() != n {
        return Err(Error::parse(line, format!("expected {n} values, found {}", f.len())));
    }
    Ok(f)
}

fn num<T: std::str::FromStr>(line: usize, v: &str) -> Result<T> {
    v.parse()
        .map_err(|_| Error::parse(line, format!("cannot parse {v:?} as a number")))
}
