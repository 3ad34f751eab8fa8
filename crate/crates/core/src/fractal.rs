//! Fractal addressing of genome space, greyscale fractal plots, and
//! one-frequency frames.

use std::io::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fitness::Fitness;
use crate::genome::Genome;
use crate::rng::{mix64, stream, Purpose};
use crate::staircase::{Staircase, StaircaseDescriptor};

/// Largest `m*n` accepted by [`render_fractal_plot`] (a 1024 x 1024 plot).
pub const RENDER_CAP_MN: usize = 10;

/// `(m, n, X, Y)`: two `m x n` matrices of 1-based loci that together hold
/// every element of `[2mn]` exactly once.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FractalAddressingSystem {
    m: usize,
    n: usize,
    x: Vec<Vec<usize>>,
    y: Vec<Vec<usize>>,
}

impl FractalAddressingSystem {
    pub fn new(m: usize, n: usize, x: Vec<Vec<usize>>, y: Vec<Vec<usize>>) -> Result<Self> {
        if m == 0 || n == 0 {
            return Err(Error::InvalidConfig("m and n must be positive".into()));
        }
        if m * n > 31 {
            return Err(Error::InvalidConfig(format!("m*n = {} is too large", m * n)));
        }
        let total = 2 * m * n;
        let mut seen = vec![false; total];
        for (name, mat) in [("X", &x), ("Y", &y)] {
            if mat.len() != m || mat.iter().any(|r| r.len() != n) {
                return Err(Error::InvalidConfig(format!("{name} must be {m} x {n}")));
            }
            for &l in mat.iter().flatten() {
                if l == 0 || l > total {
                    return Err(Error::IndexOutOfRange { index: l, len: total });
                }
                if std::mem::replace(&mut seen[l - 1], true) {
                    return Err(Error::InvalidConfig(format!(
                        "locus {l} appears more than once in X and Y"
                    )));
                }
            }
        }
        Ok(FractalAddressingSystem { m, n, x, y })
    }

    /// Builds a system from the rows that matter; every `None` row is filled
    /// with the unused loci in ascending order, X rows first, then Y rows.
    pub fn with_rows(m: usize, n: usize, x: Vec<Option<Vec<usize>>>, y: Vec<Option<Vec<usize>>>) -> Result<Self> {
        if x.len() != m || y.len() != m {
            return Err(Error::InvalidConfig(format!("X and Y need {m} rows")));
        }
        let total = 2 * m * n;
        let used: Vec<usize> = x.iter().chain(&y).flatten().flatten().copied().collect();
        let mut spare = (1..=total).filter(|l| !used.contains(l));
        let mut fill = |rows: Vec<Option<Vec<usize>>>| -> Vec<Vec<usize>> {
            rows.into_iter()
                .map(|r| r.unwrap_or_else(|| spare.by_ref().take(n).collect()))
                .collect()
        };
        let x = fill(x);
        let y = fill(y);
        FractalAddressingSystem::new(m, n, x, y)
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn x(&self) -> &[Vec<usize>] {
        &self.x
    }

    pub fn y(&self) -> &[Vec<usize>] {
        &self.y
    }

    pub fn genome_len(&self) -> usize {
        2 * self.m * self.n
    }

    /// Pixels per side, `2^(mn)`.
    pub fn side(&self) -> usize {
        1 << (self.m * self.n)
    }

    pub fn transposed(&self) -> Self {
        FractalAddressingSystem {
            m: self.m,
            n: self.n,
            x: self.y.clone(),
            y: self.x.clone(),
        }
    }

    /// 0-based `(x, y)` pixel of `g`. Each row's bits are read most
    /// significant first.
    pub fn address(&self, g: &Genome) -> Result<(u64, u64)> {
        g.check_len(self.genome_len())?;
        let read = |row: &[usize]| row.iter().fold(0u64, |acc, &l| (acc << 1) | g.get(l - 1) as u64);
        let mut granularity: u64 = 1 << (self.n * (self.m - 1));
        let (mut x, mut y) = (0, 0);
        for (xr, yr) in self.x.iter().zip(&self.y) {
            x += granularity * read(xr);
            y += granularity * read(yr);
            granularity >>= self.n;
        }
        Ok((x, y))
    }
}

/// The 16-bit example staircase: `h = 4`, `o = 2`, span 16, stages on loci
/// 1..=8 row-wise with targets `10, 01, 00, 11`.
pub fn example_staircase(delta: f64, sigma: f64) -> Result<StaircaseDescriptor> {
    StaircaseDescriptor::new(
        4,
        2,
        delta,
        sigma,
        16,
        vec![vec![1, 2], vec![3, 4], vec![5, 6], vec![7, 8]],
        vec![vec![1, 0], vec![0, 1], vec![0, 0], vec![1, 1]],
    )
}

/// Addressing system whose rows are driven by the stage rows of `d`.
///
/// With `leading`, stage rows `1, 2, 3, 4, ...` become `X1, Y1, X2, Y2, ...`
/// so the first stages decide the coarsest quadrants. Otherwise they become
/// `Xm, Ym, X(m-1), Y(m-1), ...` and the first stages only move pixels within
/// the finest cells. Needs `order == n`, `height <= 2m` and `span == 2mn`.
pub fn stage_driven_system(d: &StaircaseDescriptor, m: usize, leading: bool) -> Result<FractalAddressingSystem> {
    let n = d.order();
    if d.height() > 2 * m {
        return Err(Error::InvalidConfig(format!(
            "{} stage rows do not fit in {} addressing rows",
            d.height(),
            2 * m
        )));
    }
    if d.span() != 2 * m * n {
        return Err(Error::LengthMismatch {
            expected: 2 * m * n,
            actual: d.span(),
        });
    }
    let mut x = vec![None; m];
    let mut y = vec![None; m];
    for (k, row) in d.loci().iter().enumerate() {
        let level = if leading { k / 2 } else { m - 1 - k / 2 };
        let target = if k % 2 == 0 { &mut x } else { &mut y };
        target[level] = Some(row.clone());
    }
    FractalAddressingSystem::with_rows(m, n, x, y)
}

/// System A: stage rows 1-4 drive `X1, Y1, X2, Y2`.
pub fn example_system_a(d: &StaircaseDescriptor) -> Result<FractalAddressingSystem> {
    stage_driven_system(d, 4, true)
}

/// System A': stage rows 1-4 drive `X4, Y4, X3, Y3`.
pub fn example_system_a_prime(d: &StaircaseDescriptor) -> Result<FractalAddressingSystem> {
    stage_driven_system(d, 4, false)
}

/// Raw fitness of every genome, laid out by fractal address (row-major, `y` rows).
#[derive(Clone, Debug, PartialEq)]
pub struct FractalPlot {
    pub side: usize,
    pub values: Vec<f64>,
}

const CHUNK: u64 = 4096;

/// Queries `f` once with every genome of length `2mn`. Each chunk of genomes
/// draws noise from its own substream of `seed`.
pub fn render_fractal_plot<F: Fitness + ?Sized>(f: &F, system: &FractalAddressingSystem, seed: u64) -> Result<FractalPlot> {
    let len = system.genome_len();
    if f.span() != len {
        return Err(Error::LengthMismatch {
            expected: len,
            actual: f.span(),
        });
    }
    if system.m * system.n > RENDER_CAP_MN {
        return Err(Error::InvalidConfig(format!(
            "fractal plot of 2^{} x 2^{} pixels exceeds the render cap of m*n <= {RENDER_CAP_MN}",
            system.m * system.n,
            system.m * system.n
        )));
    }
    let side = system.side();
    let total = 1u64 << len;
    let chunks: Vec<Vec<(u64, u64, f64)>> = (0..total.div_ceil(CHUNK))
        .into_par_iter()
        .map(|chunk| {
            let mut rng = stream(mix64(seed ^ chunk), Purpose::Noise);
            (chunk * CHUNK..((chunk + 1) * CHUNK).min(total))
                .map(|v| {
                    let g = Genome::from_u64_msb_first(v, len);
                    let (x, y) = system.address(&g)?;
                    Ok((x, y, f.evaluate(&g, &mut rng)?))
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    let mut values = vec![0.0; side * side];
    for (x, y, v) in chunks.into_iter().flatten() {
        values[y as usize * side + x as usize] = v;
    }
    Ok(FractalPlot { side, values })
}

impl FractalPlot {
    /// Linear min-max scaling to 0..=255, lighter meaning fitter. A flat plot
    /// becomes uniform mid-grey (128).
    pub fn to_image(&self) -> GreyImage {
        let lo = self.values.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let pixels = if hi > lo {
            self.values
                .iter()
                .map(|v| (255.0 * (v - lo) / (hi - lo)).round() as u8)
                .collect()
        } else {
            vec![128; self.values.len()]
        };
        GreyImage {
            width: self.side,
            height: self.side,
            pixels,
        }
    }
}

/// For every pixel of `system`'s grid, the step level (number of leading
/// stages matched) of the genome that `system` places there. Applying this
/// map to a plot rendered under a different system compares the same
/// screen regions.
pub fn step_level_map(d: &StaircaseDescriptor, system: &FractalAddressingSystem) -> Result<Vec<usize>> {
    let len = system.genome_len();
    if d.span() != len {
        return Err(Error::LengthMismatch {
            expected: len,
            actual: d.span(),
        });
    }
    let side = system.side();
    let mut levels = vec![0; side * side];
    for v in 0..(1u64 << len) {
        let g = Genome::from_u64_msb_first(v, len);
        let (x, y) = system.address(&g)?;
        levels[y as usize * side + x as usize] = d.ladder().level(&g);
    }
    Ok(levels)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RegionStats {
    pub count: usize,
    pub mean: f64,
    /// Sample variance.
    pub variance: f64,
}

/// Statistics of `values` over each level `0..=max_level` of `levels`.
pub fn region_stats(values: &[f64], levels: &[usize], max_level: usize) -> Result<Vec<RegionStats>> {
    if values.len() != levels.len() {
        return Err(Error::ShapeMismatch(format!(
            "{} values but {} region labels",
            values.len(),
            levels.len()
        )));
    }
    Ok((0..=max_level)
        .map(|level| {
            let xs: Vec<f64> = values
                .iter()
                .zip(levels)
                .filter(|(_, &l)| l == level)
                .map(|(&v, _)| v)
                .collect();
            let count = xs.len();
            let mean = if count == 0 { f64::NAN } else { xs.iter().sum::<f64>() / count as f64 };
            let variance = if count < 2 {
                0.0
            } else {
                xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (count - 1) as f64
            };
            RegionStats { count, mean, variance }
        })
        .collect())
}

/// Difference of region means divided by their pooled standard deviation.
pub fn standardized_separation(lower: &RegionStats, upper: &RegionStats) -> f64 {
    let dof = (lower.count + upper.count) as f64 - 2.0;
    let pooled = (((lower.count as f64 - 1.0) * lower.variance + (upper.count as f64 - 1.0) * upper.variance) / dof).sqrt();
    (upper.mean - lower.mean) / pooled
}

/// 8-bit greyscale raster.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GreyImage {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<u8>,
}

impl GreyImage {
    /// Binary PGM (`P5`, maxval 255).
    pub fn to_pgm(&self) -> Vec<u8> {
        let mut out = format!("P5\n{} {}\n255\n", self.width, self.height).into_bytes();
        out.extend_from_slice(&self.pixels);
        out
    }

    pub fn write_pgm(&self, path: &Path) -> Result<()> {
        let mut file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        file.write_all(&self.to_pgm()).map_err(|e| Error::io(path, e))
    }

    pub fn parse_pgm(bytes: &[u8]) -> Result<Self> {
        // magic, width, height, maxval, then exactly one whitespace byte
        let mut fields = Vec::new();
        let mut pos = 0;
        while fields.len() < 4 {
            while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
                pos += 1;
            }
            if pos < bytes.len() && bytes[pos] == b'#' {
                while pos < bytes.len() && bytes[pos] != b'\n' {
                    pos += 1;
                }
                continue;
            }
            let start = pos;
            while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
                pos += 1;
            }
            if start == pos {
                return Err(Error::parse(1, "truncated PGM header"));
            }
            fields.push(String::from_utf8_lossy(&bytes[start..pos]).into_owned());
        }
        pos += 1;
        if fields[0] != "P5" || fields[3] != "255" {
            return Err(Error::parse(1, "only binary PGM with maxval 255 is supported"));
        }
        let dim = |s: &str| s.parse::<usize>().map_err(|_| Error::parse(1, "bad PGM dimension"));
        let (width, height) = (dim(&fields[1])?, dim(&fields[2])?);
        let pixels = bytes.get(pos..).unwrap_or_default().to_vec();
        if pixels.len() != width * height {
            return Err(Error::parse(1, "PGM pixel data has the wrong size"));
        }
        Ok(GreyImage { width, height, pixels })
    }

    pub fn read_pgm(path: &Path) -> Result<Self> {
        GreyImage::parse_pgm(&std::fs::read(path).map_err(|e| Error::io(path, e))?)
    }

    pub fn as_f64(&self) -> Vec<f64> {
        self.pixels.iter().map(|&p| p as f64).collect()
    }
}

/// Writes one `width = loci`, `height = band` frame per generation, intensity
/// `round(255 * one-frequency)`, named `frame_000000.pgm`, `frame_000001.pgm`, ...
pub fn emit_one_frequency_frames(frequencies: &[Vec<f64>], out_dir: &Path, band: usize) -> Result<Vec<PathBuf>> {
    if frequencies.is_empty() || frequencies.iter().any(Vec::is_empty) {
        return Err(Error::EmptyInput("trace carries no one-frequency data"));
    }
    let width = frequencies[0].len();
    if frequencies.iter().any(|f| f.len() != width) {
        return Err(Error::ShapeMismatch("frames have different locus counts".into()));
    }
    let band = band.max(1);
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    frequencies
        .iter()
        .enumerate()
        .map(|(t, freqs)| {
            let row: Vec<u8> = freqs
                .iter()
                .map(|f| (255.0 * f.clamp(0.0, 1.0)).round() as u8)
                .collect();
            let image = GreyImage {
                width,
                height: band,
                pixels: row.repeat(band),
            };
            let path = out_dir.join(format!("frame_{t:06}.pgm"));
            image.write_pgm(&path)?;
            Ok(path)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    fn sys_a() -> FractalAddressingSystem {
        example_system_a(&example_staircase(3.0, 1.0).unwrap()).unwrap()
    }

    #[test]
    fn all_zero_and_all_one_addresses() {
        let s = sys_a();
        assert_eq!(s.address(&Genome::zeros(16)).unwrap(), (0, 0));
        // 64*3 + 16*3 + 4*3 + 1*3
        assert_eq!(s.address(&Genome::ones(16)).unwrap(), (255, 255));
    }

    #[test]
    fn default_rows_fill_ascending() {
        let s = sys_a();
        assert_eq!(s.x(), &[vec![1, 2], vec![5, 6], vec![9, 10], vec![11, 12]]);
        assert_eq!(s.y(), &[vec![3, 4], vec![7, 8], vec![13, 14], vec![15, 16]]);
        let p = example_system_a_prime(&example_staircase(3.0, 1.0).unwrap()).unwrap();
        assert_eq!(p.x()[3], vec![1, 2]);
        assert_eq!(p.y()[3], vec![3, 4]);
        assert_eq!(p.x()[0], vec![9, 10]);
    }

    #[test]
    fn rejects_bad_systems() {
        assert!(FractalAddressingSystem::new(1, 1, vec![vec![1]], vec![vec![1]]).is_err());
        assert!(FractalAddressingSystem::new(1, 1, vec![vec![1]], vec![vec![3]]).is_err());
        assert!(FractalAddressingSystem::new(1, 2, vec![vec![1]], vec![vec![2]]).is_err());
    }

    #[test]
    fn address_is_bijective_example() {
        let s = sys_a();
        let seen: HashSet<_> = (0..1u64 << 16)
            .map(|v| s.address(&Genome::from_u64_msb_first(v, 16)).unwrap())
            .collect();
        assert_eq!(seen.len(), 1 << 16);
        assert!(seen.iter().all(|&(x, y)| x < 256 && y < 256));
    }

    #[test]
    fn address_length_mismatch() {
        assert!(sys_a().address(&Genome::zeros(15)).is_err());
    }

    #[test]
    fn flat_plot_is_mid_grey() {
        let plot = FractalPlot {
            side: 2,
            values: vec![1.5; 4],
        };
        assert_eq!(plot.to_image().pixels, vec![128; 4]);
    }

    #[test]
    fn pgm_round_trip() {
        let img = GreyImage {
            width: 3,
            height: 2,
            pixels: vec![0, 10, 32, 255, 9, 13],
        };
        let bytes = img.to_pgm();
        assert!(bytes.starts_with(b"P5\n3 2\n255\n"));
        assert_eq!(GreyImage::parse_pgm(&bytes).unwrap(), img);
    }

    #[test]
    fn render_cap() {
        let d = StaircaseDescriptor::basic(11, 2, 1.0, 0.0).unwrap();
        let s = FractalAddressingSystem::with_rows(11, 1, vec![None; 11], vec![None; 11]).unwrap();
        assert!(render_fractal_plot(&d, &s, 0).is_err());
    }

    #[test]
    fn deterministic_plot_regions_are_exact() {
        let d = example_staircase(3.0, 0.0).unwrap();
        let s = example_system_a(&d).unwrap();
        let plot = render_fractal_plot(&d, &s, 1).unwrap();
        let levels = step_level_map(&d, &s).unwrap();
        let stats = region_stats(&plot.values, &levels, 4).unwrap();
        for w in stats.windows(2) {
            assert!(w[1].mean > w[0].mean);
        }
        assert!(stats.iter().all(|r| r.variance == 0.0));
        assert_eq!(stats[4].count, 256);
    }
}
