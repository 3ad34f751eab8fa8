//! Python bindings: genomes, staircase and MAX 3-SAT fitness, GA operators,
//! signal analysis, fractal addressing and experiment runs.

use std::path::PathBuf;
use std::sync::Mutex;

use pyo3::exceptions::{PyOSError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use hyperclimb::experiment::{run_experiment as run_experiment_core, ExperimentConfig, RunOptions};
use hyperclimb::fitness::Fitness;
use hyperclimb::fractal::FractalAddressingSystem;
use hyperclimb::ga::{sigma_scale as sigma_scale_core, sus_select as sus_select_core};
use hyperclimb::rng::{stream, Purpose, Rng};
use hyperclimb::schema::{self, Which};
use hyperclimb::staircase::{Descriptor, Staircase};
use hyperclimb::verify;
use hyperclimb::{Error, Genome, MultiStaircaseDescriptor, Sat3Instance, StaircaseDescriptor};

fn py_err(e: Error) -> PyErr {
    match e {
        Error::Io { .. } => PyOSError::new_err(e.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

/// A genome given as a `"0101"` string or a sequence of 0/1 integers.
#[derive(FromPyObject)]
enum Bits {
    Text(String),
    List(Vec<u8>),
}

impl Bits {
    fn genome(self) -> PyResult<Genome> {
        match self {
            Bits::Text(s) => s.parse().map_err(py_err),
            Bits::List(v) => {
                if v.iter().any(|&b| b > 1) {
                    return Err(PyValueError::new_err("bits must be 0 or 1"));
                }
                Ok(Genome::from_bits(v.iter().map(|&b| b == 1)))
            }
        }
    }
}

fn noise_rng(seed: u64) -> Mutex<Rng> {
    Mutex::new(stream(seed, Purpose::Noise))
}

fn evaluate_with<F: Fitness>(f: &F, bits: Bits, seed: Option<u64>, rng: &Mutex<Rng>) -> PyResult<f64> {
    let g = bits.genome()?;
    match seed {
        Some(s) => f.evaluate(&g, &mut stream(s, Purpose::Noise)),
        None => f.evaluate(&g, &mut *rng.lock().unwrap_or_else(|p| p.into_inner())),
    }
    .map_err(py_err)
}

/// Single staircase function.
#[pyclass(name = "Staircase", module = "pyhyperclimb", frozen)]
struct PyStaircase {
    inner: StaircaseDescriptor,
    rng: Mutex<Rng>,
}

#[pymethods]
impl PyStaircase {
    /// `loci` rows are 1-based and ascending; `values` rows are 0/1 targets.
    #[new]
    #[pyo3(signature = (height, order, delta, sigma, span, loci, values, seed = 0))]
    #[allow(clippy::too_many_arguments)]
    fn new(
        height: usize,
        order: usize,
        delta: f64,
        sigma: f64,
        span: usize,
        loci: Vec<Vec<usize>>,
        values: Vec<Vec<u8>>,
        seed: u64,
    ) -> PyResult<Self> {
        let inner = StaircaseDescriptor::new(height, order, delta, sigma, span, loci, values).map_err(py_err)?;
        Ok(PyStaircase {
            inner,
            rng: noise_rng(seed),
        })
    }

    #[staticmethod]
    #[pyo3(signature = (height, order, delta, sigma, seed = 0))]
    fn basic(height: usize, order: usize, delta: f64, sigma: f64, seed: u64) -> PyResult<Self> {
        Ok(PyStaircase {
            inner: StaircaseDescriptor::basic(height, order, delta, sigma).map_err(py_err)?,
            rng: noise_rng(seed),
        })
    }

    #[staticmethod]
    #[pyo3(signature = (text, seed = 0))]
    fn parse(text: &str, seed: u64) -> PyResult<Self> {
        match Descriptor::parse(text).map_err(py_err)? {
            Descriptor::Staircase(inner) => Ok(PyStaircase {
                inner,
                rng: noise_rng(seed),
            }),
            Descriptor::Multi(_) => Err(PyValueError::new_err("text describes a multi-staircase")),
        }
    }

    fn to_text(&self) -> String {
        Descriptor::Staircase(self.inner.clone()).to_text()
    }

    #[getter]
    fn span(&self) -> usize {
        self.inner.span()
    }

    #[getter]
    fn height(&self) -> usize {
        self.inner.height()
    }

    #[getter]
    fn order(&self) -> usize {
        self.inner.order()
    }

    #[getter]
    fn loci(&self) -> Vec<Vec<usize>> {
        self.inner.loci().to_vec()
    }

    #[getter]
    fn values(&self) -> Vec<Vec<u8>> {
        self.inner.values().to_vec()
    }

    /// Noisy fitness. Without `seed` the object's own noise stream is used.
    #[pyo3(signature = (bits, seed = None))]
    fn evaluate(&self, bits: Bits, seed: Option<u64>) -> PyResult<f64> {
        evaluate_with(&self.inner, bits, seed, &self.rng)
    }

    fn expected_fitness(&self, bits: Bits) -> PyResult<f64> {
        self.inner.expected_fitness(&bits.genome()?).map_err(py_err)
    }

    /// Number of leading stages matched.
    fn level(&self, bits: Bits) -> PyResult<usize> {
        let g = bits.genome()?;
        if g.len() != self.inner.span() {
            return Err(py_err(Error::LengthMismatch {
                expected: self.inner.span(),
                actual: g.len(),
            }));
        }
        Ok(self.inner.ladder().level(&g))
    }

    /// Brute-force signal of step `i` (`which="step"`) or stage `i` (`which="stage"`).
    #[pyo3(signature = (i, which = "step"))]
    fn signal(&self, i: usize, which: &str) -> PyResult<f64> {
        let schema = match which {
            "step" => schema::step_schema(&self.inner, 0, i),
            "stage" => schema::stage_schema(&self.inner, 0, i),
            _ => return Err(PyValueError::new_err("which must be \"step\" or \"stage\"")),
        }
        .map_err(py_err)?;
        schema::signal_bruteforce(&self.inner, &schema).map_err(py_err)
    }

    /// Closed-form signal; for a basic-equivalent staircase it matches `signal`.
    #[pyo3(signature = (i, which = "step"))]
    fn signal_analytic(&self, i: usize, which: &str) -> PyResult<f64> {
        let w = match which {
            "step" => Which::Step,
            "stage" => Which::Stage,
            _ => return Err(PyValueError::new_err("which must be \"step\" or \"stage\"")),
        };
        schema::signal_analytic(&self.inner, w, i).map_err(py_err)
    }

    fn __repr__(&self) -> String {
        format!(
            "Staircase(h={}, o={}, delta={}, sigma={}, span={})",
            self.inner.height(),
            self.inner.order(),
            self.inner.increment(),
            self.inner.noise(),
            self.inner.span()
        )
    }
}

/// Multi-staircase function.
#[pyclass(name = "MultiStaircase", module = "pyhyperclimb", frozen)]
struct PyMultiStaircase {
    inner: MultiStaircaseDescriptor,
    rng: Mutex<Rng>,
}

#[pymethods]
impl PyMultiStaircase {
    #[staticmethod]
    #[pyo3(signature = (cardinality, height, order, delta, sigma, seed = 0))]
    fn basic(cardinality: usize, height: usize, order: usize, delta: f64, sigma: f64, seed: u64) -> PyResult<Self> {
        Ok(PyMultiStaircase {
            inner: MultiStaircaseDescriptor::basic(cardinality, height, order, delta, sigma).map_err(py_err)?,
            rng: noise_rng(seed),
        })
    }

    #[getter]
    fn span(&self) -> usize {
        self.inner.span()
    }

    #[getter]
    fn cardinality(&self) -> usize {
        self.inner.cardinality()
    }

    #[pyo3(signature = (bits, seed = None))]
    fn evaluate(&self, bits: Bits, seed: Option<u64>) -> PyResult<f64> {
        evaluate_with(&self.inner, bits, seed, &self.rng)
    }

    fn expected_fitness(&self, bits: Bits) -> PyResult<f64> {
        self.inner.expected_fitness(&bits.genome()?).map_err(py_err)
    }

    fn to_text(&self) -> String {
        Descriptor::Multi(self.inner.clone()).to_text()
    }
}

/// MAX 3-SAT instance.
#[pyclass(name = "Sat3Instance", module = "pyhyperclimb", frozen)]
struct PySat3Instance {
    inner: Sat3Instance,
}

#[pymethods]
impl PySat3Instance {
    #[staticmethod]
    #[pyo3(signature = (num_vars, num_clauses, seed = 0))]
    fn generate(num_vars: usize, num_clauses: usize, seed: u64) -> PyResult<Self> {
        let inner = Sat3Instance::generate(num_vars, num_clauses, &mut stream(seed, Purpose::Instance)).map_err(py_err)?;
        Ok(PySat3Instance { inner })
    }

    #[staticmethod]
    fn from_dimacs(text: &str) -> PyResult<Self> {
        Ok(PySat3Instance {
            inner: Sat3Instance::parse_dimacs(text.as_bytes()).map_err(py_err)?,
        })
    }

    fn to_dimacs(&self) -> String {
        self.inner.to_dimacs()
    }

    #[getter]
    fn num_vars(&self) -> usize {
        self.inner.num_vars()
    }

    #[getter]
    fn num_clauses(&self) -> usize {
        self.inner.num_clauses()
    }

    /// Clauses as lists of signed DIMACS literals.
    fn clauses(&self) -> Vec<[i64; 3]> {
        self.inner.clauses().iter().map(|c| c.map(|l| l.to_dimacs())).collect()
    }

    fn satisfied(&self, bits: Bits) -> PyResult<usize> {
        self.inner.satisfied(&bits.genome()?).map_err(py_err)
    }
}

/// Sigma scaling `max(0, 1 + (f - mean) / sd)`; all ones when `sd == 0`.
#[pyfunction]
fn sigma_scale(fitness: Vec<f64>) -> PyResult<Vec<f64>> {
    sigma_scale_core(&fitness).map_err(py_err)
}

/// Stochastic universal sampling of `count` indices.
#[pyfunction]
#[pyo3(signature = (weights, count, seed = 0))]
fn sus_select(weights: Vec<f64>, count: usize, seed: u64) -> PyResult<Vec<usize>> {
    let mut rng = stream(seed, Purpose::Selection);
    Ok(sus_select_core(&weights, count, &mut rng).map_err(py_err)?.indices)
}

/// Fractal address `(x, y)` of a genome under the system with row matrices
/// `x` and `y` (1-based loci).
#[pyfunction]
fn fractal_address(m: usize, n: usize, x: Vec<Vec<usize>>, y: Vec<Vec<usize>>, bits: Bits) -> PyResult<(u64, u64)> {
    let sys = FractalAddressingSystem::new(m, n, x, y).map_err(py_err)?;
    sys.address(&bits.genome()?).map_err(py_err)
}

/// Runs the signal oracle suite; returns `(checks, max_error, passed)`.
#[pyfunction]
#[pyo3(signature = (max_h = 4, max_o = 3, deltas = vec![0.3, 1.0], tolerance = 1e-12))]
fn verify_signals(max_h: usize, max_o: usize, deltas: Vec<f64>, tolerance: f64) -> PyResult<(usize, f64, bool)> {
    let r = verify::verify_signals(max_h, max_o, &deltas, tolerance).map_err(py_err)?;
    Ok((r.checks.len(), r.max_error(), r.passed()))
}

/// Runs an experiment from TOML config text. Returns a dict mapping
/// `generation` and each `<metric>_mean` / `<metric>_stderr` to a list.
#[pyfunction]
#[pyo3(signature = (config_toml, out_dir = None, jobs = None))]
fn run_experiment<'py>(
    py: Python<'py>,
    config_toml: &str,
    out_dir: Option<PathBuf>,
    jobs: Option<usize>,
) -> PyResult<Bound<'py, PyDict>> {
    let config = ExperimentConfig::from_toml_str(config_toml, std::path::Path::new(".")).map_err(py_err)?;
    let result = run_experiment_core(&config, &RunOptions { out_dir, jobs }).map_err(py_err)?;
    let agg = result.aggregate;
    let out = PyDict::new(py);
    out.set_item("generation", agg.generations.clone())?;
    for (k, name) in agg.metrics.iter().enumerate() {
        out.set_item(format!("{name}_mean"), agg.mean.iter().map(|r| r[k]).collect::<Vec<f64>>())?;
        out.set_item(format!("{name}_stderr"), agg.stderr.iter().map(|r| r[k]).collect::<Vec<f64>>())?;
    }
    Ok(out)
}

#[pymodule]
fn pyhyperclimb(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyStaircase>()?;
    m.add_class::<PyMultiStaircase>()?;
    m.add_class::<PySat3Instance>()?;
    m.add_function(wrap_pyfunction!(sigma_scale, m)?)?;
    m.add_function(wrap_pyfunction!(sus_select, m)?)?;
    m.add_function(wrap_pyfunction!(fractal_address, m)?)?;
    m.add_function(wrap_pyfunction!(verify_signals, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    Ok(())
}
