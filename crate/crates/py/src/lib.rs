//! Python bindings: lattices, spectral fields, the bilinear operator, Besov norms,
//! forcings, the Picard solver and the experiment runner.

use num_complex::Complex64;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use sqglab_core as core_api;
use core_api::bilinear;
use core_api::experiment::{self, ExperimentConfig, ExperimentKind};
use core_api::illposed;
use core_api::lpbesov::{BesovIndex, DyadicPartition};
use core_api::solver::{self, SignConvention, SolveConfig};
use core_api::spectral::{self, FrequencyLattice, Rank, SpectralField};

fn py_err(e: core_api::Error) -> PyErr {
    match e {
        core_api::Error::Io(_) | core_api::Error::Resource(_) | core_api::Error::Snapshot(_) => {
            PyRuntimeError::new_err(e.to_string())
        }
        _ => PyValueError::new_err(e.to_string()),
    }
}

/// Square frequency lattice with `m` points per axis and spacing `spacing`.
#[pyclass(name = "Lattice", frozen, eq, skip_from_py_object)]
#[derive(Clone, Copy, PartialEq)]
struct PyLattice(FrequencyLattice);

#[pymethods]
impl PyLattice {
    #[new]
    fn new(m: usize, spacing: f64) -> PyResult<Self> {
        FrequencyLattice::new(m, spacing).map(Self).map_err(py_err)
    }

    #[getter]
    fn m(&self) -> usize {
        self.0.m()
    }

    #[getter]
    fn spacing(&self) -> f64 {
        self.0.spacing()
    }

    #[getter]
    fn box_side(&self) -> f64 {
        self.0.box_side()
    }

    #[getter]
    fn nyquist(&self) -> f64 {
        self.0.nyquist()
    }

    /// Integer wavevector of a flat index.
    fn wavevector(&self, index: usize) -> [i64; 2] {
        self.0.wavevector(index)
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }

    fn __repr__(&self) -> String {
        format!("Lattice(m={}, spacing={})", self.0.m(), self.0.spacing())
    }
}

/// Real scalar field stored as Fourier coefficients on a lattice.
#[pyclass(name = "Field", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyField(SpectralField);

#[pymethods]
impl PyField {
    /// `amplitude cos(k . x)` for an integer wavevector `k`.
    #[staticmethod]
    fn cosine(lattice: &PyLattice, k: [i64; 2], amplitude: f64) -> PyResult<Self> {
        SpectralField::cosine(lattice.0, k, amplitude).map(Self).map_err(py_err)
    }

    #[staticmethod]
    fn sine(lattice: &PyLattice, k: [i64; 2], amplitude: f64) -> PyResult<Self> {
        SpectralField::sine(lattice.0, k, amplitude).map(Self).map_err(py_err)
    }

    /// Field from row-major physical samples on the `m x m` grid.
    #[staticmethod]
    fn from_physical(lattice: &PyLattice, samples: Vec<f64>) -> PyResult<Self> {
        SpectralField::from_physical(lattice.0, &samples).map(Self).map_err(py_err)
    }

    /// Field from coefficients in FFT order.
    #[staticmethod]
    fn from_coefficients(lattice: &PyLattice, coefficients: Vec<Complex64>) -> PyResult<Self> {
        SpectralField::from_coefficients(lattice.0, Rank::Scalar, coefficients).map(Self).map_err(py_err)
    }

    /// Hermitian Gaussian field with radial band `[lo, hi]`.
    #[staticmethod]
    #[pyo3(signature = (lattice, lo, hi, seed=0, stream=0))]
    fn random(lattice: &PyLattice, lo: f64, hi: f64, seed: u64, stream: u64) -> PyResult<Self> {
        let env = core_api::random::SpectralEnvelope::band(lo, hi);
        core_api::random::random_field(lattice.0, &env, seed, stream).map(Self).map_err(py_err)
    }

    #[getter]
    fn lattice(&self) -> PyLattice {
        PyLattice(*self.0.lattice())
    }

    fn coefficients(&self) -> Vec<Complex64> {
        self.0.coefficients().to_vec()
    }

    fn coeff(&self, k: [i64; 2]) -> Complex64 {
        self.0.coeff(k)
    }

    /// Row-major physical samples.
    fn to_physical(&self) -> Vec<f64> {
        self.0.to_physical(0)
    }

    fn l2_norm(&self) -> f64 {
        self.0.l2_norm()
    }

    fn max_abs_coeff(&self) -> f64 {
        self.0.max_abs_coeff()
    }

    fn relative_distance(&self, other: &PyField) -> PyResult<f64> {
        self.0.relative_distance(&other.0).map_err(py_err)
    }

    fn __add__(&self, other: &PyField) -> PyResult<Self> {
        self.0.try_add(&other.0).map(Self).map_err(py_err)
    }

    fn __sub__(&self, other: &PyField) -> PyResult<Self> {
        self.0.try_sub(&other.0).map(Self).map_err(py_err)
    }

    fn __mul__(&self, a: f64) -> Self {
        Self(self.0.scale(a))
    }

    fn __rmul__(&self, a: f64) -> Self {
        Self(self.0.scale(a))
    }

    fn __repr__(&self) -> String {
        format!("Field(m={}, spacing={})", self.0.lattice().m(), self.0.lattice().spacing())
    }
}

/// `B[f, g]`; `route` is `"quadrature"`, `"block"` or `"diagonal"` (needs `g` omitted).
#[pyfunction]
#[pyo3(signature = (f, g=None, route="block"))]
fn bee(f: &PyField, g: Option<&PyField>, route: &str) -> PyResult<PyField> {
    let out = match (route, g) {
        ("diagonal", None) => bilinear::bee_diag_fast(&f.0),
        ("diagonal", Some(_)) => return Err(PyValueError::new_err("the diagonal route takes a single field")),
        ("quadrature", g) => bilinear::bee(&f.0, &g.unwrap_or(f).0),
        ("block", g) => bilinear::bee_block(&f.0, &g.unwrap_or(f).0),
        (other, _) => return Err(PyValueError::new_err(format!("unknown route {other:?}"))),
    };
    out.map(PyField).map_err(py_err)
}

/// `(-Delta)^{-1} f`.
#[pyfunction]
fn inverse_laplacian(f: &PyField) -> PyResult<PyField> {
    spectral::inverse_laplacian(&f.0).map(PyField).map_err(py_err)
}

/// Homogeneous Besov norm with exponents `p, q` in `[1, inf]`.
#[pyfunction]
fn besov_norm(f: &PyField, s: f64, p: f64, q: f64) -> PyResult<f64> {
    let idx = BesovIndex::new(s, p, q).map_err(py_err)?;
    DyadicPartition::for_lattice(*f.0.lattice()).besov_norm(&f.0, idx).map_err(py_err)
}

/// `(j, 2^{js} ||phi_j * f||_p)` for every shell of the window.
#[pyfunction]
fn shell_profile(f: &PyField, s: f64, p: f64) -> PyResult<Vec<(i32, f64)>> {
    let prof = DyadicPartition::for_lattice(*f.0.lattice()).shell_profile(&f.0, s, p).map_err(py_err)?;
    Ok(prof.entries.iter().map(|e| (e.j, e.value)).collect())
}

/// `phi_j * f`.
#[pyfunction]
fn shell_project(f: &PyField, j: i32) -> PyResult<PyField> {
    DyadicPartition::for_lattice(*f.0.lattice()).shell_project(&f.0, j).map(PyField).map_err(py_err)
}

/// Single-frequency forcing `delta 2^{5N/2} chi(x) cos(2^N x_1)`.
#[pyfunction]
fn force_step1(lattice: &PyLattice, n: i64, delta: f64) -> PyResult<PyField> {
    illposed::force_step1(lattice.0, n, delta).map(PyField).map_err(py_err)
}

/// Picard solve of the fixed-point problem; returns `(theta, iterations, verdict)`.
#[pyfunction]
#[pyo3(signature = (f, p=4.0, q=2.0, tol=1e-10, max_iter=64, sign="pde"))]
fn picard_solve(f: &PyField, p: f64, q: f64, tol: f64, max_iter: usize, sign: &str) -> PyResult<(PyField, usize, String)> {
    let sign = match sign {
        "pde" => SignConvention::Pde,
        "as-written" => SignConvention::AsWritten,
        other => return Err(PyValueError::new_err(format!("unknown sign {other:?}"))),
    };
    let cfg = SolveConfig {
        index: BesovIndex::solution(p, q).map_err(py_err)?,
        tol,
        max_iter,
        sign,
        ..SolveConfig::default()
    };
    let out = solver::picard_solve(&f.0, &cfg).map_err(py_err)?;
    Ok((PyField(out.theta), out.trace.len(), format!("{:?}", out.verdict).to_lowercase()))
}

/// Runs a named experiment and returns its report as a JSON string.
///
/// `config` is optional TOML; its `experiment` key must match `name` when present.
#[pyfunction]
#[pyo3(signature = (name, config=None, seed=None))]
fn run_experiment(py: Python<'_>, name: &str, config: Option<&str>, seed: Option<u64>) -> PyResult<String> {
    let kind = ExperimentKind::from_name(name).ok_or_else(|| PyValueError::new_err(format!("unknown experiment {name:?}")))?;
    let mut cfg = match config {
        Some(text) => ExperimentConfig::from_toml_str(text).map_err(py_err)?,
        None => ExperimentConfig::new(kind),
    };
    if cfg.experiment != kind {
        return Err(PyValueError::new_err(format!("config is for {:?}", cfg.experiment.name())));
    }
    if let Some(s) = seed {
        cfg.seed = s;
    }
    let report = py.detach(|| experiment::run_experiment(&cfg)).map_err(py_err)?;
    experiment::to_json_string(&report).map_err(py_err)
}

#[pymodule]
fn sqglab(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyLattice>()?;
    m.add_class::<PyField>()?;
    m.add_function(wrap_pyfunction!(bee, m)?)?;
    m.add_function(wrap_pyfunction!(inverse_laplacian, m)?)?;
    m.add_function(wrap_pyfunction!(besov_norm, m)?)?;
    m.add_function(wrap_pyfunction!(shell_profile, m)?)?;
    m.add_function(wrap_pyfunction!(shell_project, m)?)?;
    m.add_function(wrap_pyfunction!(force_step1, m)?)?;
    m.add_function(wrap_pyfunction!(picard_solve, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    Ok(())
}
