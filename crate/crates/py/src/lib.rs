//! Python bindings: symbols, spectra, conserved quantities, flows, brackets and the
//! inverse map. Structured reports come back as plain dicts.

use num_complex::Complex64;
use pyo3::create_exception;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use serde::Serialize;

use szego_core::cli::{self, ScenarioConfig};
use szego_core::flow::{self, Field, IntegrateOptions, Trajectory};
use szego_core::inverse::{self, InverseSpectralInput};
use szego_core::poisson::{self, FdOptions};
use szego_core::symbol::{rational_to_fourier, rational_to_fourier_auto, sobolev_norm_sq, RationalSymbol, SobolevIndex};
use szego_core::{conservation, corpus, hankel, FourierSymbol};

create_exception!(szego, SzegoError, PyValueError, "Numerical or input error raised by the core library.");

fn err(e: szego_core::Error) -> PyErr {
    SzegoError::new_err(format!("{}: {e}", e.name()))
}

fn to_dict<'py>(py: Python<'py>, v: &impl Serialize) -> PyResult<Bound<'py, PyAny>> {
    let s = serde_json::to_string(v).map_err(|e| PyValueError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (s,))
}

/// Truncated Taylor coefficients `û(0), …, û(N−1)` of a Hardy-space symbol.
#[pyclass(name = "FourierSymbol", module = "szego", frozen, skip_from_py_object)]
#[derive(Clone)]
pub struct PySymbol {
    inner: FourierSymbol,
}

impl From<FourierSymbol> for PySymbol {
    fn from(inner: FourierSymbol) -> Self {
        Self { inner }
    }
}

fn expand(r: RationalSymbol, n: Option<usize>) -> PyResult<PySymbol> {
    match n {
        Some(n) => rational_to_fourier(&r, n),
        None => rational_to_fourier_auto(&r),
    }
    .map(PySymbol::from)
    .map_err(err)
}

#[pymethods]
impl PySymbol {
    #[new]
    fn new(coeffs: Vec<Complex64>) -> PyResult<Self> {
        FourierSymbol::new(coeffs).map(Self::from).map_err(err)
    }

    /// `A(z)/B(z)` from coefficient lists (lowest degree first, `B(0) = 1`).
    #[staticmethod]
    #[pyo3(signature = (num, den, n=None))]
    fn from_rational(num: Vec<Complex64>, den: Vec<Complex64>, n: Option<usize>) -> PyResult<Self> {
        expand(RationalSymbol::new(num, den).map_err(err)?, n)
    }

    /// `z/(1 − pz)²`.
    #[staticmethod]
    #[pyo3(signature = (p, n=None))]
    fn double_pole(p: Complex64, n: Option<usize>) -> PyResult<Self> {
        if p.norm() >= 1.0 {
            return Err(PyValueError::new_err("|p| must be < 1"));
        }
        expand(RationalSymbol::double_pole(p), n)
    }

    /// `b + cz/(1 − pz)`.
    #[staticmethod]
    #[pyo3(signature = (b, c, p, n=None))]
    fn v3(b: Complex64, c: Complex64, p: Complex64, n: Option<usize>) -> PyResult<Self> {
        expand(RationalSymbol::v3(b, c, p).map_err(err)?, n)
    }

    /// Turbulent 𝒱(4) datum with closed-form rate `tau`.
    #[staticmethod]
    fn resonant_v4(tau: f64) -> PyResult<Self> {
        flow::resonant_v4_example(tau).map(Self::from).map_err(err)
    }

    /// Generic random symbol of class `d`, deterministic in `seed`.
    #[staticmethod]
    fn random(d: usize, seed: u64) -> PyResult<Self> {
        let mut s = corpus::corpus(seed, &[d], 1).map_err(err)?;
        Ok(s.remove(0).u.into())
    }

    #[getter]
    fn coeffs(&self) -> Vec<Complex64> {
        self.inner.coeffs().to_vec()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __repr__(&self) -> String {
        format!("FourierSymbol(N={}, Q={:.6e})", self.inner.len(), self.inner.norm_sq())
    }

    fn eval(&self, z: Complex64) -> Complex64 {
        self.inner.eval(z)
    }

    fn mass(&self) -> f64 {
        conservation::mass(&self.inner)
    }

    fn momentum(&self) -> f64 {
        conservation::momentum(&self.inner)
    }

    fn sobolev_norm_sq(&self, s: f64) -> PyResult<f64> {
        Ok(sobolev_norm_sq(&self.inner, SobolevIndex::new(s).map_err(err)?))
    }

    fn scaled(&self, c: Complex64) -> Self {
        self.inner.scaled(c).into()
    }

    /// `u(e^{iα}z)`.
    fn rotated(&self, alpha: f64) -> Self {
        self.inner.rotated(alpha).into()
    }

    fn resized(&self, n: usize) -> Self {
        self.inner.resized(n).into()
    }
}

fn parse_field(field: &str, x: Option<f64>) -> PyResult<Field> {
    match (field, x) {
        ("hamiltonian", _) => Ok(Field::Hamiltonian),
        ("generating", Some(x)) => Ok(Field::Generating { x }),
        ("generating", None) => Err(PyValueError::new_err("the generating field needs x")),
        _ => Err(PyValueError::new_err(format!("unknown field {field:?}"))),
    }
}

/// Sampled trajectory with its per-sample conservation reports.
#[pyclass(name = "Trajectory", module = "szego", frozen)]
pub struct PyTrajectory {
    inner: Trajectory,
}

#[pymethods]
impl PyTrajectory {
    #[getter]
    fn times(&self) -> Vec<f64> {
        self.inner.times.clone()
    }

    #[getter]
    fn states(&self) -> Vec<PySymbol> {
        self.inner.states.iter().cloned().map(PySymbol::from).collect()
    }

    /// `{s: [‖u(t)‖²_{H^s}, …]}`.
    #[getter]
    fn sobolev(&self) -> Vec<(f64, Vec<f64>)> {
        self.inner.sobolev.clone()
    }

    fn __len__(&self) -> usize {
        self.inner.times.len()
    }

    fn reports<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_dict(py, &self.inner.reports)
    }

    fn step_stats<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_dict(py, &self.inner.step_stats)
    }

    /// Maximum relative drift of each conserved quantity.
    fn drift(&self) -> Vec<(String, f64)> {
        flow::drift(&self.inner).entries
    }

    fn lax_residual(&self) -> f64 {
        flow::lax_residual(&self.inner)
    }

    #[pyo3(signature = (s_list=vec![1.0, 2.0]))]
    fn growth<'py>(&self, py: Python<'py>, s_list: Vec<f64>) -> PyResult<Bound<'py, PyAny>> {
        to_dict(py, &flow::growth_and_poles(&self.inner, &s_list).map_err(err)?)
    }
}

#[pyfunction]
fn spectrum<'py>(py: Python<'py>, u: &PySymbol) -> PyResult<Bound<'py, PyAny>> {
    to_dict(py, &hankel::spectrum(&u.inner).map_err(err)?.to_json())
}

#[pyfunction]
fn numerical_ranks(u: &PySymbol) -> (usize, usize) {
    hankel::numerical_ranks(&u.inner)
}

#[pyfunction]
fn conservation_report<'py>(py: Python<'py>, u: &PySymbol) -> PyResult<Bound<'py, PyAny>> {
    to_dict(py, &conservation::report(&u.inner).map_err(err)?)
}

#[pyfunction]
fn series_sample<'py>(py: Python<'py>, u: &PySymbol, x: f64) -> PyResult<Bound<'py, PyAny>> {
    to_dict(py, &conservation::series_sample(&u.inner, x).map_err(err)?)
}

#[pyfunction]
fn generating_f(u: &PySymbol, x: f64) -> PyResult<f64> {
    conservation::generating_f(&u.inner, x).map_err(err)
}

/// Residual of every conservation identity, on `xs` or the default grid.
#[pyfunction]
#[pyo3(signature = (u, xs=None))]
fn identity_suite(u: &PySymbol, xs: Option<Vec<f64>>) -> PyResult<Vec<(String, f64)>> {
    Ok(conservation::identity_suite(&u.inner, &xs.unwrap_or_default()).map_err(err)?.entries)
}

/// Symbol with singular values `s` (decreasing) and angles `angles`.
#[pyfunction]
fn reconstruct(s: Vec<f64>, angles: Vec<f64>, n: usize) -> PyResult<PySymbol> {
    let inp = InverseSpectralInput::new(s, angles).map_err(err)?;
    inverse::reconstruct(&inp, n).map(PySymbol::from).map_err(err)
}

#[pyfunction]
fn roundtrip(u: &PySymbol) -> PyResult<f64> {
    inverse::roundtrip(&u.inner).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (u, t, field="hamiltonian", x=None, rtol=1e-10, atol=1e-13))]
fn evolve(py: Python<'_>, u: &PySymbol, t: f64, field: &str, x: Option<f64>, rtol: f64, atol: f64) -> PyResult<PySymbol> {
    let f = parse_field(field, x)?;
    let u0 = u.inner.clone();
    py.detach(|| flow::evolve(&u0, f, t, rtol, atol)).map(PySymbol::from).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (u, t, field="hamiltonian", x=None, rtol=1e-10, atol=1e-13, sample_dt=0.01, s_list=vec![1.0, 2.0], pole_class=None))]
#[allow(clippy::too_many_arguments)]
fn integrate(
    py: Python<'_>,
    u: &PySymbol,
    t: f64,
    field: &str,
    x: Option<f64>,
    rtol: f64,
    atol: f64,
    sample_dt: f64,
    s_list: Vec<f64>,
    pole_class: Option<usize>,
) -> PyResult<PyTrajectory> {
    let f = parse_field(field, x)?;
    let opts = IntegrateOptions { rtol, atol, sample_dt, s_list, pole_class, analyze: true };
    let u0 = u.inner.clone();
    py.detach(|| flow::integrate(&u0, f, t, &opts)).map(|inner| PyTrajectory { inner }).map_err(err)
}

#[pyfunction]
fn v4_closed_form<'py>(py: Python<'py>, u: &PySymbol) -> PyResult<Bound<'py, PyAny>> {
    to_dict(py, &flow::v4_closed_form(&u.inner).map_err(err)?)
}

/// `({F, G}, |∇F||∇G|)` for functional labels such as `"ell_1"`, `"sigma2_2"`, `"F(-0.3)"`.
#[pyfunction]
#[pyo3(signature = (u, f, g, richardson=false))]
fn bracket(py: Python<'_>, u: &PySymbol, f: &str, g: &str, richardson: bool) -> PyResult<(f64, f64)> {
    let (fa, ia) = poisson::functional_by_label(f).map_err(err)?;
    let (fb, ib) = poisson::functional_by_label(g).map_err(err)?;
    let opts = FdOptions { richardson, ..Default::default() };
    let u0 = u.inner.clone();
    py.detach(|| {
        let ga = poisson::gradient(&fa, &u0, opts)?.swap_remove(ia);
        let gb = poisson::gradient(&fb, &u0, opts)?.swap_remove(ib);
        let norm = |v: &[Complex64]| v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        Ok((poisson::bracket_of(&ga, &gb), norm(&ga) * norm(&gb)))
    })
    .map_err(err)
}

#[pyfunction]
fn involution_report<'py>(py: Python<'py>, u: &PySymbol) -> PyResult<Bound<'py, PyAny>> {
    let u0 = u.inner.clone();
    let rep = py.detach(|| poisson::involution_report(&u0)).map_err(err)?;
    to_dict(py, &rep)
}

#[pyfunction]
fn bracket_lemmas<'py>(py: Python<'py>, u: &PySymbol, x: f64, y: f64) -> PyResult<Bound<'py, PyAny>> {
    let u0 = u.inner.clone();
    let rep = py.detach(|| poisson::bracket_lemma_checks(&u0, x, y)).map_err(err)?;
    to_dict(py, &rep)
}

/// Runs a scenario config (JSON text); returns `(exit_code, report)`.
#[pyfunction]
fn run_scenario<'py>(py: Python<'py>, config: &str) -> PyResult<(i32, Bound<'py, PyAny>)> {
    let cfg = ScenarioConfig::parse(config).map_err(err)?;
    let res = py.detach(|| cli::run(&cfg)).map_err(err)?;
    Ok((res.exit_code, to_dict(py, &res.report)?))
}

#[pymodule]
pub fn szego(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("SzegoError", m.py().get_type::<SzegoError>())?;
    m.add_class::<PySymbol>()?;
    m.add_class::<PyTrajectory>()?;
    m.add_function(wrap_pyfunction!(spectrum, m)?)?;
    m.add_function(wrap_pyfunction!(numerical_ranks, m)?)?;
    m.add_function(wrap_pyfunction!(conservation_report, m)?)?;
    m.add_function(wrap_pyfunction!(series_sample, m)?)?;
    m.add_function(wrap_pyfunction!(generating_f, m)?)?;
    m.add_function(wrap_pyfunction!(identity_suite, m)?)?;
    m.add_function(wrap_pyfunction!(reconstruct, m)?)?;
    m.add_function(wrap_pyfunction!(roundtrip, m)?)?;
    m.add_function(wrap_pyfunction!(evolve, m)?)?;
    m.add_function(wrap_pyfunction!(integrate, m)?)?;
    m.add_function(wrap_pyfunction!(v4_closed_form, m)?)?;
    m.add_function(wrap_pyfunction!(bracket, m)?)?;
    m.add_function(wrap_pyfunction!(involution_report, m)?)?;
    m.add_function(wrap_pyfunction!(bracket_lemmas, m)?)?;
    m.add_function(wrap_pyfunction!(run_scenario, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
