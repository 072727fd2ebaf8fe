//! Python bindings (`import fbm`).
//!
//! Structured results (plans, reports, sweep tables) are returned as plain
//! dictionaries. Rejected inputs raise `ValueError`; numerical failures
//! raise `RuntimeError`. Both messages start with the error code.

use fbm_core::experiment::{self, Experiment as CoreExperiment, ExperimentConfig};
use fbm_core::field_eval::{evaluate_field, evaluate_gradient};
use fbm_core::regularized_solver::{self, svd, tikhonov_solve};
use fbm_core::special_fn;
use fbm_core::trace_operator::{self, add_noise, assemble_operator};
use fbm_core::{
    BasisContext, BesselOrder, BoundaryCurve, CoefficientVector, DomainRadii, FbmError, Vec2,
};
use num_complex::Complex64;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyModule;

fn to_py_err(e: FbmError) -> PyErr {
    let message = format!("{}: {e}", e.code());
    if e.is_validation() {
        PyValueError::new_err(message)
    } else {
        PyRuntimeError::new_err(message)
    }
}

trait OrPy<T> {
    fn or_py(self) -> PyResult<T>;
}

impl<T> OrPy<T> for fbm_core::Result<T> {
    fn or_py(self) -> PyResult<T> {
        self.map_err(to_py_err)
    }
}

/// Serializes through JSON into native Python objects.
fn to_python<'py, T: serde::Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    PyModule::import(py, "json")?.call_method1("loads", (text,))
}

fn order(n: i32) -> PyResult<BesselOrder> {
    BesselOrder::new(n).or_py()
}

/// Inscribed and circumscribed radii about the origin.
#[pyclass(name = "Radii", module = "fbm", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyRadii {
    inner: DomainRadii,
}

#[pymethods]
impl PyRadii {
    #[new]
    fn new(r_in_max: f64, r_ex_min: f64) -> PyResult<Self> {
        Ok(Self {
            inner: DomainRadii::new(r_in_max, r_ex_min).or_py()?,
        })
    }

    #[getter]
    fn r_in_max(&self) -> f64 {
        self.inner.r_in_max
    }

    #[getter]
    fn r_ex_min(&self) -> f64 {
        self.inner.r_ex_min
    }

    #[getter]
    fn tau_min(&self) -> f64 {
        self.inner.tau_min
    }

    fn __repr__(&self) -> String {
        format!(
            "Radii(r_in_max={}, r_ex_min={}, tau_min={})",
            self.inner.r_in_max, self.inner.r_ex_min, self.inner.tau_min
        )
    }
}

/// Closed boundary curve given by trigonometric polynomials.
#[pyclass(name = "Curve", module = "fbm", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyCurve {
    inner: BoundaryCurve,
}

#[pymethods]
impl PyCurve {
    /// `"kite"`, `"circle:R"` or `"ellipse:a,b"`.
    #[new]
    fn new(name: &str) -> PyResult<Self> {
        Ok(Self {
            inner: BoundaryCurve::named(name).or_py()?,
        })
    }

    #[staticmethod]
    fn kite() -> Self {
        Self {
            inner: BoundaryCurve::kite(),
        }
    }

    #[staticmethod]
    fn circle(radius: f64) -> PyResult<Self> {
        Ok(Self {
            inner: BoundaryCurve::circle(radius).or_py()?,
        })
    }

    #[staticmethod]
    fn ellipse(a: f64, b: f64) -> PyResult<Self> {
        Ok(Self {
            inner: BoundaryCurve::ellipse(a, b).or_py()?,
        })
    }

    /// `x1 = Σ x1_cos[j] cos(jt) + x1_sin[j] sin(jt)`, likewise for `x2`.
    #[staticmethod]
    #[pyo3(signature = (x1_cos, x2_sin, x1_sin = vec![], x2_cos = vec![]))]
    fn fourier(
        x1_cos: Vec<f64>,
        x2_sin: Vec<f64>,
        x1_sin: Vec<f64>,
        x2_cos: Vec<f64>,
    ) -> PyResult<Self> {
        let coefficients = fbm_core::geometry::FourierCoefficients {
            x1_cos,
            x1_sin,
            x2_cos,
            x2_sin,
        };
        Ok(Self {
            inner: BoundaryCurve::from_fourier(coefficients).or_py()?,
        })
    }

    #[getter]
    fn name(&self) -> String {
        self.inner.name().to_string()
    }

    fn point(&self, t: f64) -> (f64, f64) {
        let p = self.inner.point(t);
        (p.x, p.y)
    }

    fn outward_normal(&self, t: f64) -> PyResult<(f64, f64)> {
        let n = self.inner.outward_normal(t).or_py()?;
        Ok((n.x, n.y))
    }

    fn radii(&self) -> PyRadii {
        PyRadii {
            inner: self.inner.radii(),
        }
    }

    #[pyo3(signature = (grid_size = fbm_core::geometry::RADII_GRID))]
    fn compute_radii(&self, grid_size: usize) -> PyResult<PyRadii> {
        Ok(PyRadii {
            inner: self.inner.compute_radii(grid_size).or_py()?,
        })
    }

    fn signed_area(&self) -> f64 {
        self.inner.signed_area()
    }

    fn is_interior(&self, x: f64, y: f64) -> bool {
        self.inner.is_interior(Vec2::new(x, y))
    }

    fn __repr__(&self) -> String {
        format!("Curve({:?})", self.inner.name())
    }
}

#[pyfunction]
fn bessel_j(n: i32, t: f64) -> PyResult<f64> {
    special_fn::bessel_j(order(n)?, t).or_py()
}

#[pyfunction]
fn bessel_j_prime(n: i32, t: f64) -> PyResult<f64> {
    special_fn::bessel_j_prime(order(n)?, t).or_py()
}

/// Scaled Fourier-Bessel function `φ_n` with wavenumber `k` and radius `m`.
#[pyfunction]
fn basis_value(k: f64, m: f64, n: i32, x: f64, y: f64) -> PyResult<Complex64> {
    let ctx = BasisContext::new(k, m).or_py()?;
    special_fn::basis_value(&ctx, order(n)?, Vec2::new(x, y)).or_py()
}

#[pyfunction]
fn basis_gradient(k: f64, m: f64, n: i32, x: f64, y: f64) -> PyResult<(Complex64, Complex64)> {
    let ctx = BasisContext::new(k, m).or_py()?;
    let g = special_fn::basis_gradient(&ctx, order(n)?, Vec2::new(x, y)).or_py()?;
    Ok((g[0], g[1]))
}

/// A-priori choice of `N` and `alpha`, returned as a dict.
#[pyfunction]
#[pyo3(signature = (k, delta, radii, tau0, eta = 5.0))]
fn select_parameters<'py>(
    py: Python<'py>,
    k: f64,
    delta: f64,
    radii: &PyRadii,
    tau0: f64,
    eta: f64,
) -> PyResult<Bound<'py, PyAny>> {
    let plan = regularized_solver::select_parameters(k, delta, eta, &radii.inner, tau0).or_py()?;
    to_python(py, &plan)
}

/// Wavenumber, curve, radii and truncation order of one problem.
#[pyclass(name = "WaveProblem", module = "fbm")]
struct PyWaveProblem {
    inner: fbm_core::WaveProblem,
}

#[pymethods]
impl PyWaveProblem {
    #[new]
    #[pyo3(signature = (k, curve, tau0, truncation, radii = None))]
    fn new(
        k: f64,
        curve: &PyCurve,
        tau0: f64,
        truncation: usize,
        radii: Option<&PyRadii>,
    ) -> PyResult<Self> {
        let radii = radii
            .map(|r| r.inner)
            .unwrap_or_else(|| curve.inner.radii());
        Ok(Self {
            inner: fbm_core::WaveProblem::with_radii(
                k,
                curve.inner.clone(),
                radii,
                tau0,
                truncation,
            )
            .or_py()?,
        })
    }

    fn params<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_python(py, self.inner.params())
    }

    /// Weighted trace matrix as a list of rows; columns are `n = -N..N`.
    fn operator(&self, quadrature_nodes: usize) -> PyResult<Vec<Vec<Complex64>>> {
        let rule = self
            .inner
            .curve()
            .build_quadrature(quadrature_nodes)
            .or_py()?;
        let op = assemble_operator(&self.inner, &rule).or_py()?;
        Ok((0..op.matrix.nrows())
            .map(|i| op.matrix.row(i).iter().copied().collect())
            .collect())
    }

    /// Plane-wave data, optional noise and a Tikhonov solve; returns the
    /// coefficients for `n = -N..N`.
    #[pyo3(signature = (alpha, quadrature_nodes, direction = (0.5, 0.8660254037844386), delta = 0.0, seed = 1))]
    fn solve_plane_wave(
        &self,
        alpha: f64,
        quadrature_nodes: usize,
        direction: (f64, f64),
        delta: f64,
        seed: u64,
    ) -> PyResult<Vec<Complex64>> {
        let rule = self
            .inner
            .curve()
            .build_quadrature(quadrature_nodes)
            .or_py()?;
        let op = assemble_operator(&self.inner, &rule).or_py()?;
        let system = svd(&op).or_py()?;
        let data = trace_operator::plane_wave_data(
            &self.inner,
            &rule,
            Vec2::new(direction.0, direction.1),
        )
        .or_py()?;
        let noisy = add_noise(&data, delta, seed).or_py()?;
        Ok(tikhonov_solve(&system, &noisy, alpha)
            .or_py()?
            .as_slice()
            .to_vec())
    }

    fn field(&self, coefficients: Vec<Complex64>, x: f64, y: f64) -> PyResult<Complex64> {
        let c = CoefficientVector::from_vec(coefficients).or_py()?;
        evaluate_field(&self.inner, &c, Vec2::new(x, y)).or_py()
    }

    fn gradient(
        &self,
        coefficients: Vec<Complex64>,
        x: f64,
        y: f64,
    ) -> PyResult<(Complex64, Complex64)> {
        let c = CoefficientVector::from_vec(coefficients).or_py()?;
        let g = evaluate_gradient(&self.inner, &c, Vec2::new(x, y)).or_py()?;
        Ok((g[0], g[1]))
    }
}

/// A validated experiment configuration (same JSON schema as the CLI).
#[pyclass(name = "Experiment", module = "fbm")]
struct PyExperiment {
    inner: CoreExperiment,
}

#[pymethods]
impl PyExperiment {
    #[new]
    fn new(config_json: &str) -> PyResult<Self> {
        let config = ExperimentConfig::from_json(config_json).or_py()?;
        Ok(Self {
            inner: config.prepare().or_py()?,
        })
    }

    #[getter]
    fn tau0(&self) -> f64 {
        self.inner.tau0
    }

    /// Single solve; writes `report.json` and `coefficients.csv` when `out`
    /// is given. Returns the report as a dict.
    #[pyo3(signature = (out = None))]
    fn solve<'py>(
        &self,
        py: Python<'py>,
        out: Option<std::path::PathBuf>,
    ) -> PyResult<Bound<'py, PyAny>> {
        let case = py.detach(|| self.inner.run_solve()).or_py()?;
        if let Some(dir) = out {
            experiment::write_solve_outputs(&case, &self.inner, &dir).or_py()?;
        }
        to_python(py, &experiment::solve_report_json(&case, &self.inner))
    }

    #[pyo3(signature = (out = None))]
    fn sweep<'py>(
        &self,
        py: Python<'py>,
        out: Option<std::path::PathBuf>,
    ) -> PyResult<Bound<'py, PyAny>> {
        let table = py.detach(|| self.inner.run_sweep());
        if let Some(dir) = out {
            experiment::write_sweep_outputs(&table, &dir).or_py()?;
        }
        to_python(py, &table)
    }

    fn svd_study<'py>(&self, py: Python<'py>, orders: Vec<usize>) -> PyResult<Bound<'py, PyAny>> {
        let study = py.detach(|| self.inner.run_svd_study(&orders)).or_py()?;
        to_python(py, &study)
    }

    #[pyo3(signature = (k, delta, seed = 1))]
    fn trace_plot<'py>(
        &self,
        py: Python<'py>,
        k: f64,
        delta: f64,
        seed: u64,
    ) -> PyResult<Bound<'py, PyAny>> {
        let plot = py
            .detach(|| self.inner.run_trace_plot(k, delta, seed))
            .or_py()?;
        to_python(py, &plot)
    }
}

/// Solves the single case described by a JSON configuration.
#[pyfunction]
#[pyo3(signature = (config_json, out = None))]
fn solve<'py>(
    py: Python<'py>,
    config_json: &str,
    out: Option<std::path::PathBuf>,
) -> PyResult<Bound<'py, PyAny>> {
    PyExperiment::new(config_json)?.solve(py, out)
}

/// Fourier-Bessel solver for the 2D Helmholtz impedance problem.
#[pymodule]
fn fbm(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("N_MAX", special_fn::N_MAX)?;
    m.add_class::<PyRadii>()?;
    m.add_class::<PyCurve>()?;
    m.add_class::<PyWaveProblem>()?;
    m.add_class::<PyExperiment>()?;
    m.add_function(wrap_pyfunction!(bessel_j, m)?)?;
    m.add_function(wrap_pyfunction!(bessel_j_prime, m)?)?;
    m.add_function(wrap_pyfunction!(basis_value, m)?)?;
    m.add_function(wrap_pyfunction!(basis_gradient, m)?)?;
    m.add_function(wrap_pyfunction!(select_parameters, m)?)?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    Ok(())
}
