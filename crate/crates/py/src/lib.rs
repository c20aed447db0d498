//! Python bindings. Grid functions cross the boundary as lists of floats
//! holding the interior nodal values.

use fracgelfand::cli::config::RunConfig;
use fracgelfand::cli::output::to_json;
use fracgelfand::gelfand::{self, BranchOptions, IterateOutcome, IterationOptions};
use fracgelfand::{identities, operator1d, specfun, stability};
use fracgelfand::{FracOperator, GridFunction, Nonlinearity, RadialFunction};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

fn py_err(e: fracgelfand::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn grid(values: Vec<f64>) -> PyResult<GridFunction> {
    GridFunction::new(values).map_err(py_err)
}

fn nonlinearity(name: &str, p: Option<f64>) -> PyResult<Nonlinearity> {
    Nonlinearity::by_name(name, p).map_err(py_err)
}

/// Collocation matrix of the fractional Laplacian on `(-1, 1)`.
#[pyclass(name = "Operator", module = "fracgelfand_py", frozen)]
struct PyOperator {
    inner: FracOperator,
}

#[pymethods]
impl PyOperator {
    #[new]
    fn new(s: f64, n_points: usize) -> PyResult<Self> {
        Ok(Self {
            inner: FracOperator::assemble(s, n_points).map_err(py_err)?,
        })
    }

    #[getter]
    fn s(&self) -> f64 {
        self.inner.s()
    }

    #[getter]
    fn n_points(&self) -> usize {
        self.inner.n_points()
    }

    #[getter]
    fn h(&self) -> f64 {
        self.inner.h()
    }

    fn nodes(&self) -> PyResult<Vec<f64>> {
        Ok(GridFunction::zeros(self.inner.n_points()).map_err(py_err)?.nodes())
    }

    /// Row-major copy of the matrix.
    fn matrix(&self) -> Vec<Vec<f64>> {
        let m = self.inner.matrix();
        (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
    }

    fn apply(&self, u: Vec<f64>) -> PyResult<Vec<f64>> {
        Ok(self.inner.apply(&grid(u)?).map_err(py_err)?.into_values())
    }

    fn solve(&self, g: Vec<f64>) -> PyResult<Vec<f64>> {
        Ok(self.inner.solve_linear(&grid(g)?).map_err(py_err)?.into_values())
    }

    fn hs_form(&self, u: Vec<f64>, v: Vec<f64>) -> PyResult<f64> {
        self.inner.hs_form(&grid(u)?, &grid(v)?).map_err(py_err)
    }

    /// `(μ1, φ1)` of the matrix minus `diag(potential)`.
    #[pyo3(signature = (potential=None))]
    fn smallest_eigenpair(&self, potential: Option<Vec<f64>>) -> PyResult<(f64, Vec<f64>)> {
        let v = potential.map(grid).transpose()?;
        let eig = stability::smallest_eigenpair(&self.inner, v.as_ref()).map_err(py_err)?;
        Ok((eig.mu1, eig.phi1.into_values()))
    }

    fn __repr__(&self) -> String {
        format!("Operator(s={}, n_points={})", self.inner.s(), self.inner.n_points())
    }
}

/// A converged point of the minimal branch.
#[pyclass(name = "BranchPoint", module = "fracgelfand_py", frozen, get_all)]
struct PyBranchPoint {
    lambda_: f64,
    u: Vec<f64>,
    sup_u: f64,
    energy: f64,
    hs_norm_sq: f64,
    mu1: f64,
    pohozaev_residual: f64,
    iterations: usize,
}

impl From<gelfand::BranchPoint> for PyBranchPoint {
    fn from(p: gelfand::BranchPoint) -> Self {
        Self {
            lambda_: p.lambda,
            sup_u: p.sup_u,
            energy: p.energy,
            hs_norm_sq: p.hs_norm_sq,
            mu1: p.mu1,
            pohozaev_residual: p.pohozaev_residual,
            iterations: p.iterations,
            u: p.u.into_values(),
        }
    }
}

#[pymethods]
impl PyBranchPoint {
    fn __repr__(&self) -> String {
        format!(
            "BranchPoint(lambda_={}, sup_u={}, mu1={})",
            self.lambda_, self.sup_u, self.mu1
        )
    }
}

#[pyfunction]
fn gamma(x: f64) -> PyResult<f64> {
    specfun::gamma(x).map_err(py_err)
}

#[pyfunction]
fn lambda0(n: u32, s: f64) -> PyResult<f64> {
    specfun::lambda0(n, s).map_err(py_err)
}

#[pyfunction]
fn hardy_constant(n: u32, s: f64) -> PyResult<f64> {
    specfun::hardy_constant(n, s).map_err(py_err)
}

/// Whether `log(1/|x|^{2s})` is semistable in dimension `n`.
#[pyfunction]
fn semistable_singular(n: u32, s: f64) -> PyResult<bool> {
    Ok(specfun::semistable_singular(n, s).map_err(py_err)?.semistable)
}

#[pyfunction]
fn critical_s(n: u32) -> Option<f64> {
    specfun::critical_s(n)
}

#[pyfunction]
fn critical_dimension(s: f64) -> PyResult<f64> {
    specfun::critical_dimension(s).map_err(py_err)
}

#[pyfunction]
fn torsion_constant(n: u32, s: f64) -> PyResult<f64> {
    operator1d::torsion_constant(n, s).map_err(py_err)
}

/// `(-Δ)^s` of a radial profile in `R^n` at radius `r`, returned as
/// `(value, error_estimate)`. `profile` is `"bump"` for `(1-ρ²)^s_+` or
/// `"log"` for `log(1/ρ^{2s})`.
#[pyfunction]
#[pyo3(signature = (n, s, profile, r, tol=1e-8))]
fn radial_evaluate(n: u32, s: f64, profile: &str, r: f64, tol: f64) -> PyResult<(f64, f64)> {
    let u = match profile {
        "bump" => RadialFunction::bump(s),
        "log" => RadialFunction::log_singular(s),
        other => return Err(PyValueError::new_err(format!("unknown profile `{other}`"))),
    };
    let eval = operator1d::radial_evaluate(n, s, &u, r, tol).map_err(py_err)?;
    Ok((eval.value, eval.error))
}

/// Minimal solution at `lambda_`, or `None` when the iteration diverges.
#[pyfunction]
#[pyo3(signature = (op, lambda_, nonlinearity="exp", p=None))]
fn minimal_solution(
    op: &PyOperator,
    lambda_: f64,
    nonlinearity: &str,
    p: Option<f64>,
) -> PyResult<Option<PyBranchPoint>> {
    let f = self::nonlinearity(nonlinearity, p)?;
    let opts = IterationOptions::for_nonlinearity(&f);
    match gelfand::monotone_iterate(&op.inner, &f, lambda_, &opts).map_err(py_err)? {
        IterateOutcome::Converged(point) => Ok(Some((*point).into())),
        IterateOutcome::Diverged { .. } => Ok(None),
    }
}

type BranchResult = (Vec<PyBranchPoint>, Option<(f64, f64)>);

/// Minimal branch as `(points, bracket)`; `bracket` is `None` until a
/// divergence has been seen.
#[pyfunction]
#[pyo3(signature = (op, nonlinearity="exp", p=None, max_points=200))]
fn compute_branch(op: &PyOperator, nonlinearity: &str, p: Option<f64>, max_points: usize) -> PyResult<BranchResult> {
    let f = self::nonlinearity(nonlinearity, p)?;
    let opts = BranchOptions {
        max_points,
        iteration: IterationOptions::for_nonlinearity(&f),
        ..BranchOptions::default()
    };
    let branch = gelfand::compute_branch(&op.inner, &f, &opts).map_err(py_err)?;
    Ok((
        branch.points.into_iter().map(Into::into).collect(),
        branch.lambda_star_bracket,
    ))
}

#[pyfunction]
#[pyo3(signature = (op, nonlinearity="exp", p=None, tol=1e-3))]
fn estimate_lambda_star(op: &PyOperator, nonlinearity: &str, p: Option<f64>, tol: f64) -> PyResult<(f64, f64)> {
    let f = self::nonlinearity(nonlinearity, p)?;
    gelfand::estimate_lambda_star(&op.inner, &f, tol, &IterationOptions::for_nonlinearity(&f)).map_err(py_err)
}

/// Relative Pohozaev residual of a solution.
#[pyfunction]
#[pyo3(signature = (op, u, lambda_, nonlinearity="exp", p=None))]
fn pohozaev_residual(op: &PyOperator, u: Vec<f64>, lambda_: f64, nonlinearity: &str, p: Option<f64>) -> PyResult<f64> {
    let f = self::nonlinearity(nonlinearity, p)?;
    let rep = identities::pohozaev_residual(&op.inner, &f, &grid(u)?, lambda_).map_err(py_err)?;
    Ok(rep.relative)
}

/// The verification suite as a JSON report.
#[pyfunction]
#[pyo3(signature = (s=0.75, n_points=256, only=Vec::new()))]
fn verify(s: f64, n_points: usize, only: Vec<String>) -> PyResult<String> {
    let config = RunConfig {
        s,
        n_points,
        ..RunConfig::default()
    };
    config.validate().map_err(|e| PyValueError::new_err(e.to_string()))?;
    let report = fracgelfand::cli::verify::run_suite(&config, &only, 1.0).map_err(py_err)?;
    Ok(to_json(&report))
}

#[pymodule]
fn fracgelfand_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyOperator>()?;
    m.add_class::<PyBranchPoint>()?;
    m.add_function(wrap_pyfunction!(gamma, m)?)?;
    m.add_function(wrap_pyfunction!(lambda0, m)?)?;
    m.add_function(wrap_pyfunction!(hardy_constant, m)?)?;
    m.add_function(wrap_pyfunction!(semistable_singular, m)?)?;
    m.add_function(wrap_pyfunction!(critical_s, m)?)?;
    m.add_function(wrap_pyfunction!(critical_dimension, m)?)?;
    m.add_function(wrap_pyfunction!(torsion_constant, m)?)?;
    m.add_function(wrap_pyfunction!(radial_evaluate, m)?)?;
    m.add_function(wrap_pyfunction!(minimal_solution, m)?)?;
    m.add_function(wrap_pyfunction!(compute_branch, m)?)?;
    m.add_function(wrap_pyfunction!(estimate_lambda_star, m)?)?;
    m.add_function(wrap_pyfunction!(pohozaev_residual, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    Ok(())
}
