//! Python bindings. Matrices cross the boundary as nested lists of complex numbers.

use markovgeom::covariance::{markov_covariance, qfi_rate, x_map};
use markovgeom::gaussian::{coherent_overlap, complex_structure, symplectic_basis};
use markovgeom::geometry::{
    connection_form, find_gauge_equivalence, gauge_apply, horizontal_projection,
};
use markovgeom::lan::{finite_overlap, lan_convergence, limit_overlap, output_overlap_trace};
use markovgeom::lindblad::stationary_state;
use markovgeom::models;
use markovgeom::{
    CMatrix, DynamicalParams, ErgodicPoint, GaugeElement, GaussianLimitModel, LocalChart,
    QfiConvention, TangentVector, C64,
};
use pyo3::exceptions::{PyArithmeticError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

type Rows = Vec<Vec<C64>>;

fn err(e: markovgeom::Error) -> PyErr {
    match e {
        markovgeom::Error::NonFinite { .. } | markovgeom::Error::ConvergenceFailure => {
            PyArithmeticError::new_err(e.to_string())
        }
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn to_matrix(rows: &Rows) -> PyResult<CMatrix> {
    let n = rows.len();
    if n == 0 || rows.iter().any(|r| r.len() != n) {
        return Err(PyValueError::new_err("expected a non-empty square matrix"));
    }
    Ok(CMatrix::from_fn(n, n, |i, j| rows[i][j]))
}

fn to_rows(m: &CMatrix) -> Rows {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}

fn real_rows(m: &nalgebra::DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}

fn convention(name: &str) -> PyResult<QfiConvention> {
    name.parse().map_err(err)
}

#[pyclass(name = "DynamicalParams", module = "markovgeom", skip_from_py_object)]
#[derive(Clone)]
struct PyParams(DynamicalParams);

#[pymethods]
impl PyParams {
    #[new]
    fn new(h: Rows, l: Vec<Rows>) -> PyResult<Self> {
        let l = l.iter().map(to_matrix).collect::<PyResult<Vec<_>>>()?;
        Ok(Self(DynamicalParams::new(to_matrix(&h)?, l).map_err(err)?))
    }

    #[getter]
    fn dim(&self) -> usize {
        self.0.dim()
    }

    #[getter]
    fn channels(&self) -> usize {
        self.0.channels()
    }

    #[getter]
    fn h(&self) -> Rows {
        to_rows(self.0.h())
    }

    #[getter]
    fn l(&self) -> Vec<Rows> {
        self.0.l().iter().map(to_rows).collect()
    }

    fn __repr__(&self) -> String {
        format!("DynamicalParams(dim={}, channels={})", self.0.dim(), self.0.channels())
    }
}

#[pyclass(name = "TangentVector", module = "markovgeom", skip_from_py_object)]
#[derive(Clone)]
struct PyTangent(TangentVector);

#[pymethods]
impl PyTangent {
    #[new]
    fn new(dh: Rows, dl: Vec<Rows>) -> PyResult<Self> {
        let dl = dl.iter().map(to_matrix).collect::<PyResult<Vec<_>>>()?;
        Ok(Self(TangentVector::new(to_matrix(&dh)?, dl).map_err(err)?))
    }

    #[getter]
    fn dh(&self) -> Rows {
        to_rows(self.0.dh())
    }

    #[getter]
    fn dl(&self) -> Vec<Rows> {
        self.0.dl().iter().map(to_rows).collect()
    }

    fn norm(&self) -> f64 {
        self.0.norm()
    }

    fn __add__(&self, other: PyRef<'_, PyTangent>) -> Self {
        Self(self.0.add(&other.0))
    }

    fn __sub__(&self, other: PyRef<'_, PyTangent>) -> Self {
        Self(self.0.sub(&other.0))
    }

    fn __mul__(&self, s: f64) -> Self {
        Self(self.0.scale(s))
    }

    fn __rmul__(&self, s: f64) -> Self {
        Self(self.0.scale(s))
    }
}

#[pyclass(name = "ErgodicPoint", module = "markovgeom", skip_from_py_object)]
struct PyPoint(ErgodicPoint);

#[pymethods]
impl PyPoint {
    #[new]
    fn new(params: PyRef<'_, PyParams>) -> PyResult<Self> {
        Ok(Self(ErgodicPoint::new(params.0.clone()).map_err(err)?))
    }

    #[getter]
    fn params(&self) -> PyParams {
        PyParams(self.0.params().clone())
    }

    #[getter]
    fn rho(&self) -> Rows {
        to_rows(self.0.rho())
    }

    #[getter]
    fn spectral_gap(&self) -> f64 {
        self.0.spectral_gap()
    }

    fn mean(&self, x: Rows) -> PyResult<C64> {
        Ok(self.0.mean(&to_matrix(&x)?))
    }

    fn restricted_inverse(&self, x: Rows) -> PyResult<Rows> {
        Ok(to_rows(&self.0.restricted_inverse(&to_matrix(&x)?).map_err(err)?))
    }

    fn semigroup_apply(&self, t: f64, x: Rows) -> PyResult<Rows> {
        Ok(to_rows(&self.0.semigroup_apply(t, &to_matrix(&x)?).map_err(err)?))
    }
}

#[pyclass(name = "GaugeElement", module = "markovgeom", skip_from_py_object)]
struct PyGauge(GaugeElement);

#[pymethods]
impl PyGauge {
    #[new]
    fn new(w: Rows, a: f64) -> PyResult<Self> {
        Ok(Self(GaugeElement::new(to_matrix(&w)?, a).map_err(err)?))
    }

    #[getter]
    fn w(&self) -> Rows {
        to_rows(self.0.w())
    }

    #[getter]
    fn a(&self) -> f64 {
        self.0.a()
    }

    fn apply(&self, params: PyRef<'_, PyParams>) -> PyResult<PyParams> {
        Ok(PyParams(gauge_apply(&self.0, &params.0).map_err(err)?))
    }

    fn push_tangent(&self, t: PyRef<'_, PyTangent>) -> PyTangent {
        PyTangent(self.0.push_tangent(&t.0))
    }
}

#[pyclass(name = "GaussianLimitModel", module = "markovgeom", skip_from_py_object)]
struct PyGaussian(GaussianLimitModel);

#[pymethods]
impl PyGaussian {
    #[getter]
    fn f(&self) -> Vec<Vec<f64>> {
        real_rows(&self.0.f)
    }

    #[getter]
    fn sigma(&self) -> Vec<Vec<f64>> {
        real_rows(&self.0.sigma)
    }

    #[getter]
    fn basis(&self) -> Vec<PyTangent> {
        self.0.basis.iter().cloned().map(PyTangent).collect()
    }

    #[getter]
    fn dim_id(&self) -> usize {
        self.0.dim_id()
    }

    fn overlap(&self, u: Vec<f64>, u2: Vec<f64>) -> PyResult<C64> {
        coherent_overlap(&self.0, &u, &u2).map_err(err)
    }
}

#[pyclass(name = "LocalChart", module = "markovgeom", skip_from_py_object)]
struct PyChart(LocalChart);

#[pymethods]
impl PyChart {
    #[staticmethod]
    fn linear_horizontal(point: PyRef<'_, PyPoint>, tangents: Vec<PyRef<'_, PyTangent>>) -> PyResult<Self> {
        let ts: Vec<TangentVector> = tangents.iter().map(|t| t.0.clone()).collect();
        Ok(Self(LocalChart::linear_horizontal(point.0.clone(), &ts).map_err(err)?))
    }

    #[getter]
    fn dim(&self) -> usize {
        self.0.dim()
    }

    #[getter]
    fn spectral_gap(&self) -> f64 {
        self.0.base().spectral_gap()
    }

    fn finite_overlap(&self, u: Vec<f64>, u2: Vec<f64>, t: f64) -> PyResult<C64> {
        finite_overlap(&self.0, &u, &u2, t, None).map_err(err)
    }

    fn limit_overlap(&self, u: Vec<f64>, u2: Vec<f64>) -> PyResult<C64> {
        limit_overlap(&self.0, &u, &u2).map_err(err)
    }

    fn lan_convergence<'py>(
        &self,
        py: Python<'py>,
        u: Vec<f64>,
        u2: Vec<f64>,
        t_list: Vec<f64>,
    ) -> PyResult<Bound<'py, PyDict>> {
        let rep = lan_convergence(&self.0, &u, &u2, &t_list, None).map_err(err)?;
        let d = PyDict::new(py);
        d.set_item("t_values", rep.t_values)?;
        d.set_item("finite_overlaps", rep.finite_overlaps)?;
        d.set_item("errors", rep.errors)?;
        d.set_item("limit_value", rep.limit_value)?;
        d.set_item("max_abs_error", rep.max_abs_error)?;
        d.set_item("phase_matrix", real_rows(&rep.phase_matrix_used))?;
        d.set_item("phase_convention", rep.phase_convention)?;
        Ok(d)
    }
}

#[pyclass(name = "TwoLevelParams", module = "markovgeom", skip_from_py_object)]
#[derive(Clone)]
struct PyTwoLevel(models::TwoLevelParams);

#[pymethods]
impl PyTwoLevel {
    #[new]
    #[pyo3(signature = (alpha, delta, omega, theta, v = [0.0, 0.0, 0.0]))]
    fn new(alpha: f64, delta: f64, omega: f64, theta: f64, v: [f64; 3]) -> Self {
        Self(models::TwoLevelParams::new(alpha, delta, omega, theta).with_aux(v))
    }

    fn params(&self) -> PyResult<PyParams> {
        Ok(PyParams(models::two_level(&self.0).map_err(err)?))
    }

    fn tangents<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let t = models::two_level_tangents(&self.0);
        let wrap = |ts: [TangentVector; 4]| ts.into_iter().map(PyTangent).collect::<Vec<_>>();
        let d = PyDict::new(py);
        d.set_item("physical", wrap(t.physical))?;
        d.set_item("vertical", wrap(t.vertical))?;
        d.set_item("auxiliary", wrap(t.auxiliary))?;
        Ok(d)
    }

    fn symplectic_basis(&self) -> Vec<PyTangent> {
        models::two_level_symplectic_basis(&self.0)
            .into_iter()
            .map(PyTangent)
            .collect()
    }

    fn reference<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let r = models::two_level_reference(&self.0);
        let d = PyDict::new(py);
        d.set_item("gamma", r.gamma)?;
        d.set_item("xi", r.xi)?;
        d.set_item("rho_ss", to_rows(&r.rho_ss))?;
        d.set_item("fisher", r.fisher.to_vec())?;
        d.set_item("symplectic_f", r.symplectic_f.to_vec())?;
        let conn: Vec<(Rows, f64)> = r
            .connection_components
            .iter()
            .map(|x| (to_rows(x.k()), x.r()))
            .collect();
        d.set_item("connection", conn)?;
        Ok(d)
    }

    fn chart(&self) -> PyResult<PyChart> {
        Ok(PyChart(models::two_level_chart(&self.0).map_err(err)?))
    }
}

/// Ergodicity test: returns a dict with `ergodic`, `rho_ss` (or None) and `spectral_gap`.
#[pyfunction(name = "stationary_state")]
fn py_stationary_state<'py>(py: Python<'py>, params: PyRef<'_, PyParams>) -> PyResult<Bound<'py, PyDict>> {
    let rep = stationary_state(&params.0).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("ergodic", rep.ergodic)?;
    d.set_item("rho_ss", rep.stationary.as_ref().map(|r| to_rows(r.matrix())))?;
    d.set_item("zero_eigen_count", rep.zero_eigen_count)?;
    d.set_item("min_stationary_eigenvalue", rep.min_stationary_eigenvalue)?;
    d.set_item("spectral_gap", rep.spectral_gap)?;
    Ok(d)
}

/// QFI rate matrix; `convention` is `"four_x"` or `"metric"`.
#[pyfunction(name = "qfi_rate")]
fn py_qfi_rate(
    point: PyRef<'_, PyPoint>,
    tangents: Vec<PyRef<'_, PyTangent>>,
    convention: &str,
) -> PyResult<Vec<Vec<f64>>> {
    let ts: Vec<TangentVector> = tangents.iter().map(|t| t.0.clone()).collect();
    let f = qfi_rate(&point.0, &ts, self::convention(convention)?).map_err(err)?;
    Ok(real_rows(&f.matrix))
}

/// `(Ḋ, Ḋ')_D` for two tangents.
#[pyfunction(name = "markov_covariance")]
fn py_markov_covariance(
    point: PyRef<'_, PyPoint>,
    a: PyRef<'_, PyTangent>,
    b: PyRef<'_, PyTangent>,
) -> PyResult<C64> {
    let p = &point.0;
    let xa = x_map(p.params(), &a.0).map_err(err)?;
    let xb = x_map(p.params(), &b.0).map_err(err)?;
    markov_covariance(p, &xa, &xb).map_err(err)
}

/// Connection form as `(K, r)`.
#[pyfunction(name = "connection_form")]
fn py_connection_form(point: PyRef<'_, PyPoint>, t: PyRef<'_, PyTangent>) -> PyResult<(Rows, f64)> {
    let w = connection_form(&point.0, &t.0).map_err(err)?;
    Ok((to_rows(w.k()), w.r()))
}

#[pyfunction(name = "horizontal_projection")]
fn py_horizontal_projection(point: PyRef<'_, PyPoint>, t: PyRef<'_, PyTangent>) -> PyResult<PyTangent> {
    Ok(PyTangent(horizontal_projection(&point.0, &t.0).map_err(err)?))
}

#[pyfunction(name = "complex_structure")]
fn py_complex_structure(params: PyRef<'_, PyParams>, t: PyRef<'_, PyTangent>) -> PyResult<PyTangent> {
    Ok(PyTangent(complex_structure(&params.0, &t.0).map_err(err)?))
}

#[pyfunction(name = "symplectic_basis")]
#[pyo3(signature = (point, tangents, convention, complete_with_j = false))]
fn py_symplectic_basis(
    point: PyRef<'_, PyPoint>,
    tangents: Vec<PyRef<'_, PyTangent>>,
    convention: &str,
    complete_with_j: bool,
) -> PyResult<PyGaussian> {
    let ts: Vec<TangentVector> = tangents.iter().map(|t| t.0.clone()).collect();
    let model = symplectic_basis(&point.0, &ts, self::convention(convention)?, complete_with_j)
        .map_err(err)?;
    Ok(PyGaussian(model))
}

/// Returns `None` when no gauge equivalence exists, else `(W, r)`.
#[pyfunction(name = "find_gauge_equivalence")]
fn py_find_gauge_equivalence(
    p1: PyRef<'_, PyPoint>,
    p2: PyRef<'_, PyPoint>,
) -> PyResult<Option<(Rows, f64)>> {
    let wit = find_gauge_equivalence(&p1.0, &p2.0).map_err(err)?;
    Ok(match (wit.w, wit.r) {
        (Some(w), Some(r)) if wit.found => Some((to_rows(&w), r)),
        _ => None,
    })
}

#[pyfunction(name = "output_overlap_trace")]
fn py_output_overlap_trace(p1: PyRef<'_, PyPoint>, p2: PyRef<'_, PyPoint>, t: f64) -> PyResult<f64> {
    output_overlap_trace(&p1.0, &p2.0, t).map_err(err)
}

#[pymodule(name = "markovgeom")]
fn markovgeom_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyParams>()?;
    m.add_class::<PyTangent>()?;
    m.add_class::<PyPoint>()?;
    m.add_class::<PyGauge>()?;
    m.add_class::<PyGaussian>()?;
    m.add_class::<PyChart>()?;
    m.add_class::<PyTwoLevel>()?;
    m.add_function(wrap_pyfunction!(py_stationary_state, m)?)?;
    m.add_function(wrap_pyfunction!(py_qfi_rate, m)?)?;
    m.add_function(wrap_pyfunction!(py_markov_covariance, m)?)?;
    m.add_function(wrap_pyfunction!(py_connection_form, m)?)?;
    m.add_function(wrap_pyfunction!(py_horizontal_projection, m)?)?;
    m.add_function(wrap_pyfunction!(py_complex_structure, m)?)?;
    m.add_function(wrap_pyfunction!(py_symplectic_basis, m)?)?;
    m.add_function(wrap_pyfunction!(py_find_gauge_equivalence, m)?)?;
    m.add_function(wrap_pyfunction!(py_output_overlap_trace, m)?)?;
    m.add("PHASE_CONVENTION", markovgeom::lan::PHASE_CONVENTION)?;
    Ok(())
}
