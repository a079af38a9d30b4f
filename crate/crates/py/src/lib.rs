//! Python bindings: the torus grid, scalar fields with the norm toolbox,
//! a solver driver and the closed-form bound functionals.

use oldroyd_core::{bounds, config, data, experiment, field, lorentz, lp, semigroup, solver};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use std::sync::Arc;

fn err<T>(r: oldroyd_core::Result<T>) -> PyResult<T> {
    r.map_err(|e| PyValueError::new_err(format!("{e}")))
}

#[pyclass(name = "Grid", from_py_object)]
#[derive(Clone)]
struct PyGrid {
    inner: Arc<oldroyd_core::Grid>,
}

#[pymethods]
impl PyGrid {
    #[new]
    fn new(d: usize, n: usize, l: f64) -> PyResult<Self> {
        Ok(PyGrid {
            inner: err(oldroyd_core::Grid::new(d, n, l))?,
        })
    }

    #[getter]
    fn d(&self) -> usize {
        self.inner.dim()
    }
    #[getter]
    fn n(&self) -> usize {
        self.inner.points_per_axis()
    }
    #[getter]
    fn l(&self) -> f64 {
        self.inner.box_size()
    }
    fn modes(&self) -> usize {
        self.inner.modes()
    }

    fn __repr__(&self) -> String {
        format!("{:?}", self.inner)
    }
}

#[pyclass(name = "ScalarField")]
struct PyField {
    inner: field::Field,
    grid: Arc<oldroyd_core::Grid>,
}

impl PyField {
    fn wrap(inner: field::Field) -> Self {
        let grid = inner.grid().clone();
        PyField { inner, grid }
    }
    fn partition(&self) -> PyResult<lp::DyadicPartition> {
        err(lp::DyadicPartition::new(self.grid.clone()))
    }
}

#[pymethods]
impl PyField {
    #[staticmethod]
    fn from_values(grid: PyGrid, values: Vec<f64>) -> PyResult<Self> {
        if values.len() != grid.inner.modes() {
            return Err(PyValueError::new_err("sample count mismatch"));
        }
        Ok(PyField::wrap(field::Field::from_values(grid.inner, values)))
    }

    /// Seeded mean-free random field living in dyadic blocks [q0, q1].
    #[staticmethod]
    fn band(grid: PyGrid, seed: u64, q0: i32, q1: i32) -> Self {
        PyField::wrap(data::band_scalar(&grid.inner, seed, q0, q1))
    }

    fn values(&self) -> Vec<f64> {
        self.inner.values().to_vec()
    }

    fn mean(&self) -> f64 {
        self.inner.mean()
    }

    fn lp_norm(&self, p: f64) -> f64 {
        self.inner.lp_norm(p)
    }

    fn weak_lp_norm(&self, p: f64) -> f64 {
        lorentz::weak_lp_norm(&self.inner, p).value
    }

    /// Homogeneous Besov norm with indices (s, p, r); inf is accepted.
    fn besov_norm(&self, s: f64, p: f64, r: f64) -> PyResult<f64> {
        let part = self.partition()?;
        Ok(lp::besov_norm(&self.inner, lp::BesovParams::new(s, p, r), &part).value)
    }

    fn derivative(&self, axis: usize) -> PyResult<Self> {
        if axis >= self.grid.dim() {
            return Err(PyValueError::new_err("axis out of range"));
        }
        Ok(PyField::wrap(self.inner.derivative(axis)))
    }

    fn laplacian(&self) -> Self {
        PyField::wrap(field::laplacian(&self.inner))
    }

    fn dealias(&self) -> Self {
        PyField::wrap(field::dealias(&self.inner))
    }

    fn heat_propagate(&self, t: f64, nu: f64) -> PyResult<Self> {
        Ok(PyField::wrap(err(semigroup::heat_propagate(&self.inner, t, nu))?))
    }

    fn add(&self, other: &PyField) -> Self {
        PyField::wrap(self.inner.add(&other.inner))
    }

    fn scale(&self, c: f64) -> Self {
        PyField::wrap(self.inner.scale(c))
    }

    fn __repr__(&self) -> String {
        format!("{:?}", self.inner)
    }
}

/// Integrate the coupled system from seeded random-band data and return a
/// dict of sampled diagnostics plus the final norms.
#[pyfunction]
#[allow(clippy::too_many_arguments)]
#[pyo3(signature = (d, n, nu, a, mu, b, t_end, dt, seed=1, amplitude=0.25, sample_every=10))]
fn simulate<'py>(
    py: Python<'py>,
    d: usize,
    n: usize,
    nu: f64,
    a: f64,
    mu: f64,
    b: f64,
    t_end: f64,
    dt: f64,
    seed: u64,
    amplitude: f64,
    sample_every: usize,
) -> PyResult<Bound<'py, pyo3::types::PyDict>> {
    let grid = err(oldroyd_core::Grid::new(d, n, 2.0 * std::f64::consts::PI))?;
    let u0 = data::random_band_velocity(&grid, seed, amplitude, 0, 2);
    let tau0 = data::random_band_tensor(&grid, seed.wrapping_add(500), amplitude, 0, 2);
    let params = err(solver::Params::new(nu, a, mu, b))?;
    let state = err(solver::SimState::new(&u0, &tau0, params))?;
    let out = err(solver::run(
        state,
        solver::RunSettings {
            dt,
            t_end,
            sample_every: sample_every.max(1),
            lp_exponent: 2.0,
        },
    ))?;
    let dict = pyo3::types::PyDict::new(py);
    let rows = &out.diagnostics.rows;
    dict.set_item("times", rows.iter().map(|r| r.time).collect::<Vec<_>>())?;
    dict.set_item("tau_l2", rows.iter().map(|r| r.tau_l2).collect::<Vec<_>>())?;
    dict.set_item("u_l2_sq", rows.iter().map(|r| r.u_l2_sq).collect::<Vec<_>>())?;
    dict.set_item(
        "u_weak_d",
        rows.iter().map(|r| r.u_weak_d).collect::<Vec<_>>(),
    )?;
    dict.set_item("final_time", out.final_state.t)?;
    dict.set_item("final_tau_l2", out.final_state.tau.l2_norm())?;
    dict.set_item("final_u_max", out.final_state.u.max_abs())?;
    Ok(dict)
}

/// Run a full experiment config file; returns (all_pass, summary).
#[pyfunction]
fn run_experiment(path: &str) -> PyResult<(bool, String)> {
    let cfg = err(config::parse_config(std::path::Path::new(path)))?;
    let rep = err(experiment::run_experiment(&cfg))?;
    Ok((rep.all_pass(), rep.summary()))
}

#[pyfunction]
fn gamma(a: f64, nu: f64, t: f64) -> f64 {
    bounds::gamma(a, nu, t)
}

#[pyfunction]
fn theta_a(a: f64, t: f64) -> f64 {
    bounds::theta_a(a, t)
}

#[pyfunction]
fn theta_nu(u0_b: f64, tau0_b: f64, nu: f64, t: f64, c: f64) -> f64 {
    bounds::theta_nu(u0_b, tau0_b, nu, t, c)
}

fn norms_from(u0_l2: f64, tau0_l2: f64, u0_b: f64, tau0_b: f64) -> bounds::InitialNorms {
    bounds::InitialNorms {
        u0_l2,
        tau0_l2,
        u0_binf_m1: u0_b,
        tau0_binf_0: tau0_b,
        u0_bp: u0_l2,
        tau0_bp: tau0_l2,
        u0_weak_d: u0_l2,
        tau0_weak_d2: tau0_l2,
    }
}

#[pyfunction]
#[allow(clippy::too_many_arguments)]
fn phi(t: f64, nu: f64, a: f64, mu: f64, u0_l2: f64, tau0_l2: f64) -> PyResult<f64> {
    let params = err(solver::Params::new(nu, a, mu, 0.0))?;
    Ok(bounds::phi(t, &params, &norms_from(u0_l2, tau0_l2, 0.0, 0.0)))
}

#[pyfunction]
#[allow(clippy::too_many_arguments)]
fn upsilon1(
    t: f64,
    nu: f64,
    a: f64,
    mu: f64,
    u0_l2: f64,
    tau0_l2: f64,
    u0_b: f64,
    tau0_b: f64,
    c: f64,
) -> PyResult<f64> {
    let params = err(solver::Params::new(nu, a, mu, 0.0))?;
    err(bounds::upsilon1(
        t,
        &params,
        &norms_from(u0_l2, tau0_l2, u0_b, tau0_b),
        c,
    ))
}

#[pyfunction]
#[allow(clippy::too_many_arguments)]
fn lifespan_lower_bound(
    nu: f64,
    a: f64,
    mu: f64,
    u0_l2: f64,
    tau0_l2: f64,
    u0_b: f64,
    tau0_b: f64,
    c: f64,
) -> PyResult<f64> {
    let params = err(solver::Params::new(nu, a, mu, 0.0))?;
    Ok(bounds::lifespan_lower_bound(
        &params,
        &norms_from(u0_l2, tau0_l2, u0_b, tau0_b),
        c,
    ))
}

/// Lifespan of the quadratic Gronwall lemma for polynomial coefficients
/// (ascending order); g3 = 0 gives +inf.
#[pyfunction]
fn gronwall_t_max(g1: Vec<f64>, g2: Vec<f64>, g3: Vec<f64>) -> PyResult<f64> {
    let b = err(bounds::gronwall_lifespan(
        bounds::Poly(g1),
        bounds::Poly(g2),
        bounds::Poly(g3),
    ))?;
    Ok(b.t_max)
}

#[pymodule]
fn oldroyd_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyGrid>()?;
    m.add_class::<PyField>()?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    m.add_function(wrap_pyfunction!(gamma, m)?)?;
    m.add_function(wrap_pyfunction!(theta_a, m)?)?;
    m.add_function(wrap_pyfunction!(theta_nu, m)?)?;
    m.add_function(wrap_pyfunction!(phi, m)?)?;
    m.add_function(wrap_pyfunction!(upsilon1, m)?)?;
    m.add_function(wrap_pyfunction!(lifespan_lower_bound, m)?)?;
    m.add_function(wrap_pyfunction!(gronwall_t_max, m)?)?;
    Ok(())
}
