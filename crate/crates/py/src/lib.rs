//! Python bindings for the `qbcharge` core.

use num_complex::Complex64;
use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyIndexError};
use pyo3::prelude::*;

use qbcharge::analysis::{self, PointResult};
use qbcharge::oracle::ChargingTime;
use qbcharge::{ergotropy, presets, runner, Error};

pub mod convert;

create_exception!(qbcharge_py, QbchargeError, PyException);

fn err(e: Error) -> PyErr {
    QbchargeError::new_err(format!("[{}] {}", e.category(), e))
}

type Rows = Vec<Vec<Complex64>>;
type SweepRow = (f64, Option<PyChargingReport>, Option<String>);

#[pyclass(name = "ModelSpec", frozen, skip_from_py_object, module = "qbcharge_py")]
#[derive(Clone)]
pub struct PyModelSpec {
    pub inner: qbcharge::ModelSpec,
}

#[pymethods]
impl PyModelSpec {
    #[new]
    #[pyo3(signature = (n, m, r, ncut = None))]
    fn new(n: usize, m: usize, r: f64, ncut: Option<usize>) -> PyResult<Self> {
        let mut spec = qbcharge::ModelSpec::new(n, m, r).map_err(err)?;
        if let Some(k) = ncut {
            spec = spec.with_ncut(k).map_err(err)?;
        }
        Ok(Self { inner: spec })
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n_chargers
    }

    #[getter]
    fn m(&self) -> usize {
        self.inner.m_cells
    }

    #[getter(R)]
    fn ratio(&self) -> f64 {
        self.inner.r()
    }

    #[getter]
    fn ncut(&self) -> usize {
        self.inner.ncut
    }

    /// Coupling `Omega` in units of `lambda`.
    #[getter]
    fn coupling(&self) -> f64 {
        self.inner.coupling()
    }

    fn __repr__(&self) -> String {
        format!(
            "ModelSpec(n={}, m={}, R={:?}, ncut={})",
            self.inner.n_chargers,
            self.inner.m_cells,
            self.inner.r(),
            self.inner.ncut
        )
    }
}

#[pyclass(name = "Scenario", frozen, skip_from_py_object, module = "qbcharge_py")]
#[derive(Clone)]
pub struct PyScenario {
    pub inner: qbcharge::Scenario,
}

#[pymethods]
impl PyScenario {
    /// Chargers in `sqrt(c_i)|1> + sqrt(1-c_i)|0>`, battery in the ground state.
    #[staticmethod]
    fn product(c: Vec<f64>) -> Self {
        Self {
            inner: qbcharge::Scenario::Product { c },
        }
    }

    #[staticmethod]
    fn residual(e1: f64) -> Self {
        Self {
            inner: qbcharge::Scenario::Residual { e1 },
        }
    }

    /// `kind` is one of psi-plus, psi-minus, phi-plus, phi-minus.
    #[staticmethod]
    fn bell(kind: &str, c1: f64) -> PyResult<Self> {
        Ok(Self {
            inner: qbcharge::Scenario::Bell {
                kind: convert::bell_kind(kind).map_err(err)?,
                c1,
            },
        })
    }

    #[staticmethod]
    fn mixed_charger(c1: f64) -> Self {
        Self {
            inner: qbcharge::Scenario::MixedCharger { c1 },
        }
    }

    #[staticmethod]
    fn mixed_battery(e1: f64) -> Self {
        Self {
            inner: qbcharge::Scenario::MixedBattery { e1 },
        }
    }

    #[getter]
    fn label(&self) -> &'static str {
        self.inner.label()
    }

    fn __repr__(&self) -> String {
        format!("Scenario({:?})", self.inner)
    }
}

#[pyclass(name = "Trajectory", frozen, module = "qbcharge_py")]
pub struct PyTrajectory {
    pub inner: qbcharge::Trajectory,
}

#[pymethods]
impl PyTrajectory {
    #[getter]
    fn times(&self) -> Vec<f64> {
        self.inner.times.clone()
    }

    #[getter]
    fn battery_ergotropy(&self) -> Vec<f64> {
        self.inner.battery_ergotropy()
    }

    #[getter]
    fn battery_incoherent(&self) -> Vec<f64> {
        self.inner.battery.iter().map(|b| b.incoherent).collect()
    }

    #[getter]
    fn battery_coherent(&self) -> Vec<f64> {
        self.inner.battery.iter().map(|b| b.coherent).collect()
    }

    #[getter]
    fn battery_energy(&self) -> Vec<f64> {
        self.inner.battery.iter().map(|b| b.mean_energy).collect()
    }

    #[getter]
    fn charger_ergotropy(&self) -> Vec<f64> {
        self.inner.charger.iter().map(|b| b.total).collect()
    }

    #[getter]
    fn charger_energy(&self) -> Vec<f64> {
        self.inner.charger.iter().map(|b| b.mean_energy).collect()
    }

    #[getter]
    fn pseudomode_occupation(&self) -> Vec<f64> {
        self.inner.pseudomode_occupation.clone()
    }

    #[getter]
    fn excitation_number(&self) -> Vec<f64> {
        self.inner.excitation_number.clone()
    }

    fn battery_state(&self, k: usize) -> PyResult<Rows> {
        let state = self
            .inner
            .battery_states
            .get(k)
            .ok_or_else(|| PyIndexError::new_err(format!("sample {k} out of range")))?;
        Ok(convert::matrix_to_rows(state))
    }

    fn charger_state(&self, k: usize) -> PyResult<Rows> {
        let state = self
            .inner
            .charger_states
            .get(k)
            .ok_or_else(|| PyIndexError::new_err(format!("sample {k} out of range")))?;
        Ok(convert::matrix_to_rows(state))
    }

    /// Battery Hamiltonian as nested lists.
    fn battery_hamiltonian(&self) -> Rows {
        convert::matrix_to_rows(&self.inner.hamiltonians().battery)
    }

    fn report(&self) -> PyChargingReport {
        analysis::analyze(&self.inner).into()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }
}

#[pyclass(name = "ChargingReport", frozen, skip_from_py_object, module = "qbcharge_py")]
#[derive(Clone)]
pub struct PyChargingReport {
    pub inner: PointResult,
}

impl From<PointResult> for PyChargingReport {
    fn from(inner: PointResult) -> Self {
        Self { inner }
    }
}

#[pymethods]
impl PyChargingReport {
    #[getter]
    fn t_bar(&self) -> f64 {
        self.inner.report.t_bar
    }

    #[getter]
    fn ergotropy(&self) -> f64 {
        self.inner.report.ergotropy_at_tbar
    }

    #[getter]
    fn incoherent(&self) -> f64 {
        self.inner.report.breakdown_at_tbar.incoherent
    }

    #[getter]
    fn coherent(&self) -> f64 {
        self.inner.report.breakdown_at_tbar.coherent
    }

    #[getter]
    fn initial_ergotropy(&self) -> f64 {
        self.inner.initial_ergotropy
    }

    /// `(time, ergotropy)` for every local maximum.
    #[getter]
    fn local_maxima(&self) -> Vec<(f64, f64)> {
        self.inner
            .report
            .local_maxima
            .iter()
            .map(|p| (p.time, p.ergotropy))
            .collect()
    }

    #[getter]
    fn which_maximum(&self) -> Option<usize> {
        self.inner.report.which_maximum
    }

    #[getter]
    fn has_interior_maximum(&self) -> bool {
        self.inner.report.has_interior_maximum()
    }

    /// Output efficiency, `None` when undefined.
    #[getter]
    fn p_eff(&self) -> Option<f64> {
        self.inner.p_eff.value()
    }

    #[getter]
    fn pcal_eff(&self) -> Option<f64> {
        self.inner.pcal_eff.value()
    }

    fn __repr__(&self) -> String {
        format!(
            "ChargingReport(t_bar={:.6}, ergotropy={:.6}, which_maximum={:?})",
            self.inner.report.t_bar, self.inner.report.ergotropy_at_tbar, self.inner.report.which_maximum
        )
    }
}

#[pyfunction]
#[pyo3(signature = (spec, scenario, dt = None, t_max = None, record_stride = 1))]
fn evolve(
    py: Python<'_>,
    spec: &PyModelSpec,
    scenario: &PyScenario,
    dt: Option<f64>,
    t_max: Option<f64>,
    record_stride: usize,
) -> PyResult<PyTrajectory> {
    let settings = convert::settings(dt, t_max, record_stride).map_err(err)?;
    let cfg = settings.resolve(&spec.inner);
    let (s, c) = (spec.inner.clone(), scenario.inner.clone());
    let inner = py.detach(move || qbcharge::evolve(&s, &c, &cfg)).map_err(err)?;
    Ok(PyTrajectory { inner })
}

#[pyfunction]
#[pyo3(signature = (spec, scenario, dt = None, t_max = None))]
fn run_point(
    py: Python<'_>,
    spec: &PyModelSpec,
    scenario: &PyScenario,
    dt: Option<f64>,
    t_max: Option<f64>,
) -> PyResult<PyChargingReport> {
    let settings = convert::settings(dt, t_max, 1).map_err(err)?;
    let (s, c) = (spec.inner.clone(), scenario.inner.clone());
    let point = py
        .detach(move || analysis::run_point(&s, &c, &settings))
        .map_err(err)?;
    Ok(point.into())
}

/// Returns `(value, report or None, error message or None)` per grid value.
#[pyfunction]
#[pyo3(signature = (axis, grid, spec, scenario, dt = None, t_max = None))]
fn sweep(
    py: Python<'_>,
    axis: &str,
    grid: Vec<f64>,
    spec: &PyModelSpec,
    scenario: &PyScenario,
    dt: Option<f64>,
    t_max: Option<f64>,
) -> PyResult<Vec<SweepRow>> {
    let axis = convert::axis(axis).map_err(err)?;
    let settings = convert::settings(dt, t_max, 1).map_err(err)?;
    let (s, c) = (spec.inner.clone(), scenario.inner.clone());
    let result = py
        .detach(move || analysis::sweep(axis, &grid, &s, &c, &settings))
        .map_err(err)?;
    Ok(result
        .points
        .into_iter()
        .map(|p| match p.outcome {
            Ok(point) => (p.value, Some(point.into()), None),
            Err(e) => (p.value, None, Some(e.to_string())),
        })
        .collect())
}

/// Bisection for the flip of `criterion` along `axis`; returns `(value, lo, hi, evaluations)`.
#[pyfunction]
#[pyo3(signature = (axis, lo, hi, spec, scenario, criterion = "exceeds-initial", baseline_n = 1, tol = analysis::CRITICAL_TOL, dt = None, t_max = None))]
#[allow(clippy::too_many_arguments)]
fn critical(
    py: Python<'_>,
    axis: &str,
    lo: f64,
    hi: f64,
    spec: &PyModelSpec,
    scenario: &PyScenario,
    criterion: &str,
    baseline_n: usize,
    tol: f64,
    dt: Option<f64>,
    t_max: Option<f64>,
) -> PyResult<(f64, f64, f64, usize)> {
    let axis = convert::axis(axis).map_err(err)?;
    let criterion = convert::criterion(criterion, baseline_n).map_err(err)?;
    let settings = convert::settings(dt, t_max, 1).map_err(err)?;
    let (s, c) = (spec.inner.clone(), scenario.inner.clone());
    let v = py
        .detach(move || analysis::critical_search(axis, (lo, hi), tol, criterion, &s, &c, &settings))
        .map_err(err)?;
    Ok((v.value, v.lo, v.hi, v.evaluations))
}

/// `(total, incoherent, coherent, mean_energy)` of `rho` under `h`.
#[pyfunction]
fn breakdown(rho: Rows, h: Rows) -> PyResult<(f64, f64, f64, f64)> {
    let rho = convert::matrix_from_rows(&rho).map_err(err)?;
    let h = convert::matrix_from_rows(&h).map_err(err)?;
    let b = ergotropy::breakdown(&rho, &h).map_err(err)?;
    Ok((b.total, b.incoherent, b.coherent, b.mean_energy))
}

#[pyfunction(name = "ergotropy")]
fn total_ergotropy(rho: Rows, h: Rows) -> PyResult<f64> {
    let rho = convert::matrix_from_rows(&rho).map_err(err)?;
    let h = convert::matrix_from_rows(&h).map_err(err)?;
    ergotropy::ergotropy(&rho, &h).map_err(err)
}

#[pyfunction]
fn passive_state(rho: Rows, h: Rows) -> PyResult<Rows> {
    let rho = convert::matrix_from_rows(&rho).map_err(err)?;
    let h = convert::matrix_from_rows(&h).map_err(err)?;
    Ok(convert::matrix_to_rows(&ergotropy::passive_state(&rho, &h).map_err(err)?))
}

/// Closed-form single-charger battery ergotropy at `lambda t`.
#[pyfunction]
fn closed_form_ergotropy(c1: f64, m: usize, r: f64, t: f64) -> f64 {
    qbcharge::SingleChargerParams::new(c1, m, r).ergotropy_mcell(t)
}

/// Closed-form charging time, `None` in the weak regime.
#[pyfunction]
fn closed_form_charging_time(c1: f64, m: usize, r: f64) -> PyResult<Option<f64>> {
    match qbcharge::SingleChargerParams::new(c1, m, r).charging_time().map_err(err)? {
        ChargingTime::Finite(t) => Ok(Some(t)),
        _ => Ok(None),
    }
}

/// Run a TOML config and return the CSV it would write.
#[pyfunction]
fn run_config(py: Python<'_>, toml: &str) -> PyResult<String> {
    let cfg = qbcharge::RunConfig::parse_toml(toml).map_err(err)?;
    let csv = py
        .detach(move || -> qbcharge::Result<Vec<u8>> {
            let result = runner::execute(&cfg)?;
            let mut buf = Vec::new();
            runner::render(&result, &mut buf)?;
            Ok(buf)
        })
        .map_err(err)?;
    Ok(String::from_utf8_lossy(&csv).into_owned())
}

#[pyfunction]
fn preset_names() -> Vec<&'static str> {
    presets::PRESETS.iter().map(|p| p.name).collect()
}

#[pyfunction]
fn preset_toml(name: &str) -> PyResult<String> {
    Ok(presets::find(name).map_err(err)?.toml())
}

#[pymodule]
fn qbcharge_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("QbchargeError", m.py().get_type::<QbchargeError>())?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_class::<PyModelSpec>()?;
    m.add_class::<PyScenario>()?;
    m.add_class::<PyTrajectory>()?;
    m.add_class::<PyChargingReport>()?;
    m.add_function(wrap_pyfunction!(evolve, m)?)?;
    m.add_function(wrap_pyfunction!(run_point, m)?)?;
    m.add_function(wrap_pyfunction!(sweep, m)?)?;
    m.add_function(wrap_pyfunction!(critical, m)?)?;
    m.add_function(wrap_pyfunction!(breakdown, m)?)?;
    m.add_function(wrap_pyfunction!(total_ergotropy, m)?)?;
    m.add_function(wrap_pyfunction!(passive_state, m)?)?;
    m.add_function(wrap_pyfunction!(closed_form_ergotropy, m)?)?;
    m.add_function(wrap_pyfunction!(closed_form_charging_time, m)?)?;
    m.add_function(wrap_pyfunction!(run_config, m)?)?;
    m.add_function(wrap_pyfunction!(preset_names, m)?)?;
    m.add_function(wrap_pyfunction!(preset_toml, m)?)?;
    Ok(())
}
