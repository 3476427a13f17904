//! Python bindings. Enumerations are passed as lowercase strings and Monte Carlo runs take
//! `trials` and `seed` directly.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use hybridnet::analytic;
use hybridnet::feasibility::{self, Noise, RegionConfig, Requirement, Storage};
use hybridnet::montecarlo::{self, OutageStatistic, TrialPlan};
use hybridnet::propagation::{self as prop, MptMode};
use hybridnet::rng::RandomStream;
use hybridnet::spatial::{self, SimWindow, DEFAULT_TRUNCATION_FACTOR};
use hybridnet::Error;

fn to_py(e: Error) -> PyErr {
    match e {
        Error::InvalidParameter(_)
        | Error::Domain(_)
        | Error::BoundInapplicable(_)
        | Error::InfeasibleEpsilon { .. }
        | Error::DivergentIntegral(_)
        | Error::NoBeacon => PyValueError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn mode(s: &str) -> PyResult<MptMode> {
    match s {
        "isotropic" => Ok(MptMode::Isotropic),
        "directed" => Ok(MptMode::Directed),
        _ => Err(PyValueError::new_err(format!(
            "mode must be 'isotropic' or 'directed', got '{s}'"
        ))),
    }
}

fn storage(s: &str) -> PyResult<Storage> {
    match s {
        "large" => Ok(Storage::Large),
        "small" => Ok(Storage::Small),
        _ => Err(PyValueError::new_err(format!(
            "storage must be 'large' or 'small', got '{s}'"
        ))),
    }
}

fn noise(s: &str) -> PyResult<Noise> {
    match s {
        "nonzero" => Ok(Noise::Nonzero),
        "interference-limited" => Ok(Noise::InterferenceLimited),
        _ => Err(PyValueError::new_err(format!(
            "noise must be 'nonzero' or 'interference-limited', got '{s}'"
        ))),
    }
}

/// Cellular when both `mpt` and `storage` are omitted, hybrid when both are given.
fn region(noise_kind: &str, mpt: Option<&str>, storage_kind: Option<&str>) -> PyResult<RegionConfig> {
    let n = noise(noise_kind)?;
    match (mpt, storage_kind) {
        (None, None) => Ok(RegionConfig::cellular(n)),
        (Some(m), Some(s)) => Ok(RegionConfig::hybrid(n, mode(m)?, storage(s)?)),
        _ => Err(PyValueError::new_err(
            "give both mpt and storage for a hybrid region, or neither",
        )),
    }
}

fn plan(trials: u64, seed: u64, truncation_factor: f64) -> TrialPlan {
    TrialPlan::new(trials, seed).with_truncation_factor(truncation_factor)
}

#[pyclass(name = "SystemParams", get_all, set_all, from_py_object)]
#[derive(Clone)]
struct PySystemParams {
    alpha: f64,
    beta: f64,
    nu: f64,
    theta: f64,
    sigma2: f64,
    omega: f64,
    z_m: f64,
    z_s: f64,
    k: usize,
    epsilon: f64,
    eta: f64,
    delta: f64,
    p_b: f64,
    p_t: f64,
}

impl From<prop::SystemParams> for PySystemParams {
    fn from(s: prop::SystemParams) -> Self {
        PySystemParams {
            alpha: s.alpha,
            beta: s.beta,
            nu: s.nu,
            theta: s.theta,
            sigma2: s.sigma2,
            omega: s.omega,
            z_m: s.z_m,
            z_s: s.z_s,
            k: s.k,
            epsilon: s.epsilon,
            eta: s.eta,
            delta: s.delta,
            p_b: s.p_b,
            p_t: s.p_t,
        }
    }
}

impl PySystemParams {
    fn get(&self) -> PyResult<prop::SystemParams> {
        let s = prop::SystemParams {
            alpha: self.alpha,
            beta: self.beta,
            nu: self.nu,
            theta: self.theta,
            sigma2: self.sigma2,
            omega: self.omega,
            z_m: self.z_m,
            z_s: self.z_s,
            k: self.k,
            epsilon: self.epsilon,
            eta: self.eta,
            delta: self.delta,
            p_b: self.p_b,
            p_t: self.p_t,
        };
        s.validate().map_err(to_py)?;
        Ok(s)
    }
}

#[pymethods]
impl PySystemParams {
    /// Every field defaults to the evaluation setting; linear powers.
    #[new]
    #[pyo3(signature = (*, alpha=None, beta=None, nu=None, theta=None, sigma2=None, omega=None, z_m=None,
        z_s=None, k=None, epsilon=None, eta=None, delta=None, p_b=None, p_t=None))]
    #[allow(clippy::too_many_arguments)]
    fn new(
        alpha: Option<f64>,
        beta: Option<f64>,
        nu: Option<f64>,
        theta: Option<f64>,
        sigma2: Option<f64>,
        omega: Option<f64>,
        z_m: Option<f64>,
        z_s: Option<f64>,
        k: Option<usize>,
        epsilon: Option<f64>,
        eta: Option<f64>,
        delta: Option<f64>,
        p_b: Option<f64>,
        p_t: Option<f64>,
    ) -> PyResult<Self> {
        let d = prop::SystemParams::default();
        let s = PySystemParams {
            alpha: alpha.unwrap_or(d.alpha),
            beta: beta.unwrap_or(d.beta),
            nu: nu.unwrap_or(d.nu),
            theta: theta.unwrap_or(d.theta),
            sigma2: sigma2.unwrap_or(d.sigma2),
            omega: omega.unwrap_or(d.omega),
            z_m: z_m.unwrap_or(d.z_m),
            z_s: z_s.unwrap_or(d.z_s),
            k: k.unwrap_or(d.k),
            epsilon: epsilon.unwrap_or(d.epsilon),
            eta: eta.unwrap_or(d.eta),
            delta: delta.unwrap_or(d.delta),
            p_b: p_b.unwrap_or(d.p_b),
            p_t: p_t.unwrap_or(d.p_t),
        };
        s.get()?;
        Ok(s)
    }

    fn __repr__(&self) -> String {
        format!(
            "SystemParams(alpha={}, beta={}, nu={}, theta={}, sigma2={}, omega={}, z_m={}, z_s={}, k={}, \
             epsilon={}, eta={}, delta={}, p_b={}, p_t={})",
            self.alpha,
            self.beta,
            self.nu,
            self.theta,
            self.sigma2,
            self.omega,
            self.z_m,
            self.z_s,
            self.k,
            self.epsilon,
            self.eta,
            self.delta,
            self.p_b,
            self.p_t
        )
    }
}

#[pyclass(name = "DeploymentParams", get_all, set_all, from_py_object)]
#[derive(Clone)]
struct PyDeploymentParams {
    p: f64,
    q: f64,
    lambda_b: f64,
    lambda_p: f64,
}

impl PyDeploymentParams {
    fn get(&self) -> PyResult<prop::DeploymentParams> {
        let d = prop::DeploymentParams::new(self.p, self.q, self.lambda_b, self.lambda_p);
        d.validate().map_err(to_py)?;
        Ok(d)
    }
}

#[pymethods]
impl PyDeploymentParams {
    #[new]
    fn new(p: f64, q: f64, lambda_b: f64, lambda_p: f64) -> PyResult<Self> {
        let d = PyDeploymentParams {
            p,
            q,
            lambda_b,
            lambda_p,
        };
        d.get()?;
        Ok(d)
    }

    fn __repr__(&self) -> String {
        format!(
            "DeploymentParams(p={}, q={}, lambda_b={}, lambda_p={})",
            self.p, self.q, self.lambda_b, self.lambda_p
        )
    }
}

/// Monte Carlo estimate with standard error and 95% interval.
#[pyclass(name = "Estimate", get_all, frozen)]
struct PyEstimate {
    value: f64,
    stderr: f64,
    trials: u64,
    ci95: (f64, f64),
}

impl From<montecarlo::Estimate> for PyEstimate {
    fn from(e: montecarlo::Estimate) -> Self {
        PyEstimate {
            value: e.value,
            stderr: e.stderr,
            trials: e.trials,
            ci95: e.ci95,
        }
    }
}

#[pymethods]
impl PyEstimate {
    fn __repr__(&self) -> String {
        format!(
            "Estimate(value={}, stderr={}, trials={})",
            self.value, self.stderr, self.trials
        )
    }
}

/// Sorted samples of the unit-density outage statistic; answers epsilon(mu) and mu(epsilon).
#[pyclass(name = "OutageStatistic", frozen)]
struct PyOutageStatistic(OutageStatistic);

#[pymethods]
impl PyOutageStatistic {
    #[new]
    #[pyo3(signature = (system, trials, seed, truncation_factor=DEFAULT_TRUNCATION_FACTOR))]
    fn new(py: Python<'_>, system: &PySystemParams, trials: u64, seed: u64, truncation_factor: f64) -> PyResult<Self> {
        let s = system.get()?;
        let p = plan(trials, seed, truncation_factor);
        py.detach(|| OutageStatistic::sample(&s, &p))
            .map(PyOutageStatistic)
            .map_err(to_py)
    }

    fn epsilon_at(&self, mu: f64) -> PyEstimate {
        self.0.epsilon_at(mu).into()
    }

    fn floor(&self) -> PyEstimate {
        self.0.floor().into()
    }

    /// Returns `(mu, (ci_low, ci_high))`.
    fn mu_for(&self, py: Python<'_>, epsilon: f64) -> PyResult<(f64, (f64, f64))> {
        let m = py.detach(|| self.0.mu_for(epsilon)).map_err(to_py)?;
        Ok((m.mu, m.ci))
    }

    fn __len__(&self) -> usize {
        self.0.samples().len()
    }
}

#[pyfunction]
fn mean_power_isotropic(q: f64, lambda_p: f64, nu: f64, beta: f64) -> PyResult<f64> {
    analytic::mean_power_isotropic(q, lambda_p, nu, beta).map_err(to_py)
}

#[pyfunction]
fn mean_power_directed(q: f64, lambda_p: f64, nu: f64, beta: f64, z_m: f64, z_s: f64) -> PyResult<f64> {
    analytic::mean_power_directed(q, lambda_p, nu, beta, z_m, z_s).map_err(to_py)
}

#[pyfunction]
fn psi(lambda_p: f64, nu: f64, beta: f64) -> PyResult<f64> {
    analytic::psi(lambda_p, nu, beta).map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (p, q, lambda_p, beta, nu, mode="isotropic", z_m=1.0))]
fn power_outage_bound(p: f64, q: f64, lambda_p: f64, beta: f64, nu: f64, mode: &str, z_m: f64) -> PyResult<f64> {
    analytic::power_outage_bound(p, q, lambda_p, beta, nu, self::mode(mode)?, z_m).map_err(to_py)
}

#[pyfunction]
fn mu_tilde(p_b: f64, eta: f64, alpha: f64) -> PyResult<f64> {
    analytic::mu_tilde(p_b, eta, alpha).map_err(to_py)
}

#[pyfunction]
fn upper_incomplete_gamma(a: f64, x: f64) -> PyResult<f64> {
    analytic::upper_incomplete_gamma(a, x).map_err(to_py)
}

/// One network snapshot as a dict of `(x, y)` lists.
#[pyfunction]
#[pyo3(signature = (deployment, seed, trial=0, truncation_factor=DEFAULT_TRUNCATION_FACTOR))]
fn sample_realization<'py>(
    py: Python<'py>,
    deployment: &PyDeploymentParams,
    seed: u64,
    trial: u64,
    truncation_factor: f64,
) -> PyResult<Bound<'py, pyo3::types::PyDict>> {
    let d = deployment.get()?;
    let window = SimWindow::for_density(d.lambda_b, truncation_factor).map_err(to_py)?;
    let r = spatial::sample_realization(&d, &window, &mut RandomStream::for_trial(seed, trial)).map_err(to_py)?;
    let xy = |v: &[spatial::Point]| v.iter().map(|p| (p.x, p.y)).collect::<Vec<_>>();
    let out = pyo3::types::PyDict::new(py);
    out.set_item("bs_points", xy(&r.bs_points))?;
    out.set_item("mobiles", xy(&r.mobiles))?;
    out.set_item("pb_points", xy(&r.pb_points))?;
    out.set_item("nearest_pb_of_typical", r.nearest_pb_of_typical)?;
    out.set_item("window_radius", window.radius)?;
    Ok(out)
}

#[pyfunction]
#[pyo3(signature = (system, deployment, trials, seed, truncation_factor=DEFAULT_TRUNCATION_FACTOR))]
fn estimate_outage(
    py: Python<'_>,
    system: &PySystemParams,
    deployment: &PyDeploymentParams,
    trials: u64,
    seed: u64,
    truncation_factor: f64,
) -> PyResult<PyEstimate> {
    let (s, d, p) = (system.get()?, deployment.get()?, plan(trials, seed, truncation_factor));
    py.detach(|| montecarlo::estimate_outage(&s, &d, &p))
        .map(Into::into)
        .map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (system, deployment, mode, trials, seed, truncation_factor=DEFAULT_TRUNCATION_FACTOR))]
fn estimate_mean_raw_power(
    py: Python<'_>,
    system: &PySystemParams,
    deployment: &PyDeploymentParams,
    mode: &str,
    trials: u64,
    seed: u64,
    truncation_factor: f64,
) -> PyResult<PyEstimate> {
    let (s, d, p, m) = (
        system.get()?,
        deployment.get()?,
        plan(trials, seed, truncation_factor),
        self::mode(mode)?,
    );
    py.detach(|| montecarlo::estimate_mean_raw_power(&s, &d, m, &p))
        .map(Into::into)
        .map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (system, deployment, threshold, mode, trials, seed, truncation_factor=DEFAULT_TRUNCATION_FACTOR))]
#[allow(clippy::too_many_arguments)]
fn estimate_power_outage(
    py: Python<'_>,
    system: &PySystemParams,
    deployment: &PyDeploymentParams,
    threshold: f64,
    mode: &str,
    trials: u64,
    seed: u64,
    truncation_factor: f64,
) -> PyResult<PyEstimate> {
    let (s, d, p, m) = (
        system.get()?,
        deployment.get()?,
        plan(trials, seed, truncation_factor),
        self::mode(mode)?,
    );
    py.detach(|| montecarlo::estimate_power_outage(&s, &d, threshold, m, &p))
        .map(Into::into)
        .map_err(to_py)
}

#[pyfunction]
fn cellular_min_power(lambda_b: f64, mu: f64, sigma2: f64, alpha: f64) -> PyResult<f64> {
    feasibility::cellular_min_power(lambda_b, mu, sigma2, alpha).map_err(to_py)
}

fn requirement(r: Requirement) -> Option<f64> {
    r.value()
}

/// Closed-form minimal beacon density, `None` where the region is empty.
#[pyfunction]
#[pyo3(signature = (lambda_b, q, system, mu, mpt, storage, noise="nonzero"))]
fn hybrid_min_pb_density(
    lambda_b: f64,
    q: f64,
    system: &PySystemParams,
    mu: f64,
    mpt: &str,
    storage: &str,
    noise: &str,
) -> PyResult<Option<f64>> {
    let c = region(noise, Some(mpt), Some(storage))?;
    feasibility::hybrid_min_pb_density(lambda_b, q, &system.get()?, mu, &c)
        .map(requirement)
        .map_err(to_py)
}

/// Simulated minimal beacon density, `None` where none was found.
#[pyfunction]
#[pyo3(signature = (lambda_b, q, system, mu, mpt, storage, trials, seed, noise="nonzero",
    truncation_factor=DEFAULT_TRUNCATION_FACTOR))]
#[allow(clippy::too_many_arguments)]
fn simulate_min_pb_density(
    py: Python<'_>,
    lambda_b: f64,
    q: f64,
    system: &PySystemParams,
    mu: f64,
    mpt: &str,
    storage: &str,
    trials: u64,
    seed: u64,
    noise: &str,
    truncation_factor: f64,
) -> PyResult<Option<f64>> {
    let c = region(noise, Some(mpt), Some(storage))?;
    let (s, p) = (system.get()?, plan(trials, seed, truncation_factor));
    py.detach(|| feasibility::simulate_min_pb_density(lambda_b, q, &s, mu, &c, &p))
        .map(requirement)
        .map_err(to_py)
}

/// Boundary over a BS-density grid: minimal `p` for cellular regions, minimal `lambda_p` for
/// hybrid ones, `inf` where infeasible.
#[pyfunction]
#[pyo3(signature = (system, mu, lambda_b_grid, q=1.0, noise="nonzero", mpt=None, storage=None))]
fn trace_boundary(
    system: &PySystemParams,
    mu: f64,
    lambda_b_grid: Vec<f64>,
    q: f64,
    noise: &str,
    mpt: Option<&str>,
    storage: Option<&str>,
) -> PyResult<Vec<f64>> {
    let c = region(noise, mpt, storage)?;
    feasibility::trace_boundary(&c, &system.get()?, mu, &lambda_b_grid, q)
        .map(|b| b.min_co_param)
        .map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (system, deployment, mu, noise="nonzero", mpt=None, storage=None))]
fn region_contains(
    system: &PySystemParams,
    deployment: &PyDeploymentParams,
    mu: f64,
    noise: &str,
    mpt: Option<&str>,
    storage: Option<&str>,
) -> PyResult<bool> {
    let c = region(noise, mpt, storage)?;
    Ok(feasibility::region_contains(&deployment.get()?, &system.get()?, mu, &c))
}

#[pymodule(name = "hybridnet")]
fn hybridnet_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_class::<PySystemParams>()?;
    m.add_class::<PyDeploymentParams>()?;
    m.add_class::<PyEstimate>()?;
    m.add_class::<PyOutageStatistic>()?;
    m.add_function(wrap_pyfunction!(mean_power_isotropic, m)?)?;
    m.add_function(wrap_pyfunction!(mean_power_directed, m)?)?;
    m.add_function(wrap_pyfunction!(psi, m)?)?;
    m.add_function(wrap_pyfunction!(power_outage_bound, m)?)?;
    m.add_function(wrap_pyfunction!(mu_tilde, m)?)?;
    m.add_function(wrap_pyfunction!(upper_incomplete_gamma, m)?)?;
    m.add_function(wrap_pyfunction!(sample_realization, m)?)?;
    m.add_function(wrap_pyfunction!(estimate_outage, m)?)?;
    m.add_function(wrap_pyfunction!(estimate_mean_raw_power, m)?)?;
    m.add_function(wrap_pyfunction!(estimate_power_outage, m)?)?;
    m.add_function(wrap_pyfunction!(cellular_min_power, m)?)?;
    m.add_function(wrap_pyfunction!(hybrid_min_pb_density, m)?)?;
    m.add_function(wrap_pyfunction!(simulate_min_pb_density, m)?)?;
    m.add_function(wrap_pyfunction!(trace_boundary, m)?)?;
    m.add_function(wrap_pyfunction!(region_contains, m)?)?;
    Ok(())
}
