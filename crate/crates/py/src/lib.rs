//! Python bindings: the interarrival models, cadlag step paths with the
//! reflection map, the conditioned samplers, Gaussian limit paths, the test
//! statistics, and the experiment runner (returning canonical report JSON).

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use transitory_sim_core::experiments::{run_experiment, ExperimentConfig, ExperimentId};
use transitory_sim_core::gaussian::{sample_gaussian_path, GaussianKind, GaussianPathSpec};
use transitory_sim_core::reflection::{netput_gamma_n, Reflect};
use transitory_sim_core::samplers::{
    conditional_mean_mu_n, sample_conditioned_poisson_os, sample_conditioned_renewal_rejection,
};
use transitory_sim_core::{
    InterarrivalModel, PiecewiseConstantRate, RandomStream, ServiceModel, SimError, StepPath,
    TimeHorizon,
};

fn err(e: SimError) -> PyErr {
    match e {
        SimError::AcceptanceTooLow { .. } | SimError::InsufficientData(_) => {
            PyRuntimeError::new_err(e.to_string())
        }
        other => PyValueError::new_err(other.to_string()),
    }
}

fn horizon(t: f64) -> PyResult<TimeHorizon> {
    TimeHorizon::new(t).map_err(err)
}

fn service_model(family: &str, variance: Option<f64>) -> PyResult<ServiceModel> {
    match family {
        "exp" | "exponential" => Ok(ServiceModel::Exponential),
        "det" | "deterministic" => Ok(ServiceModel::Deterministic),
        "lognormal" => {
            let variance = variance
                .ok_or_else(|| PyValueError::new_err("lognormal service needs a variance"))?;
            ServiceModel::log_normal(variance).map_err(err)
        }
        other => Err(PyValueError::new_err(format!("unknown service family '{other}'"))),
    }
}

/// A parametric interarrival distribution.
#[pyclass(name = "Model", skip_from_py_object)]
#[derive(Clone)]
struct PyModel {
    inner: InterarrivalModel,
}

#[pymethods]
impl PyModel {
    #[staticmethod]
    fn exponential(rate: f64) -> PyResult<Self> {
        Ok(Self { inner: InterarrivalModel::exponential(rate).map_err(err)? })
    }

    #[staticmethod]
    fn uniform(upper: f64) -> PyResult<Self> {
        Ok(Self { inner: InterarrivalModel::uniform(upper).map_err(err)? })
    }

    #[staticmethod]
    fn gamma(shape: f64, scale: f64) -> PyResult<Self> {
        Ok(Self { inner: InterarrivalModel::gamma(shape, scale).map_err(err)? })
    }

    /// Homogeneous Poisson rate on [0, end].
    #[staticmethod]
    fn poisson_homogeneous(rate: f64, end: f64) -> PyResult<Self> {
        let r = PiecewiseConstantRate::homogeneous(rate, end).map_err(err)?;
        Ok(Self { inner: InterarrivalModel::poisson_rate_fn(r) })
    }

    /// Ramp rate slope·t on [0, end], midpoint-discretized on `segments`
    /// equal pieces.
    #[staticmethod]
    #[pyo3(signature = (slope, end, segments = 1000))]
    fn poisson_ramp(slope: f64, end: f64, segments: usize) -> PyResult<Self> {
        let r = PiecewiseConstantRate::from_rate_fn(|t| slope * t, segments, end).map_err(err)?;
        Ok(Self { inner: InterarrivalModel::poisson_rate_fn(r) })
    }

    fn cdf(&self, t: f64) -> f64 {
        self.inner.cdf(t)
    }

    fn density(&self, t: f64) -> f64 {
        self.inner.density(t)
    }

    fn hazard(&self, t: f64) -> PyResult<f64> {
        self.inner.hazard(t).map_err(err)
    }

    fn integrated_hazard(&self, t: f64) -> PyResult<f64> {
        self.inner.integrated_hazard(t).map_err(err)
    }

    fn inverse_cdf(&self, u: f64) -> PyResult<f64> {
        self.inner.inverse_cdf(u).map_err(err)
    }

    fn mean(&self) -> f64 {
        self.inner.mean()
    }

    fn variance(&self) -> f64 {
        self.inner.variance()
    }

    fn __repr__(&self) -> String {
        format!("Model({:?})", self.inner)
    }
}

/// A right-continuous piecewise-constant path on [0, horizon].
#[pyclass(name = "StepPath", skip_from_py_object)]
#[derive(Clone)]
struct PyStepPath {
    inner: StepPath,
}

#[pymethods]
impl PyStepPath {
    #[new]
    fn new(
        initial_value: f64,
        horizon: f64,
        jump_epochs: Vec<f64>,
        post_jump_values: Vec<f64>,
    ) -> PyResult<Self> {
        Ok(Self {
            inner: StepPath::new(initial_value, horizon, jump_epochs, post_jump_values)
                .map_err(err)?,
        })
    }

    fn eval(&self, t: f64) -> PyResult<f64> {
        self.inner.eval(t).map_err(err)
    }

    /// sup over [0, t] of the negative part of the path.
    fn sup_neg(&self, t: f64) -> PyResult<f64> {
        self.inner.sup_neg(t).map_err(err)
    }

    /// The Skorokhod regulator of this path.
    fn regulator(&self) -> Self {
        Self { inner: self.inner.regulator() }
    }

    /// The reflected path: itself plus its regulator, nonnegative.
    fn reflect(&self) -> Self {
        Self { inner: self.inner.reflect() }
    }

    #[getter]
    fn initial_value(&self) -> f64 {
        self.inner.initial_value()
    }

    #[getter]
    fn horizon(&self) -> f64 {
        self.inner.horizon()
    }

    #[getter]
    fn jump_epochs(&self) -> Vec<f64> {
        self.inner.jump_epochs().to_vec()
    }

    #[getter]
    fn post_jump_values(&self) -> Vec<f64> {
        self.inner.post_jump_values().to_vec()
    }

    fn __repr__(&self) -> String {
        format!(
            "StepPath(initial={}, horizon={}, jumps={})",
            self.inner.initial_value(),
            self.inner.horizon(),
            self.inner.jump_epochs().len()
        )
    }
}

/// The conditional-mean integral over [0, horizon].
#[pyfunction]
fn mu_n(model: &PyModel, n: usize, t: f64) -> PyResult<f64> {
    conditional_mean_mu_n(&model.inner, n, horizon(t)?).map_err(err)
}

/// Exact ordered-statistics draw of a conditioned Poisson sample; returns
/// the sorted event epochs.
#[pyfunction]
#[pyo3(signature = (model, n, t, seed, stream = 0))]
fn sample_conditioned_poisson(
    model: &PyModel,
    n: usize,
    t: f64,
    seed: u64,
    stream: u64,
) -> PyResult<Vec<f64>> {
    let mut rng = RandomStream::new(seed, stream).rng();
    Ok(sample_conditioned_poisson_os(&model.inner, n, horizon(t)?, &mut rng)
        .map_err(err)?
        .epochs()
        .to_vec())
}

/// Rejection draw of a conditioned renewal row; returns the n+1
/// interarrival times and the attempt count.
#[pyfunction]
#[pyo3(signature = (model, n, t, seed, stream = 0, max_attempts = 1_000_000))]
fn sample_conditioned_renewal(
    model: &PyModel,
    n: usize,
    t: f64,
    seed: u64,
    stream: u64,
    max_attempts: u64,
) -> PyResult<(Vec<f64>, u64)> {
    let mut rng = RandomStream::new(seed, stream).rng();
    let (row, attempts) =
        sample_conditioned_renewal_rejection(&model.inner, n, horizon(t)?, &mut rng, max_attempts)
            .map_err(err)?;
    Ok((row.xi().to_vec(), attempts))
}

/// One reflected transitory-queue workload path for a conditioned row.
#[pyfunction]
#[pyo3(signature = (model, n, t, seed, stream = 0, service = "exp", service_variance = None))]
#[allow(clippy::too_many_arguments)]
fn sample_workload(
    model: &PyModel,
    n: usize,
    t: f64,
    seed: u64,
    stream: u64,
    service: &str,
    service_variance: Option<f64>,
) -> PyResult<PyStepPath> {
    let service = service_model(service, service_variance)?;
    let mut rng = RandomStream::new(seed, stream).rng();
    let (row, _) =
        sample_conditioned_renewal_rejection(&model.inner, n, horizon(t)?, &mut rng, 1_000_000)
            .map_err(err)?;
    let services = service.sample_vec(n, &mut rng);
    let gamma = netput_gamma_n(&row, &services).map_err(err)?;
    Ok(PyStepPath { inner: gamma.reflect() })
}

/// Values of a Gaussian limit path on a uniform grid. Kinds: "bm",
/// "bridge", "bm_minus_bridge".
#[pyfunction]
#[pyo3(signature = (kind, grid_size, seed, stream = 0, sigma = 1.0))]
fn sample_gaussian(
    kind: &str,
    grid_size: usize,
    seed: u64,
    stream: u64,
    sigma: f64,
) -> PyResult<Vec<f64>> {
    let kind = match kind {
        "bm" => GaussianKind::BrownianMotion { sigma },
        "bridge" => GaussianKind::Bridge,
        "bm_minus_bridge" => GaussianKind::BmMinusBridge { sigma },
        other => return Err(PyValueError::new_err(format!("unknown gaussian kind '{other}'"))),
    };
    let spec = GaussianPathSpec::new(kind, grid_size).map_err(err)?;
    let mut rng = RandomStream::new(seed, stream).rng();
    Ok(sample_gaussian_path(&spec, &mut rng).map_err(err)?.values().to_vec())
}

/// Two-sample Kolmogorov–Smirnov test: returns (statistic, p_value).
#[pyfunction]
fn ks_two_sample(a: Vec<f64>, b: Vec<f64>) -> PyResult<(f64, f64)> {
    let r = transitory_sim_core::stats::ks_two_sample(&a, &b).map_err(err)?;
    Ok((r.statistic, r.p_value))
}

/// Pearson chi-square with tail pooling: returns (statistic, p_value, dof).
#[pyfunction]
fn chi_square(counts: Vec<u64>, expected: Vec<f64>) -> PyResult<(f64, f64, usize)> {
    let r = transitory_sim_core::stats::chi_square_gof(&counts, &expected).map_err(err)?;
    Ok((r.statistic, r.p_value, r.dof))
}

/// Run a named verification experiment and return the canonical report
/// JSON. Optional overrides mirror the CLI flags.
#[pyfunction]
#[pyo3(signature = (experiment, seed, n = None, reps = None, grid = None))]
fn run_verification(
    experiment: &str,
    seed: u64,
    n: Option<Vec<usize>>,
    reps: Option<usize>,
    grid: Option<usize>,
) -> PyResult<String> {
    let id = ExperimentId::parse(experiment)
        .ok_or_else(|| PyValueError::new_err(format!("unknown experiment '{experiment}'")))?;
    let mut config = ExperimentConfig::defaults(id, seed);
    if let Some(n_list) = n {
        config.n_list = n_list;
    }
    if let Some(reps) = reps {
        config.replications = reps;
    }
    if let Some(grid) = grid {
        config.grid_size = grid;
    }
    Ok(run_experiment(&config).map_err(err)?.to_canonical_json())
}

#[pymodule]
fn transitory_sim(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyModel>()?;
    m.add_class::<PyStepPath>()?;
    m.add_function(wrap_pyfunction!(mu_n, m)?)?;
    m.add_function(wrap_pyfunction!(sample_conditioned_poisson, m)?)?;
    m.add_function(wrap_pyfunction!(sample_conditioned_renewal, m)?)?;
    m.add_function(wrap_pyfunction!(sample_workload, m)?)?;
    m.add_function(wrap_pyfunction!(sample_gaussian, m)?)?;
    m.add_function(wrap_pyfunction!(ks_two_sample, m)?)?;
    m.add_function(wrap_pyfunction!(chi_square, m)?)?;
    m.add_function(wrap_pyfunction!(run_verification, m)?)?;
    Ok(())
}
