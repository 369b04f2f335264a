//! Python bindings for the uslkit scalability toolkit.
//!
//! Thin wrappers over the core crate: scalar model evaluations come back as
//! floats, the repairman solution as a dict of per-population arrays, and
//! fitting/simulation results as small result classes. Domain violations
//! raise `ValueError`.

use std::collections::HashMap;

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use uslkit::models::ProcessorCount;
use uslkit::queueing::QueueParams;
use uslkit::simulator::{Dist, SimConfig, SyncMode};

fn value_err(err: uslkit::Error) -> PyErr {
    PyValueError::new_err(err.to_string())
}

fn count(p: u32) -> PyResult<ProcessorCount> {
    ProcessorCount::new(p).map_err(value_err)
}

fn model(sigma: f64, kappa: f64) -> PyResult<uslkit::ModelParams> {
    uslkit::ModelParams::new(sigma, kappa).map_err(value_err)
}

fn queue(s: f64, z: f64, c: f64) -> PyResult<QueueParams> {
    QueueParams::with_state_dependence(s, z, c).map_err(value_err)
}

/// Capacity maximum: real-valued location, integer argmax, and the
/// capacity attained there.
#[pyclass(name = "Peak", get_all, frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyPeak {
    location: f64,
    argmax: u32,
    capacity: f64,
}

#[pymethods]
impl PyPeak {
    fn __repr__(&self) -> String {
        format!(
            "Peak(location={}, argmax={}, capacity={})",
            self.location, self.argmax, self.capacity
        )
    }
}

impl From<uslkit::Peak> for PyPeak {
    fn from(peak: uslkit::Peak) -> Self {
        Self {
            location: peak.location,
            argmax: peak.argmax.get(),
            capacity: peak.capacity,
        }
    }
}

#[pyclass(name = "CandidateFit", get_all, frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyCandidate {
    family: String,
    sigma: f64,
    kappa: f64,
    rss: f64,
    r_squared: f64,
    score: Option<f64>,
    converged: bool,
}

impl From<uslkit::fitting::CandidateFit> for PyCandidate {
    fn from(fit: uslkit::fitting::CandidateFit) -> Self {
        Self {
            family: fit.family.to_string(),
            sigma: fit.params.sigma(),
            kappa: fit.params.kappa(),
            rss: fit.rss,
            r_squared: fit.r_squared,
            score: fit.score,
            converged: fit.converged,
        }
    }
}

#[pyclass(name = "FitResult", get_all, frozen)]
struct PyFitResult {
    sigma: f64,
    kappa: f64,
    x1_used: f64,
    rss: f64,
    r_squared: f64,
    p_star: Option<PyPeak>,
    model_choice: String,
    candidates: Vec<PyCandidate>,
    converged: bool,
    kappa_identifiability_warning: bool,
}

#[pymethods]
impl PyFitResult {
    fn __repr__(&self) -> String {
        format!(
            "FitResult(sigma={}, kappa={}, model_choice='{}')",
            self.sigma, self.kappa, self.model_choice
        )
    }
}

#[pyclass(name = "SimOutcome", get_all, frozen)]
struct PySimOutcome {
    x_hat: f64,
    r_hat: f64,
    ci_halfwidth: f64,
    analytic_reference: Option<f64>,
    tours_used: u64,
    full_queue_fraction: f64,
    serial_time_per_tour: f64,
}

#[pymethods]
impl PySimOutcome {
    fn __repr__(&self) -> String {
        format!(
            "SimOutcome(x_hat={}, ci_halfwidth={}, tours_used={})",
            self.x_hat, self.ci_halfwidth, self.tours_used
        )
    }
}

/// Contention-limited speedup `p / (1 + sigma*(p-1))`.
#[pyfunction]
fn amdahl_speedup(sigma: f64, p: u32) -> PyResult<f64> {
    uslkit::models::amdahl_speedup(sigma, count(p)?).map_err(value_err)
}

/// Saturation ceiling `1/sigma`; raises for `sigma <= 0`.
#[pyfunction]
fn amdahl_asymptote(sigma: f64) -> PyResult<f64> {
    uslkit::models::amdahl_asymptote(sigma).map_err(value_err)
}

/// Scaled-workload linear speedup `sigma + (1 - sigma)*p`.
#[pyfunction]
fn gustafson_speedup(sigma: f64, p: u32) -> PyResult<f64> {
    uslkit::models::gustafson_speedup(sigma, count(p)?).map_err(value_err)
}

/// Two-parameter relative capacity `p / (1 + sigma*(p-1) + kappa*p*(p-1))`.
#[pyfunction]
fn usl_capacity(sigma: f64, kappa: f64, p: u32) -> PyResult<f64> {
    Ok(model(sigma, kappa)?.capacity(count(p)?))
}

/// Location of the capacity maximum; raises when `kappa = 0`.
#[pyfunction]
fn usl_pstar(sigma: f64, kappa: f64) -> PyResult<PyPeak> {
    model(sigma, kappa)?
        .peak()
        .map(PyPeak::from)
        .map_err(value_err)
}

/// Pairwise-exchange latency `t1/p + kappa*(t1/2)*(p-1)`.
#[pyfunction]
fn pairwise_latency(t1: f64, kappa: f64, p: u32) -> PyResult<f64> {
    uslkit::models::pairwise_latency(t1, kappa, count(p)?).map_err(value_err)
}

/// Real minimizer `sqrt(2/kappa)` of the pairwise-exchange latency.
#[pyfunction]
fn pairwise_latency_minimum(kappa: f64) -> PyResult<f64> {
    uslkit::models::pairwise_latency_minimum(kappa).map_err(value_err)
}

/// Two-parameter latency whose inverse reproduces `usl_capacity` exactly.
#[pyfunction]
fn two_param_latency(t1: f64, sigma: f64, kappa: f64, p: u32) -> PyResult<f64> {
    let lp = uslkit::LatencyParams::new(t1, sigma, kappa).map_err(value_err)?;
    Ok(lp.latency(count(p)?))
}

/// Extrema of `p / (1 + p + p^2)` as `((1, 1/3), (-1, -1))`.
#[pyfunction]
fn simplified_extrema() -> ((f64, f64), (f64, f64)) {
    let (max, min) = uslkit::models::simplified_extrema();
    ((max.location, max.value), (min.location, min.value))
}

/// Serial fraction `s / (s + z)`.
#[pyfunction]
fn serial_fraction(s: f64, z: f64) -> PyResult<f64> {
    Ok(queue(s, z, 0.0)?.serial_fraction())
}

/// Service ratio `z / s`.
#[pyfunction]
fn service_ratio(s: f64, z: f64) -> PyResult<f64> {
    Ok(queue(s, z, 0.0)?.service_ratio())
}

/// Exact repairman solution for populations `1..=p`, as a dict with keys
/// `throughput`, `residence`, and `queue_length`.
#[pyfunction]
fn exact_repairman(s: f64, z: f64, p: u32) -> PyResult<HashMap<String, Vec<f64>>> {
    let solution = uslkit::queueing::exact_repairman(&queue(s, z, 0.0)?, count(p)?);
    let mut map = HashMap::new();
    map.insert("throughput".to_string(), solution.throughputs().to_vec());
    map.insert("residence".to_string(), solution.residences().to_vec());
    map.insert(
        "queue_length".to_string(),
        solution.queue_lengths().to_vec(),
    );
    Ok(map)
}

/// Synchronous throughput bound `p / (p*s + z)`.
#[pyfunction]
fn synchronous_throughput(s: f64, z: f64, p: u32) -> PyResult<f64> {
    Ok(uslkit::queueing::synchronous_throughput(
        &queue(s, z, 0.0)?,
        count(p)?,
    ))
}

/// Both scaling routes to the contention-limited speedup.
#[pyfunction]
fn duality_paths(s: f64, z: f64, p: u32) -> PyResult<(f64, f64)> {
    Ok(uslkit::queueing::duality_paths(
        &queue(s, z, 0.0)?,
        count(p)?,
    ))
}

/// Aggregate synchronous state-dependent residence `p*(s + (p-1)*c*s)`.
#[pyfunction]
fn state_dependent_residence(s: f64, c: f64, p: u32) -> PyResult<f64> {
    Ok(uslkit::queueing::state_dependent_residence(
        &queue(s, 0.0, c)?,
        count(p)?,
    ))
}

/// Queue-derived relative capacity; equals `usl_capacity` with
/// `sigma = s/(s+z)` and `kappa = c*sigma`.
#[pyfunction]
#[pyo3(signature = (s, z, p, c=0.0))]
fn usl_from_queue(s: f64, z: f64, p: u32, c: f64) -> PyResult<f64> {
    Ok(uslkit::queueing::usl_from_queue(
        &queue(s, z, c)?,
        count(p)?,
    ))
}

/// Relative capacity after the up-time rescaling `z -> p*z`.
#[pyfunction]
fn gustafson_from_queue(s: f64, z: f64, p: u32) -> PyResult<f64> {
    Ok(uslkit::queueing::gustafson_from_queue(
        &queue(s, z, 0.0)?,
        count(p)?,
    ))
}

/// Stationary serial-state probability `lambda_a / (lambda_a + lambda_b)`.
#[pyfunction]
fn markov_serial_fraction(lambda_a: f64, lambda_b: f64) -> PyResult<f64> {
    uslkit::queueing::markov_serial_fraction(lambda_a, lambda_b).map_err(value_err)
}

/// Fit the capacity law to `(p, throughput)` samples.
#[pyfunction]
#[pyo3(signature = (samples, baseline=None))]
fn fit(samples: Vec<(u32, f64)>, baseline: Option<f64>) -> PyResult<PyFitResult> {
    let samples: Vec<uslkit::fitting::ThroughputSample> = samples
        .into_iter()
        .map(|(p, x)| uslkit::fitting::ThroughputSample::new(p, x).map_err(value_err))
        .collect::<PyResult<_>>()?;
    let result = uslkit::fitting::fit_samples(&samples, baseline).map_err(value_err)?;
    Ok(PyFitResult {
        sigma: result.params.sigma(),
        kappa: result.params.kappa(),
        x1_used: result.x1_used,
        rss: result.rss,
        r_squared: result.r_squared,
        p_star: result.p_star.map(PyPeak::from),
        model_choice: result.model_choice.to_string(),
        candidates: result
            .candidates
            .into_iter()
            .map(PyCandidate::from)
            .collect(),
        converged: result.converged,
        kappa_identifiability_warning: result.kappa_identifiability_warning,
    })
}

/// Predicted `(p, capacity, throughput)` rows for the given parameters.
#[pyfunction]
fn predict(sigma: f64, kappa: f64, x1: f64, p_values: Vec<u32>) -> PyResult<Vec<(u32, f64, f64)>> {
    let counts: Vec<ProcessorCount> = p_values.into_iter().map(count).collect::<PyResult<_>>()?;
    let prediction =
        uslkit::fitting::predict(&model(sigma, kappa)?, x1, &counts).map_err(value_err)?;
    Ok(prediction
        .rows
        .iter()
        .map(|r| (r.p.get(), r.capacity, r.throughput))
        .collect())
}

/// Run one repairman simulation.
///
/// `service` and `uptime` use the spec syntax `det:MEAN`, `exp:MEAN`, or
/// `lognormal:MEAN:CV`; `mode` is `asynchronous`, `barrier`, or
/// `intermittent`.
#[pyfunction]
#[pyo3(signature = (p, service, uptime, mode="asynchronous", c=0.0, cycles=10_000, warmup=1_000, seed=42))]
#[allow(clippy::too_many_arguments)]
fn run_sim(
    p: u32,
    service: &str,
    uptime: &str,
    mode: &str,
    c: f64,
    cycles: u64,
    warmup: u64,
    seed: u64,
) -> PyResult<PySimOutcome> {
    let config = SimConfig {
        p,
        service: Dist::parse(service).map_err(value_err)?,
        uptime: Dist::parse(uptime).map_err(value_err)?,
        mode: SyncMode::parse(mode).map_err(value_err)?,
        state_dependence_c: c,
        cycles,
        warmup,
        seed,
    };
    let outcome = uslkit::simulator::run_sim(&config).map_err(value_err)?;
    Ok(PySimOutcome {
        x_hat: outcome.x_hat,
        r_hat: outcome.r_hat,
        ci_halfwidth: outcome.ci_halfwidth,
        analytic_reference: outcome.analytic_reference,
        tours_used: outcome.tours_used,
        full_queue_fraction: outcome.full_queue_fraction,
        serial_time_per_tour: outcome.serial_time_per_tour,
    })
}

/// Run the identity-check suite; returns `(name, max_rel_err, pass)` rows.
#[pyfunction]
#[pyo3(signature = (tolerance=1e-12))]
fn verify_identities(tolerance: f64) -> Vec<(String, f64, bool)> {
    uslkit::verify::run_all(tolerance)
        .checks
        .into_iter()
        .map(|c| (c.name, c.max_rel_err, c.pass))
        .collect()
}

#[pymodule]
fn uslkit_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyPeak>()?;
    m.add_class::<PyCandidate>()?;
    m.add_class::<PyFitResult>()?;
    m.add_class::<PySimOutcome>()?;
    m.add_function(wrap_pyfunction!(amdahl_speedup, m)?)?;
    m.add_function(wrap_pyfunction!(amdahl_asymptote, m)?)?;
    m.add_function(wrap_pyfunction!(gustafson_speedup, m)?)?;
    m.add_function(wrap_pyfunction!(usl_capacity, m)?)?;
    m.add_function(wrap_pyfunction!(usl_pstar, m)?)?;
    m.add_function(wrap_pyfunction!(pairwise_latency, m)?)?;
    m.add_function(wrap_pyfunction!(pairwise_latency_minimum, m)?)?;
    m.add_function(wrap_pyfunction!(two_param_latency, m)?)?;
    m.add_function(wrap_pyfunction!(simplified_extrema, m)?)?;
    m.add_function(wrap_pyfunction!(serial_fraction, m)?)?;
    m.add_function(wrap_pyfunction!(service_ratio, m)?)?;
    m.add_function(wrap_pyfunction!(exact_repairman, m)?)?;
    m.add_function(wrap_pyfunction!(synchronous_throughput, m)?)?;
    m.add_function(wrap_pyfunction!(duality_paths, m)?)?;
    m.add_function(wrap_pyfunction!(state_dependent_residence, m)?)?;
    m.add_function(wrap_pyfunction!(usl_from_queue, m)?)?;
    m.add_function(wrap_pyfunction!(gustafson_from_queue, m)?)?;
    m.add_function(wrap_pyfunction!(markov_serial_fraction, m)?)?;
    m.add_function(wrap_pyfunction!(fit, m)?)?;
    m.add_function(wrap_pyfunction!(predict, m)?)?;
    m.add_function(wrap_pyfunction!(run_sim, m)?)?;
    m.add_function(wrap_pyfunction!(verify_identities, m)?)?;
    Ok(())
}
