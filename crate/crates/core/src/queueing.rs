//! The machine-repairman queue and its synchronous bounds.
//!
//! A finite population of `p` machines alternates between an up phase with
//! mean duration `z` and a single-server repair phase with mean service
//! time `s`. The exact steady-state solution comes from the mean-value
//! recursion; the synchronous regime (all requests arriving at once) yields
//! the closed-form lower bound `p / (p*s + z)` whose relative form is the
//! contention-limited speedup, and the state-dependent generalization with
//! per-request stretch `s' = c*s` yields the full two-parameter capacity
//! law with `kappa = c * sigma`. The operations here make those
//! equivalences executable so they can be checked numerically rather than
//! taken on faith.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::{ModelParams, ProcessorCount};

/// Repairman inputs: mean service time `s`, mean up time `z`, and the
/// state-dependence coefficient `c` (extra service stretch per additional
/// queued request, as a fraction of `s`).
///
/// `s = 0` is rejected everywhere because the derived serial fraction
/// `s / (s + z)` is undefined there; `z = 0` is the legitimate fully serial
/// limit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QueueParams {
    s: f64,
    z: f64,
    c: f64,
}

impl QueueParams {
    /// State-independent parameters (`c = 0`).
    pub fn new(s: f64, z: f64) -> Result<Self> {
        Self::with_state_dependence(s, z, 0.0)
    }

    pub fn with_state_dependence(s: f64, z: f64, c: f64) -> Result<Self> {
        if !s.is_finite() || s <= 0.0 {
            return Err(Error::ServiceTime(s));
        }
        if !z.is_finite() || z < 0.0 {
            return Err(Error::UpTime(z));
        }
        if !c.is_finite() || c < 0.0 {
            return Err(Error::StateDependence(c));
        }
        Ok(Self { s, z, c })
    }

    pub fn service_time(&self) -> f64 {
        self.s
    }

    pub fn up_time(&self) -> f64 {
        self.z
    }

    pub fn state_dependence(&self) -> f64 {
        self.c
    }

    /// Serial fraction `s / (s + z)`.
    ///
    /// Determined by `s` and `z` alone; the state-dependence coefficient
    /// never enters. Tends to 0 as `s -> 0` and to 1 as `z -> 0`.
    pub fn serial_fraction(&self) -> f64 {
        self.s / (self.s + self.z)
    }

    /// Service ratio `z / s`, identically `(1 - sigma) / sigma`.
    pub fn service_ratio(&self) -> f64 {
        self.z / self.s
    }

    /// The capacity-law parameters implied by these queue inputs:
    /// `sigma = s/(s+z)` and `kappa = c * sigma`.
    pub fn usl_params(&self) -> Result<ModelParams> {
        let sigma = self.serial_fraction();
        ModelParams::new(sigma, self.c * sigma)
    }
}

/// Exact steady-state solution of the repairman for populations 1..=p:
/// per-population throughput `x(n)`, repair-station residence `r(n)`, and
/// mean number in repair `q(n)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueueSolution {
    throughput: Vec<f64>,
    residence: Vec<f64>,
    queue_length: Vec<f64>,
}

impl QueueSolution {
    pub fn population(&self) -> u32 {
        self.throughput.len() as u32
    }

    /// Throughput with population `n` (1-indexed, `n <= p`).
    pub fn x(&self, n: u32) -> f64 {
        self.throughput[(n - 1) as usize]
    }

    /// Mean residence at the repair station with population `n`.
    pub fn r(&self, n: u32) -> f64 {
        self.residence[(n - 1) as usize]
    }

    /// Mean number down (queued or in service) with population `n`.
    pub fn q(&self, n: u32) -> f64 {
        self.queue_length[(n - 1) as usize]
    }

    pub fn throughputs(&self) -> &[f64] {
        &self.throughput
    }

    pub fn residences(&self) -> &[f64] {
        &self.residence
    }

    pub fn queue_lengths(&self) -> &[f64] {
        &self.queue_length
    }
}

/// Exact mean-value solution of the state-independent repairman.
///
/// Builds up from the empty system: `r(n) = s * (1 + q(n-1))`,
/// `x(n) = n / (r(n) + z)`, `q(n) = x(n) * r(n)`. Population balance
/// `n = q(n) + z * x(n)` holds by construction. State dependence is not
/// part of the exact asynchronous solution, so `c` is ignored here.
pub fn exact_repairman(params: &QueueParams, p: ProcessorCount) -> QueueSolution {
    let count = p.get() as usize;
    let mut throughput = Vec::with_capacity(count);
    let mut residence = Vec::with_capacity(count);
    let mut queue_length = Vec::with_capacity(count);
    let mut q_prev = 0.0;
    for n in 1..=count {
        let r = params.s * (1.0 + q_prev);
        let x = n as f64 / (r + params.z);
        let q = x * r;
        throughput.push(x);
        residence.push(r);
        queue_length.push(q);
        q_prev = q;
    }
    QueueSolution {
        throughput,
        residence,
        queue_length,
    }
}

/// Synchronous throughput bound `p / (p*s + z)`.
///
/// The regime where all `p` machines enqueue at once, so one is in service
/// and `p - 1` wait: residence is `p*s` and the round trip `p*s + z`. This
/// never exceeds the exact steady-state throughput.
pub fn synchronous_throughput(params: &QueueParams, p: ProcessorCount) -> f64 {
    let p = p.as_f64();
    p / (p * params.s + params.z)
}

/// The two algebraic routes to the contention-limited speedup.
///
/// Left path: partition one task into `p` subtasks (`z -> z/p`, per-subtask
/// service `s/p`, so the synchronous residence collapses back to `s`),
/// giving `(s + z) / (s + z/p)`. Right path: keep `p` whole tasks and scale
/// the synchronous service to `p*s`, giving `p*(s + z) / (p*s + z)`. Both
/// equal `amdahl_speedup(s/(s+z), p)`; they are returned separately so the
/// identity can be checked numerically.
pub fn duality_paths(params: &QueueParams, p: ProcessorCount) -> (f64, f64) {
    let p = p.as_f64();
    let (s, z) = (params.s, params.z);
    let left = (s + z) / (s + z / p);
    let right = p * (s + z) / (p * s + z);
    (left, right)
}

/// Aggregate residence under synchronous state-dependent service:
/// `r(p) = p * (s + (p-1) * s')` with `s' = c * s`.
///
/// A single request is never stretched, so `r(1) = s` for every `c`.
pub fn state_dependent_residence(params: &QueueParams, p: ProcessorCount) -> f64 {
    let p = p.as_f64();
    p * (params.s + (p - 1.0) * params.c * params.s)
}

/// Synchronous relative capacity of the state-dependent repairman:
/// `p * (s + z) / (p*s + c*p*(p-1)*s + z)`.
///
/// This equals `ModelParams::capacity` with `sigma = s/(s+z)` and
/// `kappa = c*sigma` — the queue-side route to the two-parameter capacity
/// law. With `c = 0` it reduces to the contention-limited speedup.
pub fn usl_from_queue(params: &QueueParams, p: ProcessorCount) -> f64 {
    let p = p.as_f64();
    let (s, z, c) = (params.s, params.z, params.c);
    p * (s + z) / (p * s + c * p * (p - 1.0) * s + z)
}

/// Relative capacity after rescaling the up time `z -> p*z` in the
/// synchronous bound: `p * (s + p*z) / (p*s + p*z)`.
///
/// Equals the scaled-workload speedup `sigma + p - sigma*p` with
/// `sigma = s/(s+z)`.
pub fn gustafson_from_queue(params: &QueueParams, p: ProcessorCount) -> f64 {
    let p = p.as_f64();
    let (s, z) = (params.s, params.z);
    p * (s + p * z) / (p * s + p * z)
}

/// Stationary probability of the serial state in a two-state chain with
/// transition rates `lambda_a` (parallel to serial) and `lambda_b` (serial
/// to parallel): `lambda_a / (lambda_a + lambda_b)`.
///
/// With `lambda_a = 1/z` and `lambda_b = 1/s` this is exactly the serial
/// fraction `s / (s + z)`: the rate *out of* the parallel state sits in the
/// numerator.
pub fn markov_serial_fraction(lambda_a: f64, lambda_b: f64) -> Result<f64> {
    if !lambda_a.is_finite() || lambda_a <= 0.0 {
        return Err(Error::TransitionRate(lambda_a));
    }
    if !lambda_b.is_finite() || lambda_b <= 0.0 {
        return Err(Error::TransitionRate(lambda_b));
    }
    Ok(lambda_a / (lambda_a + lambda_b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{amdahl_speedup, gustafson_speedup};
    use approx::assert_relative_eq;

    fn pc(p: u32) -> ProcessorCount {
        ProcessorCount::new(p).unwrap()
    }

    #[test]
    fn params_validation() {
        assert!(QueueParams::new(0.0, 1.0).is_err());
        assert!(QueueParams::new(-1.0, 1.0).is_err());
        assert!(QueueParams::new(1.0, -0.5).is_err());
        assert!(QueueParams::with_state_dependence(1.0, 1.0, -0.1).is_err());
        assert!(QueueParams::new(1.0, 0.0).is_ok());
    }

    #[test]
    fn serial_fraction_and_service_ratio() {
        let p19 = QueueParams::new(1.0, 9.0).unwrap();
        assert_eq!(p19.serial_fraction(), 0.1);
        assert_eq!(p19.service_ratio(), 9.0);

        let serial = QueueParams::new(1.0, 0.0).unwrap();
        assert_eq!(serial.serial_fraction(), 1.0);
        assert_eq!(serial.service_ratio(), 0.0);

        let half = QueueParams::new(0.5, 0.5).unwrap();
        assert_eq!(half.serial_fraction(), 0.5);

        let ratio = QueueParams::new(2.0, 6.0).unwrap();
        assert_eq!(ratio.service_ratio(), 3.0);
        let sigma = ratio.serial_fraction();
        assert_relative_eq!(
            ratio.service_ratio(),
            (1.0 - sigma) / sigma,
            max_relative = 1e-15
        );
    }

    #[test]
    fn serial_fraction_ignores_state_dependence() {
        for c in [0.0, 0.5, 10.0] {
            let params = QueueParams::with_state_dependence(1.0, 9.0, c).unwrap();
            assert_eq!(params.serial_fraction(), 0.1);
        }
    }

    #[test]
    fn repairman_single_machine() {
        let busy = exact_repairman(&QueueParams::new(1.0, 0.0).unwrap(), pc(1));
        assert_eq!(busy.x(1), 1.0);
        assert_eq!(busy.r(1), 1.0);

        let idle = exact_repairman(&QueueParams::new(1.0, 9.0).unwrap(), pc(1));
        assert_eq!(idle.x(1), 0.1);
        assert_eq!(idle.r(1), 1.0);
    }

    #[test]
    fn repairman_four_machines_frozen_value() {
        // s = 1, z = 9 stays rational through the recursion:
        // x(2) = 20/101, x(3) = 101/344, x(4) = 1376/3563.
        let sol = exact_repairman(&QueueParams::new(1.0, 9.0).unwrap(), pc(4));
        assert_relative_eq!(sol.x(2), 20.0 / 101.0, max_relative = 1e-14);
        assert_relative_eq!(sol.x(3), 101.0 / 344.0, max_relative = 1e-14);
        assert_relative_eq!(sol.x(4), 1376.0 / 3563.0, max_relative = 1e-14);
    }

    #[test]
    fn repairman_population_balance() {
        let params = QueueParams::new(2.0, 6.0).unwrap();
        let sol = exact_repairman(&params, pc(64));
        for n in 1..=64u32 {
            let closure = n as f64 - sol.q(n) - params.up_time() * sol.x(n);
            assert!(closure.abs() <= 1e-12 * n as f64, "n={n}: {closure}");
            assert_relative_eq!(sol.q(n), sol.x(n) * sol.r(n), max_relative = 1e-12);
            assert!(sol.r(n) >= params.service_time());
        }
        assert_eq!(sol.r(1), params.service_time());
    }

    #[test]
    fn synchronous_bound_values() {
        assert_eq!(
            synchronous_throughput(&QueueParams::new(1.0, 0.0).unwrap(), pc(8)),
            1.0
        );
        assert_eq!(
            synchronous_throughput(&QueueParams::new(1.0, 9.0).unwrap(), pc(1)),
            0.1
        );
        assert_relative_eq!(
            synchronous_throughput(&QueueParams::new(1.0, 9.0).unwrap(), pc(10)),
            10.0 / 19.0,
            max_relative = 1e-15
        );
    }

    #[test]
    fn synchronous_bound_below_exact() {
        for (s, z) in [(1.0, 9.0), (1.0, 0.0), (2.0, 6.0), (0.1, 99.0)] {
            let params = QueueParams::new(s, z).unwrap();
            let sol = exact_repairman(&params, pc(256));
            for n in 1..=256u32 {
                let bound = synchronous_throughput(&params, pc(n));
                assert!(
                    bound <= sol.x(n) * (1.0 + 1e-15),
                    "bound {bound} above exact {} at n={n}, s={s}, z={z}",
                    sol.x(n)
                );
            }
        }
    }

    #[test]
    fn duality_paths_agree_with_amdahl() {
        let params = QueueParams::new(1.0, 9.0).unwrap();
        assert_eq!(duality_paths(&params, pc(1)), (1.0, 1.0));
        let (left, right) = duality_paths(&params, pc(11));
        assert_relative_eq!(left, 5.5, max_relative = 1e-12);
        assert_relative_eq!(right, 5.5, max_relative = 1e-12);

        let serial = QueueParams::new(1.0, 0.0).unwrap();
        assert_eq!(duality_paths(&serial, pc(64)), (1.0, 1.0));
    }

    #[test]
    fn state_dependent_residence_values() {
        let sync = QueueParams::with_state_dependence(1.0, 9.0, 0.0).unwrap();
        assert_eq!(state_dependent_residence(&sync, pc(5)), 5.0);

        let stretched = QueueParams::with_state_dependence(1.0, 9.0, 0.1).unwrap();
        assert_relative_eq!(
            state_dependent_residence(&stretched, pc(4)),
            5.2,
            max_relative = 1e-15
        );

        let single = QueueParams::with_state_dependence(2.0, 1.0, 0.5).unwrap();
        assert_eq!(state_dependent_residence(&single, pc(1)), 2.0);
    }

    #[test]
    fn usl_from_queue_matches_capacity_law() {
        let amdahl_case = QueueParams::new(1.0, 9.0).unwrap();
        assert_relative_eq!(
            usl_from_queue(&amdahl_case, pc(11)),
            5.5,
            max_relative = 1e-12
        );
        assert_eq!(usl_from_queue(&amdahl_case, pc(1)), 1.0);

        let full = QueueParams::with_state_dependence(1.0, 9.0, 0.1).unwrap();
        let model = full.usl_params().unwrap();
        assert_eq!(model.sigma(), 0.1);
        assert_relative_eq!(model.kappa(), 0.01, max_relative = 1e-15);
        for p in 1..=128u32 {
            assert_relative_eq!(
                usl_from_queue(&full, pc(p)),
                model.capacity(pc(p)),
                max_relative = 1e-12
            );
        }
    }

    #[test]
    fn kappa_above_one_is_accepted() {
        // c large enough that kappa = c * sigma exceeds 1.
        let params = QueueParams::with_state_dependence(1.0, 9.0, 20.0).unwrap();
        let model = params.usl_params().unwrap();
        assert!(model.kappa() > 1.0);
        assert!(usl_from_queue(&params, pc(32)) > 0.0);
    }

    #[test]
    fn gustafson_from_queue_matches_linear_speedup() {
        let even = QueueParams::new(1.0, 1.0).unwrap();
        assert_relative_eq!(
            gustafson_from_queue(&even, pc(4)),
            2.5,
            max_relative = 1e-12
        );

        let serial = QueueParams::new(1.0, 0.0).unwrap();
        assert_eq!(gustafson_from_queue(&serial, pc(100)), 1.0);

        let params = QueueParams::new(2.0, 6.0).unwrap();
        let sigma = params.serial_fraction();
        for p in 1..=64u32 {
            assert_relative_eq!(
                gustafson_from_queue(&params, pc(p)),
                gustafson_speedup(sigma, pc(p)).unwrap(),
                max_relative = 1e-12
            );
        }
    }

    #[test]
    fn markov_serial_fraction_values() {
        assert_relative_eq!(
            markov_serial_fraction(1.0 / 9.0, 1.0).unwrap(),
            0.1,
            max_relative = 1e-15
        );
        assert_eq!(markov_serial_fraction(1.0, 1.0).unwrap(), 0.5);
        // lambda_a = 1/z, lambda_b = 1/s for (s, z) = (2, 6).
        assert_relative_eq!(
            markov_serial_fraction(1.0 / 6.0, 1.0 / 2.0).unwrap(),
            0.25,
            max_relative = 1e-15
        );
        assert!(markov_serial_fraction(0.0, 1.0).is_err());
        assert!(markov_serial_fraction(1.0, -2.0).is_err());
    }

    #[test]
    fn markov_matches_queue_serial_fraction() {
        for (s, z) in [(1.0, 9.0), (2.0, 6.0), (0.25, 0.75)] {
            let params = QueueParams::new(s, z).unwrap();
            let via_chain = markov_serial_fraction(1.0 / z, 1.0 / s).unwrap();
            assert_relative_eq!(via_chain, params.serial_fraction(), max_relative = 1e-12);
        }
    }

    #[test]
    fn duality_cross_check_vs_amdahl_route() {
        for (s, z) in [(0.1, 0.9), (1.0, 9.0), (5.0, 1.0)] {
            let params = QueueParams::new(s, z).unwrap();
            let sigma = params.serial_fraction();
            for p in [1u32, 2, 7, 64, 1024] {
                let (left, right) = duality_paths(&params, pc(p));
                let reference = amdahl_speedup(sigma, pc(p)).unwrap();
                assert_relative_eq!(left, reference, max_relative = 1e-12);
                assert_relative_eq!(right, reference, max_relative = 1e-12);
            }
        }
    }
}
