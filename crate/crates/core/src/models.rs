//! Closed-form scalability models in throughput space and latency space.
//!
//! Three rational functions of the processor count `p` cover the practical
//! range of scalability behavior:
//!
//! * ideal linear scaling, `C(p) = p`;
//! * the contention-limited speedup `p / (1 + sigma*(p-1))`, bounded above
//!   by `1/sigma`;
//! * the two-parameter capacity law `p / (1 + sigma*(p-1) + kappa*p*(p-1))`,
//!   which additionally models coherency-style degradation and is the only
//!   one of the three with an interior maximum.
//!
//! Latency-space duals of the same curves live here as well, along with the
//! extrema of the unit-coefficient rational function used to probe why a
//! quadratic denominator is required at all.

use std::fmt;
use std::num::NonZeroU32;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of physical processors (or concurrent users); always at least 1.
///
/// Extrema locations are real-valued internally, but every public capacity
/// evaluation takes a discrete count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ProcessorCount(NonZeroU32);

impl ProcessorCount {
    pub fn new(p: u32) -> Result<Self> {
        NonZeroU32::new(p).map(Self).ok_or(Error::ZeroProcessors)
    }

    pub fn get(self) -> u32 {
        self.0.get()
    }

    pub fn as_f64(self) -> f64 {
        f64::from(self.0.get())
    }
}

impl TryFrom<u32> for ProcessorCount {
    type Error = Error;

    fn try_from(p: u32) -> Result<Self> {
        Self::new(p)
    }
}

impl fmt::Display for ProcessorCount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// The `(sigma, kappa)` pair defining a capacity curve.
///
/// `sigma` is the serial (contention) fraction and `kappa` the coherency
/// coefficient. `kappa = 0` degrades to the contention-only speedup and
/// `sigma = kappa = 0` to ideal linear scaling. `sigma = 1` is accepted as
/// the fully serial degenerate case; `kappa` may be arbitrarily large.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    sigma: f64,
    kappa: f64,
}

impl ModelParams {
    pub fn new(sigma: f64, kappa: f64) -> Result<Self> {
        if !sigma.is_finite() || !(0.0..=1.0).contains(&sigma) {
            return Err(Error::SigmaRange(sigma));
        }
        if !kappa.is_finite() || kappa < 0.0 {
            return Err(Error::KappaRange(kappa));
        }
        Ok(Self { sigma, kappa })
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    /// Relative capacity `p / (1 + sigma*(p-1) + kappa*p*(p-1))`.
    ///
    /// Equals 1 exactly at `p = 1` for every valid parameter pair, and
    /// reduces to [`amdahl_speedup`] when `kappa = 0`.
    pub fn capacity(&self, p: ProcessorCount) -> f64 {
        self.capacity_real(p.as_f64())
    }

    /// Capacity over a real-valued processor relaxation; used for extrema.
    pub(crate) fn capacity_real(&self, p: f64) -> f64 {
        p / (1.0 + self.sigma * (p - 1.0) + self.kappa * p * (p - 1.0))
    }

    /// Location and value of the capacity maximum.
    ///
    /// The real-valued optimum sits at `sqrt((1 - sigma) / kappa)`; the
    /// discrete argmax is whichever of its integer neighbors (clamped to
    /// `p >= 1`) yields the larger capacity, ties going to the smaller count.
    /// `kappa = 0` has no finite maximum and is reported as an error rather
    /// than a sentinel value.
    pub fn peak(&self) -> Result<Peak> {
        if self.kappa == 0.0 {
            return Err(Error::NoFiniteMaximum);
        }
        let location = ((1.0 - self.sigma) / self.kappa).sqrt();
        // Clamp into the valid discrete domain; location < 1 means the curve
        // is already retrograde at p = 1.
        let max_p = f64::from(u32::MAX - 1);
        let lo = location.floor().clamp(1.0, max_p) as u32;
        let hi = location.ceil().clamp(1.0, max_p) as u32;
        let lo = ProcessorCount::new(lo)?;
        let hi = ProcessorCount::new(hi)?;
        let (c_lo, c_hi) = (self.capacity(lo), self.capacity(hi));
        let (argmax, capacity) = if c_lo >= c_hi { (lo, c_lo) } else { (hi, c_hi) };
        Ok(Peak {
            location,
            argmax,
            capacity,
        })
    }
}

/// Capacity maximum: the real-valued optimum location, the discrete argmax,
/// and the capacity attained there.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Peak {
    pub location: f64,
    pub argmax: ProcessorCount,
    pub capacity: f64,
}

/// Latency-space parameterization: uniprocessor execution time plus the same
/// `(sigma, kappa)` pair as [`ModelParams`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatencyParams {
    t1: f64,
    params: ModelParams,
}

impl LatencyParams {
    pub fn new(t1: f64, sigma: f64, kappa: f64) -> Result<Self> {
        if !t1.is_finite() || t1 <= 0.0 {
            return Err(Error::BaseTime(t1));
        }
        Ok(Self {
            t1,
            params: ModelParams::new(sigma, kappa)?,
        })
    }

    pub fn t1(&self) -> f64 {
        self.t1
    }

    pub fn params(&self) -> ModelParams {
        self.params
    }

    /// Two-parameter execution latency
    /// `T1/p + sigma*T1*(p-1)/p + kappa*T1*(p-1)`.
    ///
    /// The quadratic coefficient absorbs the pairwise-exchange factor of 2,
    /// so `t1 / latency(p)` reproduces [`ModelParams::capacity`] identically
    /// with no parameter conversion.
    pub fn latency(&self, p: ProcessorCount) -> f64 {
        let p = p.as_f64();
        let sigma = self.params.sigma();
        let kappa = self.params.kappa();
        self.t1 / p + sigma * self.t1 * (p - 1.0) / p + kappa * self.t1 * (p - 1.0)
    }

    /// Speedup implied by the latency curve, `t1 / latency(p)`.
    pub fn speedup(&self, p: ProcessorCount) -> f64 {
        self.t1 / self.latency(p)
    }
}

/// Contention-limited speedup `p / (1 + sigma*(p-1))`.
///
/// Strictly increasing in `p` for `sigma < 1` and bounded above by
/// `1/sigma` when `sigma > 0`.
pub fn amdahl_speedup(sigma: f64, p: ProcessorCount) -> Result<f64> {
    check_sigma(sigma)?;
    let p = p.as_f64();
    Ok(p / (1.0 + sigma * (p - 1.0)))
}

/// Saturation ceiling `1/sigma` of the contention-limited speedup.
///
/// Unbounded for `sigma <= 0`, which is reported as an error rather than
/// an infinite sentinel.
pub fn amdahl_asymptote(sigma: f64) -> Result<f64> {
    check_sigma(sigma)?;
    if sigma <= 0.0 {
        return Err(Error::UnboundedAsymptote(sigma));
    }
    Ok(1.0 / sigma)
}

/// Scaled-workload speedup `sigma + (1 - sigma) * p`.
///
/// Linear in `p` with slope `1 - sigma`. Written as `p - sigma*(p-1)` so the
/// `p = 1` value is exactly 1 in floating point for every `sigma`.
pub fn gustafson_speedup(sigma: f64, p: ProcessorCount) -> Result<f64> {
    check_sigma(sigma)?;
    let p = p.as_f64();
    Ok(p - sigma * (p - 1.0))
}

/// Pairwise-exchange latency `T1/p + kappa * (T1/2) * (p-1)`.
///
/// The hyperbolic reduction plus a term linear in `p` from exchanging data
/// between `p*(p-1)/2` processor pairs; its unique real minimum sits at
/// [`pairwise_latency_minimum`].
pub fn pairwise_latency(t1: f64, kappa: f64, p: ProcessorCount) -> Result<f64> {
    if !t1.is_finite() || t1 <= 0.0 {
        return Err(Error::BaseTime(t1));
    }
    check_pairwise_kappa(kappa)?;
    let p = p.as_f64();
    Ok(t1 / p + kappa * (t1 / 2.0) * (p - 1.0))
}

/// Real-valued minimizer `sqrt(2 / kappa)` of [`pairwise_latency`].
pub fn pairwise_latency_minimum(kappa: f64) -> Result<f64> {
    check_pairwise_kappa(kappa)?;
    Ok((2.0 / kappa).sqrt())
}

/// The unit-coefficient rational function `f(p) = p / (1 + p + p^2)`.
///
/// A stripped-down capacity curve used to study invertibility and extrema;
/// defined over all real `p`.
pub fn simplified_rational(p: f64) -> f64 {
    p / (1.0 + p + p * p)
}

/// One stationary point of [`simplified_rational`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Extremum {
    pub location: f64,
    pub value: f64,
}

/// Extrema of [`simplified_rational`], found where the derivative
/// `(1 - p^2) / (1 + p + p^2)^2` vanishes: a maximum at `p = 1` and a
/// minimum at `p = -1`.
///
/// `f(1) = 1/3`; `f(-1) = -1` because the denominator evaluates to 1 there,
/// not 3.
pub fn simplified_extrema() -> (Extremum, Extremum) {
    let maximum = Extremum {
        location: 1.0,
        value: simplified_rational(1.0),
    };
    let minimum = Extremum {
        location: -1.0,
        value: simplified_rational(-1.0),
    };
    (maximum, minimum)
}

fn check_sigma(sigma: f64) -> Result<()> {
    if !sigma.is_finite() || !(0.0..=1.0).contains(&sigma) {
        return Err(Error::SigmaRange(sigma));
    }
    Ok(())
}

fn check_pairwise_kappa(kappa: f64) -> Result<()> {
    if !kappa.is_finite() || kappa <= 0.0 {
        return Err(Error::PairwiseCoefficient(kappa));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn pc(p: u32) -> ProcessorCount {
        ProcessorCount::new(p).unwrap()
    }

    #[test]
    fn amdahl_known_values() {
        assert_eq!(amdahl_speedup(0.0, pc(64)).unwrap(), 64.0);
        assert_eq!(amdahl_speedup(1.0, pc(64)).unwrap(), 1.0);
        assert_eq!(amdahl_speedup(0.1, pc(11)).unwrap(), 5.5);
    }

    #[test]
    fn amdahl_rejects_bad_sigma() {
        assert!(amdahl_speedup(-0.1, pc(4)).is_err());
        assert!(amdahl_speedup(1.1, pc(4)).is_err());
        assert!(amdahl_speedup(f64::NAN, pc(4)).is_err());
        assert!(ProcessorCount::new(0).is_err());
    }

    #[test]
    fn asymptote_values_and_domain() {
        assert_eq!(amdahl_asymptote(0.05).unwrap(), 20.0);
        assert_eq!(amdahl_asymptote(1.0).unwrap(), 1.0);
        assert_eq!(amdahl_asymptote(0.5).unwrap(), 2.0);
        assert_eq!(amdahl_asymptote(0.0), Err(Error::UnboundedAsymptote(0.0)));
    }

    #[test]
    fn gustafson_known_values() {
        assert_eq!(gustafson_speedup(0.5, pc(4)).unwrap(), 2.5);
        assert_eq!(gustafson_speedup(0.0, pc(7)).unwrap(), 7.0);
        assert_eq!(gustafson_speedup(1.0, pc(100)).unwrap(), 1.0);
    }

    #[test]
    fn gustafson_is_one_at_p1_for_awkward_sigma() {
        for sigma in [0.3, 0.1, 0.7, 1e-300, 0.999_999] {
            assert_eq!(gustafson_speedup(sigma, pc(1)).unwrap(), 1.0);
        }
    }

    #[test]
    fn capacity_known_values() {
        let ideal = ModelParams::new(0.0, 0.0).unwrap();
        assert_eq!(ideal.capacity(pc(32)), 32.0);

        let contended = ModelParams::new(0.1, 0.0).unwrap();
        assert_eq!(
            contended.capacity(pc(11)),
            amdahl_speedup(0.1, pc(11)).unwrap()
        );

        let coherency = ModelParams::new(0.0, 0.01).unwrap();
        assert_relative_eq!(coherency.capacity(pc(10)), 10.0 / 1.9, max_relative = 1e-15);
    }

    #[test]
    fn capacity_is_one_at_p1() {
        for (sigma, kappa) in [(0.0, 0.0), (0.3, 0.0), (0.7, 2.5), (1.0, 10.0)] {
            let params = ModelParams::new(sigma, kappa).unwrap();
            assert_eq!(params.capacity(pc(1)), 1.0);
        }
    }

    #[test]
    fn peak_location_and_argmax() {
        let params = ModelParams::new(0.0, 0.01).unwrap();
        let peak = params.peak().unwrap();
        assert_eq!(peak.location, 10.0);
        assert_eq!(peak.argmax.get(), 10);

        // Real optimum at an exact integer.
        let params = ModelParams::new(0.02, 0.0002).unwrap();
        let peak = params.peak().unwrap();
        assert_eq!(peak.location, 70.0);
        assert_eq!(peak.argmax.get(), 70);

        // Fully serial with strong coherency penalty: the real optimum
        // degenerates to 0 and the best admissible count is 1.
        let params = ModelParams::new(1.0, 1.0).unwrap();
        let peak = params.peak().unwrap();
        assert_eq!(peak.location, 0.0);
        assert_eq!(peak.argmax.get(), 1);

        let amdahl_only = ModelParams::new(0.1, 0.0).unwrap();
        assert_eq!(amdahl_only.peak(), Err(Error::NoFiniteMaximum));
    }

    #[test]
    fn peak_argmax_matches_brute_force() {
        let params = ModelParams::new(0.02, 0.0002).unwrap();
        let peak = params.peak().unwrap();
        let brute = (1..=200).map(|p| (p, params.capacity(pc(p)))).fold(
            (0u32, f64::NEG_INFINITY),
            |best, (p, c)| if c > best.1 { (p, c) } else { best },
        );
        assert_eq!(brute.0, peak.argmax.get());
    }

    #[test]
    fn peak_tie_breaks_to_smaller_count() {
        // kappa = 1/6 puts the real optimum between 2 and 3 with equal
        // capacity at both; the smaller count wins.
        let params = ModelParams::new(0.0, 1.0 / 6.0).unwrap();
        let peak = params.peak().unwrap();
        assert_eq!(params.capacity(pc(2)), params.capacity(pc(3)));
        assert_eq!(peak.argmax.get(), 2);
    }

    #[test]
    fn pairwise_latency_values_and_minimum() {
        assert_eq!(pairwise_latency(1.0, 2.0, pc(1)).unwrap(), 1.0);
        assert_relative_eq!(
            pairwise_latency(1.0, 0.02, pc(10)).unwrap(),
            0.19,
            max_relative = 1e-15
        );
        assert_eq!(pairwise_latency_minimum(0.02).unwrap(), 10.0);
        assert!(pairwise_latency_minimum(0.0).is_err());
    }

    #[test]
    fn pairwise_minimum_matches_grid_scan() {
        let kappa = 0.02;
        let t1 = 1.0;
        let step = 1e-4;
        let mut best = (f64::NAN, f64::INFINITY);
        let mut p = step;
        while p <= 100.0 {
            let t = t1 / p + kappa * (t1 / 2.0) * (p - 1.0);
            if t < best.1 {
                best = (p, t);
            }
            p += step;
        }
        assert!((best.0 - pairwise_latency_minimum(kappa).unwrap()).abs() <= step);
    }

    #[test]
    fn two_param_latency_known_values() {
        let lp = LatencyParams::new(1.0, 0.0, 0.0).unwrap();
        assert_eq!(lp.latency(pc(8)), 0.125);

        let serial = LatencyParams::new(1.0, 1.0, 0.0).unwrap();
        for p in [1, 2, 17, 1000] {
            assert_eq!(serial.latency(pc(p)), 1.0);
        }
    }

    #[test]
    fn latency_speedup_equals_capacity() {
        let lp = LatencyParams::new(1.0, 0.1, 0.01).unwrap();
        let params = lp.params();
        for p in 1..=512 {
            let via_latency = lp.speedup(pc(p));
            let direct = params.capacity(pc(p));
            assert_relative_eq!(via_latency, direct, max_relative = 1e-12);
        }
        assert_relative_eq!(lp.speedup(pc(5)), 3.125, max_relative = 1e-15);
    }

    #[test]
    fn simplified_rational_extrema_values() {
        let (max, min) = simplified_extrema();
        assert_eq!(max.location, 1.0);
        assert_relative_eq!(max.value, 1.0 / 3.0, max_relative = 1e-15);
        assert_eq!(min.location, -1.0);
        // The denominator 1 + p + p^2 is 1 at p = -1, so the minimum value
        // is -1 (and the inverse relation turns complex below it).
        assert_eq!(min.value, -1.0);
    }

    #[test]
    fn simplified_rational_argmax_by_grid() {
        let step = 1e-4;
        let mut best = (f64::NAN, f64::NEG_INFINITY);
        let mut p = step;
        while p <= 100.0 {
            let v = simplified_rational(p);
            if v > best.1 {
                best = (p, v);
            }
            p += step;
        }
        assert!((best.0 - 1.0).abs() <= step);
    }
}
