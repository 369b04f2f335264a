//! Seeded discrete-event simulation of the machine-repairman system.
//!
//! Three synchronization regimes are supported:
//!
//! * **asynchronous** — the steady-state reference: machines fail and
//!   queue independently, FIFO service by a single repairer;
//! * **barrier** — each repaired machine is parked in a post-repair buffer
//!   until all `p` are repaired, then every machine restarts its up period
//!   at the same instant;
//! * **intermittent** — the moment any machine enters service, every
//!   machine still up suspends (its up clock freezes) and resumes only once
//!   the repair queue drains.
//!
//! Runs are deterministic: every machine draws from its own counter-based
//! substream of the master seed, so the same config reproduces the same
//! outcome bit for bit, and adding machines never perturbs the draws of
//! existing ones. Simultaneous events are processed in ascending machine
//! order.

mod engine;
mod stats;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::ProcessorCount;
use crate::queueing::{exact_repairman, QueueParams};

pub use stats::DEFAULT_BATCHES;

/// Holding-time distribution for service or up periods.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Dist {
    /// Every draw equals `value`.
    Deterministic { value: f64 },
    /// Exponential with the given mean.
    Exponential { mean: f64 },
    /// Lognormal with the given mean and coefficient of variation.
    LogNormal { mean: f64, cv: f64 },
}

impl Dist {
    pub fn mean(&self) -> f64 {
        match *self {
            Dist::Deterministic { value } => value,
            Dist::Exponential { mean } => mean,
            Dist::LogNormal { mean, .. } => mean,
        }
    }

    /// Parse a compact spec: `det:MEAN`, `exp:MEAN`, or `lognormal:MEAN:CV`.
    pub fn parse(spec: &str) -> Result<Self> {
        let parts: Vec<&str> = spec.split(':').collect();
        let bad = || Error::DistSpec(spec.to_string());
        let num = |s: &str| s.trim().parse::<f64>().map_err(|_| bad());
        match parts.as_slice() {
            ["det" | "deterministic", v] => Ok(Dist::Deterministic { value: num(v)? }),
            ["exp" | "exponential", m] => Ok(Dist::Exponential { mean: num(m)? }),
            ["lognormal" | "lognorm", m, cv] => Ok(Dist::LogNormal {
                mean: num(m)?,
                cv: num(cv)?,
            }),
            _ => Err(bad()),
        }
    }

    fn validate(&self, allow_zero_mean: bool) -> Result<()> {
        let mean = self.mean();
        if !mean.is_finite() || mean < 0.0 || (mean == 0.0 && !allow_zero_mean) {
            return Err(Error::DistMean(mean));
        }
        match *self {
            Dist::LogNormal { cv, mean } => {
                if !cv.is_finite() || cv <= 0.0 {
                    return Err(Error::DistCv(cv));
                }
                // A lognormal cannot represent a zero mean.
                if mean == 0.0 {
                    return Err(Error::DistMean(mean));
                }
                Ok(())
            }
            Dist::Exponential { mean } if mean == 0.0 => Err(Error::DistMean(mean)),
            _ => Ok(()),
        }
    }
}

impl std::fmt::Display for Dist {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match *self {
            Dist::Deterministic { value } => write!(f, "det:{value}"),
            Dist::Exponential { mean } => write!(f, "exp:{mean}"),
            Dist::LogNormal { mean, cv } => write!(f, "lognormal:{mean}:{cv}"),
        }
    }
}

/// Synchronization regime for a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SyncMode {
    Asynchronous,
    Barrier,
    Intermittent,
}

impl SyncMode {
    pub fn parse(name: &str) -> Result<Self> {
        match name.trim().to_ascii_lowercase().as_str() {
            "asynchronous" | "async" => Ok(SyncMode::Asynchronous),
            "barrier" => Ok(SyncMode::Barrier),
            "intermittent" => Ok(SyncMode::Intermittent),
            _ => Err(Error::ModeSpec(name.to_string())),
        }
    }
}

impl std::fmt::Display for SyncMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            SyncMode::Asynchronous => "asynchronous",
            SyncMode::Barrier => "barrier",
            SyncMode::Intermittent => "intermittent",
        };
        f.write_str(name)
    }
}

/// Full specification of one simulation run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    /// Machine count.
    pub p: u32,
    /// Service (repair) time distribution; mean must be positive.
    pub service: Dist,
    /// Up-time distribution; a zero mean is allowed (fully serial).
    pub uptime: Dist,
    pub mode: SyncMode,
    /// Service stretch per additional non-up machine, as a fraction of the
    /// drawn service time.
    pub state_dependence_c: f64,
    /// Completed tours to simulate, including warmup.
    pub cycles: u64,
    /// Leading tours excluded from every estimate.
    pub warmup: u64,
    pub seed: u64,
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.p == 0 {
            return Err(Error::ZeroProcessors);
        }
        self.service.validate(false)?;
        self.uptime.validate(true)?;
        if !self.state_dependence_c.is_finite() || self.state_dependence_c < 0.0 {
            return Err(Error::StateDependence(self.state_dependence_c));
        }
        if self.cycles == 0 || self.cycles <= self.warmup {
            return Err(Error::CycleBudget {
                cycles: self.cycles,
                warmup: self.warmup,
            });
        }
        Ok(())
    }

    /// The analytic throughput this run is expected to approach, when one
    /// exists: the exact mean-value solution for the asynchronous regime
    /// (exact under exponential assumptions), or the state-dependent
    /// synchronous value for the barrier and intermittent regimes.
    /// Asynchronous runs with state dependence have no analytic reference.
    pub fn analytic_reference(&self) -> Option<f64> {
        let s = self.service.mean();
        let z = self.uptime.mean();
        let c = self.state_dependence_c;
        let p = f64::from(self.p);
        match self.mode {
            SyncMode::Asynchronous if c == 0.0 => {
                let params = QueueParams::new(s, z).ok()?;
                let count = ProcessorCount::new(self.p).ok()?;
                Some(exact_repairman(&params, count).x(self.p))
            }
            SyncMode::Asynchronous => None,
            SyncMode::Barrier | SyncMode::Intermittent => {
                Some(p / (p * s * (1.0 + (p - 1.0) * c) + z))
            }
        }
    }
}

/// Estimates from one simulation run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimOutcome {
    /// Completed tours per unit time over the measurement window.
    pub x_hat: f64,
    /// Mean time from enqueue to repair completion.
    pub r_hat: f64,
    /// 95% half-width on `x_hat` from tour-aligned batch means.
    pub ci_halfwidth: f64,
    /// Matching analytic throughput, when one exists; see
    /// [`SimConfig::analytic_reference`].
    pub analytic_reference: Option<f64>,
    /// Measured tours, `cycles - warmup`.
    pub tours_used: u64,
    /// Fraction of measured tours during which every machine was enqueued
    /// or in service at one instant.
    pub full_queue_fraction: f64,
    /// Mean non-executing (queued + in service + suspended + held) time per
    /// measured tour.
    pub serial_time_per_tour: f64,
}

/// Run one simulation to completion.
pub fn run_sim(config: &SimConfig) -> Result<SimOutcome> {
    config.validate()?;
    engine::Engine::new(config).run()
}

/// Run a family of configs that differ only in machine count, ordered as
/// given; used to trace empirical scalability curves.
pub fn sweep(configs: &[SimConfig]) -> Result<Vec<SimOutcome>> {
    if let Some(first) = configs.first() {
        for other in &configs[1..] {
            let mut aligned = *other;
            aligned.p = first.p;
            if aligned != *first {
                return Err(Error::SweepMismatch);
            }
        }
    }
    configs.iter().map(run_sim).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base_config() -> SimConfig {
        SimConfig {
            p: 4,
            service: Dist::Exponential { mean: 1.0 },
            uptime: Dist::Exponential { mean: 9.0 },
            mode: SyncMode::Asynchronous,
            state_dependence_c: 0.0,
            cycles: 2_000,
            warmup: 200,
            seed: 7,
        }
    }

    #[test]
    fn dist_parsing() {
        assert_eq!(
            Dist::parse("det:9").unwrap(),
            Dist::Deterministic { value: 9.0 }
        );
        assert_eq!(
            Dist::parse("exp:1.5").unwrap(),
            Dist::Exponential { mean: 1.5 }
        );
        assert_eq!(
            Dist::parse("lognormal:2:0.8").unwrap(),
            Dist::LogNormal { mean: 2.0, cv: 0.8 }
        );
        assert!(Dist::parse("uniform:1:2").is_err());
        assert!(Dist::parse("exp").is_err());
        assert!(Dist::parse("det:abc").is_err());
    }

    #[test]
    fn mode_parsing() {
        assert_eq!(SyncMode::parse("barrier").unwrap(), SyncMode::Barrier);
        assert_eq!(SyncMode::parse("ASYNC").unwrap(), SyncMode::Asynchronous);
        assert!(SyncMode::parse("flying").is_err());
    }

    #[test]
    fn config_validation() {
        let mut config = base_config();
        assert!(config.validate().is_ok());

        config.p = 0;
        assert!(config.validate().is_err());

        let mut config = base_config();
        config.warmup = config.cycles;
        assert!(matches!(config.validate(), Err(Error::CycleBudget { .. })));

        let mut config = base_config();
        config.service = Dist::Exponential { mean: 0.0 };
        assert!(config.validate().is_err());

        // Zero up time is the legitimate fully serial case, but only as a
        // deterministic constant.
        let mut config = base_config();
        config.uptime = Dist::Deterministic { value: 0.0 };
        assert!(config.validate().is_ok());
        config.uptime = Dist::Exponential { mean: 0.0 };
        assert!(config.validate().is_err());

        let mut config = base_config();
        config.state_dependence_c = -0.5;
        assert!(config.validate().is_err());
    }

    #[test]
    fn analytic_references_per_mode() {
        let mut config = base_config();
        let params = QueueParams::new(1.0, 9.0).unwrap();
        let mva = exact_repairman(&params, ProcessorCount::new(4).unwrap()).x(4);
        assert_eq!(config.analytic_reference(), Some(mva));

        config.mode = SyncMode::Barrier;
        let bound = 4.0 / (4.0 + 9.0);
        assert_eq!(config.analytic_reference(), Some(bound));

        config.mode = SyncMode::Asynchronous;
        config.state_dependence_c = 0.2;
        assert_eq!(config.analytic_reference(), None);
    }

    #[test]
    fn sweep_rejects_mismatched_configs() {
        let a = base_config();
        let mut b = base_config();
        b.p = 8;
        let mut c = base_config();
        c.p = 8;
        c.seed = 1234;
        assert!(sweep(&[a, b]).is_ok());
        assert_eq!(sweep(&[a, c]), Err(Error::SweepMismatch));
    }

    #[test]
    fn identical_seeds_reproduce_bit_identical_outcomes() {
        for mode in [
            SyncMode::Asynchronous,
            SyncMode::Barrier,
            SyncMode::Intermittent,
        ] {
            let mut config = base_config();
            config.mode = mode;
            let a = run_sim(&config).unwrap();
            let b = run_sim(&config).unwrap();
            assert!(a.x_hat.to_bits() == b.x_hat.to_bits(), "{mode}");
            assert!(a.r_hat.to_bits() == b.r_hat.to_bits(), "{mode}");
            assert!(
                a.ci_halfwidth.to_bits() == b.ci_halfwidth.to_bits(),
                "{mode}"
            );
            assert_eq!(a, b);
        }
    }

    #[test]
    fn single_machine_modes_coincide() {
        // With one machine there is nothing to synchronize: all three modes
        // follow the same event path and the same draws.
        let mut config = base_config();
        config.p = 1;
        config.cycles = 5_000;
        config.warmup = 500;
        let outcomes: Vec<SimOutcome> = [
            SyncMode::Asynchronous,
            SyncMode::Barrier,
            SyncMode::Intermittent,
        ]
        .into_iter()
        .map(|mode| {
            let mut c = config;
            c.mode = mode;
            run_sim(&c).unwrap()
        })
        .collect();
        assert_eq!(outcomes[0].x_hat.to_bits(), outcomes[1].x_hat.to_bits());
        assert_eq!(outcomes[0].x_hat.to_bits(), outcomes[2].x_hat.to_bits());
        assert_eq!(outcomes[0].r_hat.to_bits(), outcomes[1].r_hat.to_bits());
        assert_eq!(outcomes[0].r_hat.to_bits(), outcomes[2].r_hat.to_bits());
        // And the estimate agrees with the single-machine rate 1/(s+z).
        assert!(
            (outcomes[0].x_hat - 0.1).abs() < 0.005,
            "{}",
            outcomes[0].x_hat
        );
    }

    #[test]
    fn deterministic_barrier_run_is_exact() {
        let config = SimConfig {
            p: 10,
            service: Dist::Deterministic { value: 1.0 },
            uptime: Dist::Deterministic { value: 9.0 },
            mode: SyncMode::Barrier,
            state_dependence_c: 0.0,
            // 1800 measured tours: 30 batches of 60 tours, each spanning
            // exactly six lockstep rounds, so batch rates are identical.
            cycles: 2_000,
            warmup: 200,
            seed: 1,
        };
        let outcome = run_sim(&config).unwrap();
        assert!(
            (outcome.x_hat - 10.0 / 19.0).abs() < 1e-12,
            "{}",
            outcome.x_hat
        );
        assert_eq!(outcome.ci_halfwidth, 0.0);
        assert_eq!(outcome.full_queue_fraction, 1.0);
        assert_eq!(outcome.tours_used, 1_800);
    }

    #[test]
    fn intermittent_mode_tracks_synchronous_value() {
        let config = SimConfig {
            p: 8,
            service: Dist::Exponential { mean: 1.0 },
            uptime: Dist::LogNormal { mean: 9.0, cv: 1.5 },
            mode: SyncMode::Intermittent,
            state_dependence_c: 0.0,
            cycles: 30_000,
            warmup: 2_000,
            seed: 11,
        };
        let outcome = run_sim(&config).unwrap();
        let reference = outcome.analytic_reference.unwrap();
        assert!((reference - 8.0 / 17.0).abs() < 1e-12);
        let rel = (outcome.x_hat - reference).abs() / reference;
        assert!(
            rel < 0.05,
            "x_hat {} vs reference {reference}",
            outcome.x_hat
        );
        // Per-tour serial time approaches p * s.
        let serial_rel = (outcome.serial_time_per_tour - 8.0).abs() / 8.0;
        assert!(serial_rel < 0.05, "serial {}", outcome.serial_time_per_tour);
    }

    #[test]
    fn state_dependent_intermittent_matches_capacity_law() {
        // Every service in the intermittent regime is stretched by the full
        // 1 + (p-1)*c factor, so throughput lands on the state-dependent
        // synchronous value.
        let config = SimConfig {
            p: 6,
            service: Dist::Deterministic { value: 1.0 },
            uptime: Dist::Deterministic { value: 9.0 },
            mode: SyncMode::Intermittent,
            state_dependence_c: 0.1,
            cycles: 6_000,
            warmup: 600,
            seed: 3,
        };
        let outcome = run_sim(&config).unwrap();
        let reference = outcome.analytic_reference.unwrap();
        assert!((reference - 6.0 / (6.0 * 1.5 + 9.0)).abs() < 1e-12);
        let rel = (outcome.x_hat - reference).abs() / reference;
        assert!(
            rel < 1e-9,
            "x_hat {} vs reference {reference}",
            outcome.x_hat
        );
    }

    #[test]
    fn async_z_zero_saturates_the_repairer() {
        let config = SimConfig {
            p: 3,
            service: Dist::Exponential { mean: 2.0 },
            uptime: Dist::Deterministic { value: 0.0 },
            mode: SyncMode::Asynchronous,
            state_dependence_c: 0.0,
            cycles: 4_000,
            warmup: 400,
            seed: 5,
        };
        let outcome = run_sim(&config).unwrap();
        let rel = (outcome.x_hat - 0.5).abs() / 0.5;
        assert!(rel < 0.05, "{}", outcome.x_hat);
    }
}
