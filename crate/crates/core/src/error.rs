//! Error type shared across the crate.

use thiserror::Error;

/// Errors raised by model, queueing, simulation, and fitting operations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("serial fraction must lie in [0, 1], got {0}")]
    SigmaRange(f64),
    #[error("coherency coefficient must be finite and nonnegative, got {0}")]
    KappaRange(f64),
    #[error("processor count must be at least 1")]
    ZeroProcessors,
    #[error("uniprocessor time must be finite and positive, got {0}")]
    BaseTime(f64),
    #[error("asymptote is unbounded for serial fraction {0} (requires sigma > 0)")]
    UnboundedAsymptote(f64),
    #[error("capacity has no finite maximum when kappa = 0")]
    NoFiniteMaximum,
    #[error("pairwise latency term requires kappa > 0, got {0}")]
    PairwiseCoefficient(f64),

    #[error("service time must be finite and positive, got {0}")]
    ServiceTime(f64),
    #[error("up time must be finite and nonnegative, got {0}")]
    UpTime(f64),
    #[error("state-dependence coefficient must be finite and nonnegative, got {0}")]
    StateDependence(f64),
    #[error("transition rate must be finite and positive, got {0}")]
    TransitionRate(f64),

    #[error("distribution mean must be finite and positive, got {0}")]
    DistMean(f64),
    #[error("coefficient of variation must be finite and positive, got {0}")]
    DistCv(f64),
    #[error(
        "unrecognized distribution spec '{0}' (expected det:MEAN, exp:MEAN, or lognormal:MEAN:CV)"
    )]
    DistSpec(String),
    #[error(
        "unrecognized synchronization mode '{0}' (expected asynchronous, barrier, or intermittent)"
    )]
    ModeSpec(String),
    #[error("cycles ({cycles}) must exceed warmup ({warmup})")]
    CycleBudget { cycles: u64, warmup: u64 },
    #[error("event budget exceeded after {0} events; simulation is not making progress")]
    EventOverflow(u64),
    #[error("sweep configs must differ only in machine count")]
    SweepMismatch,

    #[error("throughput must be finite and positive, got {0}")]
    Throughput(f64),
    #[error("baseline throughput must be finite and positive, got {0}")]
    Baseline(f64),
    #[error("no baseline throughput: provide one explicitly or include a p = 1 sample")]
    MissingBaseline,
    #[error("duplicate sample for p = {0}")]
    DuplicateSample(u32),
    #[error("insufficient data: need at least {needed} distinct p values, got {got}")]
    InsufficientData { needed: usize, got: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
