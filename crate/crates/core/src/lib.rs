//! Scalability modeling toolkit built on the machine-repairman queue.
//!
//! What lives here:
//!
//! * [`models`] — closed-form capacity and latency curves (ideal linear,
//!   contention-limited, and the two-parameter capacity law), their
//!   asymptotes, and their extrema.
//! * [`queueing`] — the exact finite-population repairman solution, the
//!   synchronous throughput bound, the state-dependent generalization, and
//!   executable forms of the identities connecting them to the models.
//! * [`simulator`] — a seeded discrete-event simulation of the repairman in
//!   asynchronous, barrier-synchronized, and intermittently synchronized
//!   regimes, for confirming the analytic bounds empirically.
//! * [`fitting`] — constrained least-squares estimation of `(sigma, kappa)`
//!   from measured throughput, model selection across the nested families,
//!   and prediction with peak location.
//! * [`verify`] — the identity-check suite over dense parameter grids.

pub mod error;
pub mod fitting;
pub mod models;
pub mod queueing;
pub mod simulator;
pub mod verify;

pub use error::{Error, Result};
pub use models::{LatencyParams, ModelParams, Peak, ProcessorCount};
pub use queueing::{QueueParams, QueueSolution};
