//! Report documents: everything a command prints, as one serializable
//! value. JSON output is the same structure serialized with serde, so a
//! report re-parsed from its own JSON compares equal.

use serde::{Deserialize, Serialize};

use uslkit::fitting::{CandidateFit, ModelFamily};
use uslkit::models::Peak;
use uslkit::simulator::{SimConfig, SimOutcome};
use uslkit::verify::VerifySummary;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Report {
    Fit(FitReport),
    Predict(PredictReport),
    Bound(BoundReport),
    Simulate(SimulateReport),
    Verify(VerifyReport),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputEcho {
    pub path: String,
    pub rows_read: usize,
    pub samples_used: usize,
    pub notices: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub version: String,
    pub input: InputEcho,
    /// `auto` or the forced family.
    pub model_flag: String,
    pub model: ModelFamily,
    pub sigma: f64,
    pub kappa: f64,
    pub x1_used: f64,
    pub p_star: Option<Peak>,
    pub r_squared: f64,
    pub rss: f64,
    pub converged: bool,
    pub kappa_identifiability_warning: bool,
    pub candidates: Vec<CandidateFit>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveRow {
    pub p: u32,
    pub capacity: f64,
    pub throughput: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictReport {
    pub version: String,
    pub sigma: f64,
    pub kappa: f64,
    pub x1: f64,
    pub rows: Vec<CurveRow>,
    pub p_star: Option<Peak>,
    pub retrograde: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundRow {
    pub p: u32,
    pub synchronous_bound: f64,
    pub exact_throughput: f64,
    pub usl_capacity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub version: String,
    pub s: f64,
    pub z: f64,
    pub c: f64,
    pub sigma: f64,
    pub kappa: f64,
    pub rows: Vec<BoundRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulateReport {
    pub version: String,
    pub config: SimConfig,
    pub outcome: SimOutcome,
    pub tolerance: f64,
    /// `pass`/`fail` against the analytic reference, or `n/a` without one.
    pub verdict: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub version: String,
    pub tolerance: f64,
    pub summary: VerifySummary,
}

impl Report {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }

    /// Human-readable rendering.
    pub fn render(&self) -> String {
        match self {
            Report::Fit(r) => render_fit(r),
            Report::Predict(r) => render_predict(r),
            Report::Bound(r) => render_bound(r),
            Report::Simulate(r) => render_simulate(r),
            Report::Verify(r) => render_verify(r),
        }
    }
}

fn render_peak(peak: &Option<Peak>) -> String {
    match peak {
        Some(p) => format!(
            "{:.4} (integer argmax p = {}, capacity {:.4})",
            p.location,
            p.argmax.get(),
            p.capacity
        ),
        None => "none".to_string(),
    }
}

fn render_fit(r: &FitReport) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "input: {} ({} rows, {} samples)\n",
        r.input.path, r.input.rows_read, r.input.samples_used
    ));
    for notice in &r.input.notices {
        out.push_str(&format!("notice: {notice}\n"));
    }
    out.push_str(&format!("model: {} (flag: {})\n", r.model, r.model_flag));
    out.push_str(&format!("sigma: {:.10}\n", r.sigma));
    out.push_str(&format!("kappa: {:.10}\n", r.kappa));
    out.push_str(&format!("x(1) baseline: {:.6}\n", r.x1_used));
    out.push_str(&format!("p*: {}\n", render_peak(&r.p_star)));
    out.push_str(&format!("r^2: {:.8}\n", r.r_squared));
    out.push_str(&format!("rss: {:.6e}\n", r.rss));
    if !r.converged {
        out.push_str("warning: refinement did not fully converge; best iterate reported\n");
    }
    if r.kappa_identifiability_warning {
        out.push_str(
            "warning: kappa is weakly identified (it contributes <1% of the denominator at the largest sampled p)\n",
        );
    }
    out.push_str("candidates:\n");
    for c in &r.candidates {
        let score = c
            .score
            .map(|s| format!("{s:.4}"))
            .unwrap_or_else(|| "n/a".to_string());
        let marker = if c.family == r.model {
            "  <- selected"
        } else {
            ""
        };
        out.push_str(&format!(
            "  {:<7} sigma={:<12.6} kappa={:<12.6e} rss={:<12.6e} score={score}{marker}\n",
            c.family.to_string(),
            c.params.sigma(),
            c.params.kappa(),
            c.rss,
        ));
    }
    out
}

fn render_predict(r: &PredictReport) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "model: sigma={} kappa={} x1={}\n",
        r.sigma, r.kappa, r.x1
    ));
    out.push_str(&format!("p*: {}\n", render_peak(&r.p_star)));
    if r.retrograde {
        out.push_str(
            "warning: requested range extends beyond p*; throughput is retrograde there\n",
        );
    }
    out.push_str(&format!(
        "{:>8} {:>14} {:>14}\n",
        "p", "capacity", "throughput"
    ));
    for row in &r.rows {
        out.push_str(&format!(
            "{:>8} {:>14.6} {:>14.6}\n",
            row.p, row.capacity, row.throughput
        ));
    }
    out
}

fn render_bound(r: &BoundReport) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "queue: s={} z={} c={} -> sigma={:.10} kappa={:.10}\n",
        r.s, r.z, r.c, r.sigma, r.kappa
    ));
    out.push_str(&format!(
        "{:>8} {:>16} {:>16} {:>16}\n",
        "p", "sync_bound", "exact_x", "usl_capacity"
    ));
    for row in &r.rows {
        out.push_str(&format!(
            "{:>8} {:>16.6} {:>16.6} {:>16.6}\n",
            row.p, row.synchronous_bound, row.exact_throughput, row.usl_capacity
        ));
    }
    out
}

fn render_simulate(r: &SimulateReport) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "config: p={} mode={} service={} uptime={} c={} cycles={} warmup={} seed={}\n",
        r.config.p,
        r.config.mode,
        r.config.service,
        r.config.uptime,
        r.config.state_dependence_c,
        r.config.cycles,
        r.config.warmup,
        r.config.seed
    ));
    out.push_str(&format!("x_hat: {:.8}\n", r.outcome.x_hat));
    out.push_str(&format!("r_hat: {:.8}\n", r.outcome.r_hat));
    out.push_str(&format!(
        "ci_halfwidth (95%): {:.3e}\n",
        r.outcome.ci_halfwidth
    ));
    match r.outcome.analytic_reference {
        Some(reference) => {
            let rel = (r.outcome.x_hat - reference).abs() / reference;
            out.push_str(&format!(
                "analytic reference: {reference:.8} (rel err {rel:.3e}, tolerance {})\n",
                r.tolerance
            ));
        }
        None => out.push_str("analytic reference: none for this configuration\n"),
    }
    out.push_str(&format!("tours used: {}\n", r.outcome.tours_used));
    out.push_str(&format!(
        "full-queue tour fraction: {:.6}\n",
        r.outcome.full_queue_fraction
    ));
    out.push_str(&format!(
        "serial time per tour: {:.6}\n",
        r.outcome.serial_time_per_tour
    ));
    out.push_str(&format!("{}\n", r.verdict.to_uppercase()));
    out
}

fn render_verify(r: &VerifyReport) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "{:<30} {:>8} {:>14} {:>11} {:>7}\n",
        "check", "cases", "max_rel_err", "tolerance", "status"
    ));
    for check in &r.summary.checks {
        out.push_str(&format!(
            "{:<30} {:>8} {:>14.3e} {:>11.1e} {:>7}\n",
            check.name,
            check.cases,
            check.max_rel_err,
            check.tolerance,
            if check.pass { "pass" } else { "FAIL" }
        ));
    }
    out.push_str(if r.summary.all_pass {
        "all checks passed\n"
    } else {
        "some checks FAILED\n"
    });
    out
}
