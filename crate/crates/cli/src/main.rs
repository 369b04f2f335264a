//! Command-line surface: fit measured data, predict curves, tabulate
//! queueing bounds, run simulations, and execute the identity checks.
//!
//! Exit codes: 0 on success, 1 for usage or input-parsing problems, 2 for
//! domain, fit, simulation, or verification failures.

mod data;
mod report;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::error::ErrorKind;
use clap::{Parser, Subcommand, ValueEnum};

use report::{
    BoundReport, BoundRow, CurveRow, FitReport, InputEcho, PredictReport, Report, SimulateReport,
    VerifyReport, TOOL_VERSION,
};
use uslkit::fitting::{self, ModelFamily};
use uslkit::models::{ModelParams, ProcessorCount};
use uslkit::queueing::{exact_repairman, synchronous_throughput, usl_from_queue, QueueParams};
use uslkit::simulator::{run_sim, Dist, SimConfig, SyncMode};
use uslkit::verify;

#[derive(Parser)]
#[command(
    name = "uslkit",
    version,
    about = "Scalability modeling: capacity-law fitting, repairman bounds, and simulation"
)]
struct Cli {
    /// Emit the report as JSON instead of text.
    #[arg(long, global = true)]
    json: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModelArg {
    Auto,
    Ideal,
    Amdahl,
    Usl,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    #[value(alias = "async")]
    Asynchronous,
    Barrier,
    Intermittent,
}

impl From<ModeArg> for SyncMode {
    fn from(mode: ModeArg) -> SyncMode {
        match mode {
            ModeArg::Asynchronous => SyncMode::Asynchronous,
            ModeArg::Barrier => SyncMode::Barrier,
            ModeArg::Intermittent => SyncMode::Intermittent,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Fit capacity-law parameters to a CSV of (p, throughput) samples.
    Fit {
        /// Input CSV; optional `p,throughput` header.
        input: PathBuf,
        /// Force a model family instead of automatic selection.
        #[arg(long, value_enum, default_value_t = ModelArg::Auto)]
        model: ModelArg,
        /// Baseline x(1) override; otherwise the measured p = 1 sample.
        #[arg(long)]
        baseline: Option<f64>,
        /// Write the fitted curve as CSV to this path.
        #[arg(long)]
        curve_out: Option<PathBuf>,
    },
    /// Evaluate a capacity curve over a processor range.
    Predict {
        #[arg(long, allow_negative_numbers = true)]
        sigma: Option<f64>,
        #[arg(long, allow_negative_numbers = true)]
        kappa: Option<f64>,
        /// Reuse parameters from a `fit --json` report.
        #[arg(long)]
        report: Option<PathBuf>,
        /// Baseline throughput multiplier.
        #[arg(long)]
        x1: Option<f64>,
        /// Inclusive range `A..B`.
        #[arg(long)]
        p_range: Option<String>,
        /// Comma-separated processor counts.
        #[arg(long)]
        p_list: Option<String>,
        /// Write the curve as CSV to this path.
        #[arg(long)]
        curve_out: Option<PathBuf>,
    },
    /// Tabulate the synchronous bound, the exact solution, and the implied
    /// capacity parameters for repairman inputs.
    Bound {
        /// Mean service time.
        #[arg(long)]
        s: f64,
        /// Mean up time.
        #[arg(long)]
        z: f64,
        /// State-dependence coefficient.
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        c: f64,
        /// Inclusive range `A..B`.
        #[arg(long, default_value = "1..16")]
        p_range: String,
        /// Write the table as CSV to this path.
        #[arg(long)]
        curve_out: Option<PathBuf>,
    },
    /// Run the discrete-event repairman simulation.
    Simulate {
        #[arg(long, value_enum)]
        mode: ModeArg,
        /// Machine count.
        #[arg(long)]
        p: u32,
        /// Service distribution: det:MEAN, exp:MEAN, or lognormal:MEAN:CV.
        #[arg(long)]
        service: String,
        /// Up-time distribution, same syntax.
        #[arg(long)]
        uptime: String,
        /// Completed tours to simulate, including warmup.
        #[arg(long)]
        cycles: u64,
        /// Leading tours excluded from estimates.
        #[arg(long, default_value_t = 0)]
        warmup: u64,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// State-dependence coefficient.
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        c: f64,
        /// Relative tolerance for the pass/fail verdict against the
        /// analytic reference.
        #[arg(long, default_value_t = 0.02)]
        tolerance: f64,
    },
    /// Run the analytic identity checks over their parameter grids.
    Verify {
        #[arg(long, default_value_t = 1e-12)]
        tolerance: f64,
    },
}

enum Failure {
    Usage(anyhow::Error),
    Run(anyhow::Error),
}

fn usage<E: Into<anyhow::Error>>(err: E) -> Failure {
    Failure::Usage(err.into())
}

fn run_failure<E: Into<anyhow::Error>>(err: E) -> Failure {
    Failure::Run(err.into())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(err)) => {
            eprintln!("error: {err:#}");
            ExitCode::from(1)
        }
        Err(Failure::Run(err)) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(cli: Cli) -> std::result::Result<(), Failure> {
    let json = cli.json;
    match cli.command {
        Command::Fit {
            input,
            model,
            baseline,
            curve_out,
        } => cmd_fit(&input, model, baseline, curve_out.as_deref(), json),
        Command::Predict {
            sigma,
            kappa,
            report,
            x1,
            p_range,
            p_list,
            curve_out,
        } => cmd_predict(
            sigma,
            kappa,
            report.as_deref(),
            x1,
            p_range,
            p_list,
            curve_out.as_deref(),
            json,
        ),
        Command::Bound {
            s,
            z,
            c,
            p_range,
            curve_out,
        } => cmd_bound(s, z, c, &p_range, curve_out.as_deref(), json),
        Command::Simulate {
            mode,
            p,
            service,
            uptime,
            cycles,
            warmup,
            seed,
            c,
            tolerance,
        } => cmd_simulate(
            mode, p, &service, &uptime, cycles, warmup, seed, c, tolerance, json,
        ),
        Command::Verify { tolerance } => cmd_verify(tolerance, json),
    }
}

fn emit(report: &Report, json: bool) {
    if json {
        println!("{}", report.to_json());
    } else {
        print!("{}", report.render());
    }
}

fn write_curve(path: &Path, header: &str, rows: &[String]) -> std::result::Result<(), Failure> {
    let mut text = String::with_capacity(rows.len() * 32 + header.len() + 1);
    text.push_str(header);
    text.push('\n');
    for row in rows {
        text.push_str(row);
        text.push('\n');
    }
    std::fs::write(path, text)
        .with_context(|| format!("cannot write {}", path.display()))
        .map_err(run_failure)
}

fn cmd_fit(
    input: &Path,
    model: ModelArg,
    baseline: Option<f64>,
    curve_out: Option<&Path>,
    json: bool,
) -> std::result::Result<(), Failure> {
    let parsed = data::read_data_file(input).map_err(usage)?;
    let samples = &parsed.samples;

    let (chosen, model_flag, x1, candidates) = match model {
        ModelArg::Auto => {
            let fit = fitting::fit_samples(samples, baseline).map_err(run_failure)?;
            let chosen = *fit
                .candidates
                .iter()
                .find(|c| c.family == fit.model_choice)
                .expect("selected family is among candidates");
            (chosen, "auto".to_string(), fit.x1_used, fit.candidates)
        }
        forced => {
            let family = match forced {
                ModelArg::Ideal => ModelFamily::Ideal,
                ModelArg::Amdahl => ModelFamily::Amdahl,
                ModelArg::Usl => ModelFamily::Usl,
                ModelArg::Auto => unreachable!(),
            };
            let (points, x1) = fitting::normalize(samples, baseline).map_err(run_failure)?;
            let fit = fitting::fit_family(&points, family).map_err(run_failure)?;
            (fit, family.to_string(), x1, vec![fit])
        }
    };

    let p_star = (chosen.params.kappa() > 0.0)
        .then(|| chosen.params.peak().ok())
        .flatten();
    let max_p = samples.iter().map(|s| s.p.get()).max().unwrap_or(1);
    let (kappa_term, denom) = {
        let p = f64::from(max_p);
        let term = chosen.params.kappa() * p * (p - 1.0);
        (term, 1.0 + chosen.params.sigma() * (p - 1.0) + term)
    };

    let fit_report = FitReport {
        version: TOOL_VERSION.to_string(),
        input: InputEcho {
            path: input.display().to_string(),
            rows_read: parsed.rows_read,
            samples_used: samples.len(),
            notices: parsed.notices.clone(),
        },
        model_flag,
        model: chosen.family,
        sigma: chosen.params.sigma(),
        kappa: chosen.params.kappa(),
        x1_used: x1,
        p_star,
        r_squared: chosen.r_squared,
        rss: chosen.rss,
        converged: chosen.converged,
        kappa_identifiability_warning: chosen.params.kappa() > 0.0 && kappa_term < 0.01 * denom,
        candidates,
    };

    if let Some(path) = curve_out {
        let params = chosen.params;
        let rows: Vec<String> = (1..=max_p)
            .map(|p| {
                let capacity = params.capacity(ProcessorCount::new(p).expect("p >= 1"));
                format!("{p},{capacity},{}", x1 * capacity)
            })
            .collect();
        write_curve(path, "p,capacity,throughput", &rows)?;
    }

    emit(&Report::Fit(fit_report), json);
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_predict(
    sigma: Option<f64>,
    kappa: Option<f64>,
    report_path: Option<&Path>,
    x1: Option<f64>,
    p_range: Option<String>,
    p_list: Option<String>,
    curve_out: Option<&Path>,
    json: bool,
) -> std::result::Result<(), Failure> {
    let (sigma, kappa, report_x1) = match report_path {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("cannot read {}", path.display()))
                .map_err(usage)?;
            let parsed: Report = serde_json::from_str(&text)
                .with_context(|| format!("{} is not a uslkit report", path.display()))
                .map_err(usage)?;
            let Report::Fit(fit) = parsed else {
                return Err(usage(anyhow!("{} is not a fit report", path.display())));
            };
            (
                sigma.unwrap_or(fit.sigma),
                kappa.unwrap_or(fit.kappa),
                Some(fit.x1_used),
            )
        }
        None => {
            let (Some(sigma), Some(kappa)) = (sigma, kappa) else {
                return Err(usage(anyhow!(
                    "provide --sigma and --kappa, or --report with a fit report"
                )));
            };
            (sigma, kappa, None)
        }
    };
    let x1 = x1.or(report_x1).unwrap_or(1.0);
    let counts = parse_counts(p_range.as_deref(), p_list.as_deref()).map_err(usage)?;

    let params = ModelParams::new(sigma, kappa).map_err(run_failure)?;
    let prediction = fitting::predict(&params, x1, &counts).map_err(run_failure)?;

    let rows: Vec<CurveRow> = prediction
        .rows
        .iter()
        .map(|r| CurveRow {
            p: r.p.get(),
            capacity: r.capacity,
            throughput: r.throughput,
        })
        .collect();
    if let Some(path) = curve_out {
        let lines: Vec<String> = rows
            .iter()
            .map(|r| format!("{},{},{}", r.p, r.capacity, r.throughput))
            .collect();
        write_curve(path, "p,capacity,throughput", &lines)?;
    }

    emit(
        &Report::Predict(PredictReport {
            version: TOOL_VERSION.to_string(),
            sigma,
            kappa,
            x1,
            rows,
            p_star: prediction.peak,
            retrograde: prediction.retrograde,
        }),
        json,
    );
    Ok(())
}

fn cmd_bound(
    s: f64,
    z: f64,
    c: f64,
    p_range: &str,
    curve_out: Option<&Path>,
    json: bool,
) -> std::result::Result<(), Failure> {
    let counts = parse_counts(Some(p_range), None).map_err(usage)?;
    let params = QueueParams::with_state_dependence(s, z, c).map_err(run_failure)?;
    let model = params.usl_params().map_err(run_failure)?;
    let max_p = counts.iter().copied().max().expect("nonempty range");
    let solution = exact_repairman(&params, max_p);

    let rows: Vec<BoundRow> = counts
        .iter()
        .map(|&p| BoundRow {
            p: p.get(),
            synchronous_bound: synchronous_throughput(&params, p),
            exact_throughput: solution.x(p.get()),
            usl_capacity: usl_from_queue(&params, p),
        })
        .collect();

    if let Some(path) = curve_out {
        let lines: Vec<String> = rows
            .iter()
            .map(|r| {
                format!(
                    "{},{},{},{}",
                    r.p, r.synchronous_bound, r.exact_throughput, r.usl_capacity
                )
            })
            .collect();
        write_curve(path, "p,sync_bound,exact_x,usl_capacity", &lines)?;
    }

    emit(
        &Report::Bound(BoundReport {
            version: TOOL_VERSION.to_string(),
            s,
            z,
            c,
            sigma: model.sigma(),
            kappa: model.kappa(),
            rows,
        }),
        json,
    );
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_simulate(
    mode: ModeArg,
    p: u32,
    service: &str,
    uptime: &str,
    cycles: u64,
    warmup: u64,
    seed: u64,
    c: f64,
    tolerance: f64,
    json: bool,
) -> std::result::Result<(), Failure> {
    let config = SimConfig {
        p,
        service: Dist::parse(service).map_err(usage)?,
        uptime: Dist::parse(uptime).map_err(usage)?,
        mode: mode.into(),
        state_dependence_c: c,
        cycles,
        warmup,
        seed,
    };
    let outcome = run_sim(&config).map_err(run_failure)?;

    let verdict = match outcome.analytic_reference {
        Some(reference) => {
            let rel = (outcome.x_hat - reference).abs() / reference;
            if rel <= tolerance {
                "pass"
            } else {
                "fail"
            }
        }
        None => "n/a",
    }
    .to_string();

    let failed = verdict == "fail";
    emit(
        &Report::Simulate(SimulateReport {
            version: TOOL_VERSION.to_string(),
            config,
            outcome,
            tolerance,
            verdict,
        }),
        json,
    );
    if failed {
        return Err(run_failure(anyhow!(
            "x_hat deviates from the analytic reference by more than {tolerance}"
        )));
    }
    Ok(())
}

fn cmd_verify(tolerance: f64, json: bool) -> std::result::Result<(), Failure> {
    let summary = verify::run_all(tolerance);
    let all_pass = summary.all_pass;
    emit(
        &Report::Verify(VerifyReport {
            version: TOOL_VERSION.to_string(),
            tolerance,
            summary,
        }),
        json,
    );
    if !all_pass {
        return Err(run_failure(anyhow!(
            "identity checks exceeded tolerance {tolerance}"
        )));
    }
    Ok(())
}

/// Processor counts from `--p-range A..B` (inclusive) or `--p-list a,b,c`.
fn parse_counts(range: Option<&str>, list: Option<&str>) -> Result<Vec<ProcessorCount>> {
    match (range, list) {
        (Some(_), Some(_)) => bail!("give either --p-range or --p-list, not both"),
        (None, None) => bail!("a processor range is required: --p-range A..B or --p-list a,b,c"),
        (Some(range), None) => {
            let (lo, hi) = range
                .split_once("..")
                .ok_or_else(|| anyhow!("invalid range '{range}', expected A..B"))?;
            let lo: u32 = lo.trim().parse().context("range start")?;
            let hi: u32 = hi.trim().parse().context("range end")?;
            if lo < 1 || hi < lo {
                bail!("invalid range {lo}..{hi}");
            }
            if hi - lo >= 1_000_000 {
                bail!("range {lo}..{hi} is too large (over 1e6 points)");
            }
            (lo..=hi)
                .map(|p| ProcessorCount::new(p).map_err(Into::into))
                .collect()
        }
        (None, Some(list)) => list
            .split(',')
            .map(|item| {
                let p: u32 = item
                    .trim()
                    .parse()
                    .with_context(|| format!("count '{item}'"))?;
                ProcessorCount::new(p).map_err(Into::into)
            })
            .collect(),
    }
}
