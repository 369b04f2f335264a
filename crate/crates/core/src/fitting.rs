//! Estimation of `(sigma, kappa)` from measured throughput.
//!
//! Measurements are normalized to relative capacity `C_p = x(p) / x(1)` and
//! the capacity law is fitted by least squares on that scale, subject to
//! `sigma in [0, 1)` and `kappa >= 0`. Working on the relative scale makes
//! the fit invariant under rescaling all throughputs by a constant.
//!
//! The optimizer is deliberately simple and fully deterministic: a closed
//! linearization of the capacity law provides one starting point (`p/C - 1`
//! is linear in the parameters), a coarse grid provides the rest, and each
//! start is refined by a damped least-squares iteration with the feasible
//! box enforced by clamping. Boundary solutions (`kappa = 0`, `sigma = 0`)
//! are ordinary outcomes, which is how the nested families (ideal linear,
//! contention-only, full two-parameter law) stay comparable: every family's
//! solution is also a starting point for the next richer family, so the
//! residual sum can only shrink as parameters are added.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::{ModelParams, Peak, ProcessorCount};

/// Highest admissible serial fraction; the fit keeps `sigma` strictly
/// below 1.
const SIGMA_MAX: f64 = 1.0 - 1e-9;

/// One measured point: processors and observed throughput.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThroughputSample {
    pub p: ProcessorCount,
    pub x: f64,
}

impl ThroughputSample {
    pub fn new(p: u32, x: f64) -> Result<Self> {
        if !x.is_finite() || x <= 0.0 {
            return Err(Error::Throughput(x));
        }
        Ok(Self {
            p: ProcessorCount::new(p)?,
            x,
        })
    }
}

/// The three nested candidate families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelFamily {
    /// `C_p = p`; no free parameters.
    Ideal,
    /// `C_p = p / (1 + sigma*(p-1))`; one parameter.
    Amdahl,
    /// Full two-parameter capacity law.
    Usl,
}

impl ModelFamily {
    pub fn parameter_count(self) -> usize {
        match self {
            ModelFamily::Ideal => 0,
            ModelFamily::Amdahl => 1,
            ModelFamily::Usl => 2,
        }
    }

    fn min_points(self) -> usize {
        // One more distinct p than free parameters, counting the implicit
        // normalization at p = 1.
        match self {
            ModelFamily::Ideal => 1,
            ModelFamily::Amdahl => 2,
            ModelFamily::Usl => 3,
        }
    }
}

impl std::fmt::Display for ModelFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            ModelFamily::Ideal => "ideal",
            ModelFamily::Amdahl => "amdahl",
            ModelFamily::Usl => "usl",
        };
        f.write_str(name)
    }
}

/// A fitted candidate family with its residual sum and selection score.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CandidateFit {
    pub family: ModelFamily,
    pub params: ModelParams,
    pub rss: f64,
    pub r_squared: f64,
    /// Small-sample corrected information criterion; `None` when the
    /// correction is undefined for the observation count, which removes the
    /// candidate from automatic selection.
    pub score: Option<f64>,
    pub converged: bool,
}

/// Complete fit output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    /// Parameters of the full two-parameter fit.
    pub params: ModelParams,
    /// Baseline throughput used for normalization.
    pub x1_used: f64,
    /// Residual sum of squares on the relative-capacity scale.
    pub rss: f64,
    pub r_squared: f64,
    /// Capacity maximum implied by the fit; absent when `kappa = 0`.
    pub p_star: Option<Peak>,
    /// Family preferred by parsimony-penalized selection.
    pub model_choice: ModelFamily,
    pub candidates: Vec<CandidateFit>,
    pub converged: bool,
    /// Set when the fitted `kappa` contributes less than 1% of the
    /// denominator at the largest sampled `p`: the data barely constrain it.
    pub kappa_identifiability_warning: bool,
}

/// Normalize samples to `(p, C_p)` pairs.
///
/// The baseline is the explicit override when given, otherwise the measured
/// `p = 1` throughput. Duplicate `p` values are rejected here; averaging
/// repeated measurements is an ingestion concern.
pub fn normalize(
    samples: &[ThroughputSample],
    baseline: Option<f64>,
) -> Result<(Vec<(ProcessorCount, f64)>, f64)> {
    let mut seen: Vec<u32> = Vec::with_capacity(samples.len());
    for sample in samples {
        if seen.contains(&sample.p.get()) {
            return Err(Error::DuplicateSample(sample.p.get()));
        }
        seen.push(sample.p.get());
    }
    let x1 = match baseline {
        Some(b) if b.is_finite() && b > 0.0 => b,
        Some(b) => return Err(Error::Baseline(b)),
        None => samples
            .iter()
            .find(|s| s.p.get() == 1)
            .map(|s| s.x)
            .ok_or(Error::MissingBaseline)?,
    };
    let mut points: Vec<(ProcessorCount, f64)> = samples.iter().map(|s| (s.p, s.x / x1)).collect();
    points.sort_by_key(|(p, _)| *p);
    Ok((points, x1))
}

/// Fit one family to normalized `(p, C_p)` points.
pub fn fit_family(points: &[(ProcessorCount, f64)], family: ModelFamily) -> Result<CandidateFit> {
    let data = as_f64_points(points)?;
    check_point_count(&data, family)?;
    Ok(fit_family_inner(&data, family))
}

/// Fit all three families to normalized points and select among them.
///
/// The reported parameters are always the full two-parameter fit; the
/// selection verdict says which family the data actually support.
pub fn fit_points(points: &[(ProcessorCount, f64)]) -> Result<FitResult> {
    let data = as_f64_points(points)?;
    check_point_count(&data, ModelFamily::Usl)?;

    let candidates = vec![
        fit_family_inner(&data, ModelFamily::Ideal),
        fit_family_inner(&data, ModelFamily::Amdahl),
        fit_family_inner(&data, ModelFamily::Usl),
    ];
    let usl = candidates[2];

    // Lowest defined score wins; parsimony breaks exact ties through the
    // penalty term.
    let model_choice = candidates
        .iter()
        .filter_map(|c| c.score.map(|s| (s, c.family)))
        .min_by(|a, b| a.0.total_cmp(&b.0))
        .map(|(_, family)| family)
        .unwrap_or(ModelFamily::Ideal);

    let p_star = if usl.params.kappa() > 0.0 {
        usl.params.peak().ok()
    } else {
        None
    };
    let max_p = data.iter().map(|&(p, _)| p).fold(1.0, f64::max);
    let kappa_term = usl.params.kappa() * max_p * (max_p - 1.0);
    let denom = 1.0 + usl.params.sigma() * (max_p - 1.0) + kappa_term;
    let kappa_identifiability_warning = usl.params.kappa() > 0.0 && kappa_term < 0.01 * denom;

    Ok(FitResult {
        params: usl.params,
        x1_used: 1.0,
        rss: usl.rss,
        r_squared: r_squared(&data, usl.rss),
        p_star,
        model_choice,
        candidates,
        converged: usl.converged,
        kappa_identifiability_warning,
    })
}

/// Normalize raw samples and fit; the usual entry point.
pub fn fit_samples(samples: &[ThroughputSample], baseline: Option<f64>) -> Result<FitResult> {
    let (points, x1) = normalize(samples, baseline)?;
    let mut result = fit_points(&points)?;
    result.x1_used = x1;
    Ok(result)
}

/// One predicted point on the fitted curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PredictedPoint {
    pub p: ProcessorCount,
    pub capacity: f64,
    pub throughput: f64,
}

/// Predicted throughput curve with peak annotation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub rows: Vec<PredictedPoint>,
    pub peak: Option<Peak>,
    /// True when a requested count lies beyond the capacity maximum, where
    /// added processors reduce throughput.
    pub retrograde: bool,
}

/// Scale the capacity curve back to throughput: `x(p) = x1 * C_p`.
pub fn predict(params: &ModelParams, x1: f64, counts: &[ProcessorCount]) -> Result<Prediction> {
    if !x1.is_finite() || x1 <= 0.0 {
        return Err(Error::Baseline(x1));
    }
    let rows = counts
        .iter()
        .map(|&p| {
            let capacity = params.capacity(p);
            PredictedPoint {
                p,
                capacity,
                throughput: x1 * capacity,
            }
        })
        .collect();
    let peak = if params.kappa() > 0.0 {
        params.peak().ok()
    } else {
        None
    };
    let retrograde = peak
        .map(|pk| counts.iter().any(|p| p.as_f64() > pk.location.ceil()))
        .unwrap_or(false);
    Ok(Prediction {
        rows,
        peak,
        retrograde,
    })
}

fn as_f64_points(points: &[(ProcessorCount, f64)]) -> Result<Vec<(f64, f64)>> {
    let mut seen: Vec<u32> = Vec::with_capacity(points.len());
    for (p, c) in points {
        if seen.contains(&p.get()) {
            return Err(Error::DuplicateSample(p.get()));
        }
        seen.push(p.get());
        if !c.is_finite() || *c <= 0.0 {
            return Err(Error::Throughput(*c));
        }
    }
    Ok(points.iter().map(|&(p, c)| (p.as_f64(), c)).collect())
}

fn check_point_count(data: &[(f64, f64)], family: ModelFamily) -> Result<()> {
    if data.len() < family.min_points() {
        return Err(Error::InsufficientData {
            needed: family.min_points(),
            got: data.len(),
        });
    }
    Ok(())
}

fn capacity(p: f64, sigma: f64, kappa: f64) -> f64 {
    p / (1.0 + sigma * (p - 1.0) + kappa * p * (p - 1.0))
}

fn rss_at(data: &[(f64, f64)], sigma: f64, kappa: f64) -> f64 {
    data.iter()
        .map(|&(p, c)| {
            let r = capacity(p, sigma, kappa) - c;
            r * r
        })
        .sum()
}

fn r_squared(data: &[(f64, f64)], rss: f64) -> f64 {
    let n = data.len() as f64;
    let mean = data.iter().map(|&(_, c)| c).sum::<f64>() / n;
    let tss: f64 = data.iter().map(|&(_, c)| (c - mean) * (c - mean)).sum();
    if tss > 0.0 {
        1.0 - rss / tss
    } else if rss <= f64::EPSILON {
        1.0
    } else {
        0.0
    }
}

fn fit_family_inner(data: &[(f64, f64)], family: ModelFamily) -> CandidateFit {
    let (params, rss, converged) = match family {
        ModelFamily::Ideal => {
            let params = ModelParams::new(0.0, 0.0).expect("zero params valid");
            (params, rss_at(data, 0.0, 0.0), true)
        }
        ModelFamily::Amdahl => {
            let mut starts = vec![0.0, 0.05, 0.2, 0.5, 0.9];
            if let Some(sigma) = linearized_amdahl(data) {
                starts.push(sigma.clamp(0.0, SIGMA_MAX));
            }
            let (best, rss, converged) =
                refine_over_starts(data, starts.iter().map(|&s| [s, 0.0]).collect(), false);
            let params = ModelParams::new(best[0], 0.0).expect("clamped to feasible box");
            (params, rss, converged)
        }
        ModelFamily::Usl => {
            let mut starts: Vec<[f64; 2]> = Vec::new();
            if let Some([sigma, kappa]) = linearized_usl(data) {
                starts.push([sigma.clamp(0.0, SIGMA_MAX), kappa.max(0.0)]);
            }
            // The best contention-only solution seeds the richer family, so
            // its residual sum is an upper bound on this one by
            // construction.
            let amdahl = fit_family_inner(data, ModelFamily::Amdahl);
            starts.push([amdahl.params.sigma(), 0.0]);
            for sigma in [0.0, 0.02, 0.1, 0.3, 0.6, 0.9] {
                for kappa in [0.0, 1e-6, 1e-4, 1e-2, 1.0] {
                    starts.push([sigma, kappa]);
                }
            }
            let (best, rss, converged) = refine_over_starts(data, starts, true);
            let params = ModelParams::new(best[0], best[1]).expect("clamped to feasible box");
            (params, rss, converged)
        }
    };

    CandidateFit {
        family,
        params,
        rss,
        r_squared: r_squared(data, rss),
        score: aicc(data, rss, family.parameter_count()),
        converged,
    }
}

/// Corrected information criterion on Gaussian residuals. The residual sum
/// is floored at numerical noise so that exactly-fitting nested families
/// tie on fit quality and the parsimony penalty decides between them.
fn aicc(data: &[(f64, f64)], rss: f64, k: usize) -> Option<f64> {
    let n = data.len() as f64;
    let correction_df = n - k as f64 - 1.0;
    if correction_df < 1.0 {
        return None;
    }
    let scale: f64 = data.iter().map(|&(_, c)| c * c).sum();
    let floored = rss.max(1e-24 * scale + f64::MIN_POSITIVE);
    let k = k as f64;
    Some(n * (floored / n).ln() + 2.0 * k + 2.0 * k * (k + 1.0) / correction_df)
}

/// Closed-form start for the contention-only family: `p/C - 1` regressed on
/// `p - 1`.
fn linearized_amdahl(data: &[(f64, f64)]) -> Option<f64> {
    let (mut sum_aa, mut sum_az) = (0.0, 0.0);
    for &(p, c) in data {
        let a = p - 1.0;
        let z = p / c - 1.0;
        sum_aa += a * a;
        sum_az += a * z;
    }
    (sum_aa > 0.0).then(|| sum_az / sum_aa)
}

/// Closed-form start for the full law: `p/C - 1` is linear in
/// `(p - 1, p*(p - 1))`, so ordinary least squares recovers both parameters
/// exactly on noiseless data.
fn linearized_usl(data: &[(f64, f64)]) -> Option<[f64; 2]> {
    let (mut aa, mut ab, mut bb, mut az, mut bz) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for &(p, c) in data {
        let a = p - 1.0;
        let b = p * (p - 1.0);
        let z = p / c - 1.0;
        aa += a * a;
        ab += a * b;
        bb += b * b;
        az += a * z;
        bz += b * z;
    }
    let det = aa * bb - ab * ab;
    if det.abs() <= 1e-12 * (aa * bb).max(1.0) {
        return None;
    }
    Some([(az * bb - bz * ab) / det, (aa * bz - ab * az) / det])
}

fn refine_over_starts(
    data: &[(f64, f64)],
    starts: Vec<[f64; 2]>,
    fit_kappa: bool,
) -> ([f64; 2], f64, bool) {
    let mut best: Option<([f64; 2], f64, bool)> = None;
    for start in starts {
        let (params, rss, converged) = refine(data, start, fit_kappa);
        let better = match &best {
            None => true,
            Some((_, best_rss, _)) => rss < *best_rss,
        };
        if better {
            best = Some((params, rss, converged));
        }
    }
    best.expect("at least one start")
}

/// Damped Gauss-Newton descent on the squared residuals, with the feasible
/// box enforced by clamping each trial step. Only improving steps are
/// accepted, so the final residual sum never exceeds the starting one.
fn refine(data: &[(f64, f64)], start: [f64; 2], fit_kappa: bool) -> ([f64; 2], f64, bool) {
    let clamp = |theta: [f64; 2]| -> [f64; 2] {
        [
            theta[0].clamp(0.0, SIGMA_MAX),
            if fit_kappa {
                theta[1].max(0.0)
            } else {
                start[1]
            },
        ]
    };
    let mut theta = clamp(start);
    let mut rss = rss_at(data, theta[0], theta[1]);
    let mut lambda = 1e-3;
    let mut converged = false;

    for _ in 0..200 {
        // Residuals r_i = C(p_i) - c_i and the Jacobian of C in
        // (sigma, kappa): both partials share -p/(denominator^2).
        let (mut g0, mut g1) = (0.0, 0.0);
        let (mut h00, mut h01, mut h11) = (0.0, 0.0, 0.0);
        for &(p, c) in data {
            let denom = 1.0 + theta[0] * (p - 1.0) + theta[1] * p * (p - 1.0);
            let model = p / denom;
            let r = model - c;
            let common = -p / (denom * denom);
            let j0 = common * (p - 1.0);
            let j1 = common * p * (p - 1.0);
            g0 += j0 * r;
            g1 += j1 * r;
            h00 += j0 * j0;
            h01 += j0 * j1;
            h11 += j1 * j1;
        }
        if !fit_kappa {
            g1 = 0.0;
            h01 = 0.0;
            h11 = 1.0;
        }

        let grad_norm = (g0 * g0 + g1 * g1).sqrt();
        if grad_norm <= 1e-14 * (1.0 + rss) {
            converged = true;
            break;
        }

        let mut improved = false;
        for _ in 0..40 {
            let a00 = h00 * (1.0 + lambda) + 1e-300;
            let a11 = h11 * (1.0 + lambda) + 1e-300;
            let det = a00 * a11 - h01 * h01;
            if det <= 0.0 {
                lambda *= 4.0;
                continue;
            }
            let d0 = (-g0 * a11 + g1 * h01) / det;
            let d1 = (-g1 * a00 + g0 * h01) / det;
            let trial = clamp([theta[0] + d0, theta[1] + d1]);
            let trial_rss = rss_at(data, trial[0], trial[1]);
            if trial_rss < rss {
                let gain = rss - trial_rss;
                theta = trial;
                rss = trial_rss;
                lambda = (lambda / 3.0).max(1e-12);
                improved = true;
                if gain <= 1e-15 * (rss + 1e-30) {
                    converged = true;
                }
                break;
            }
            lambda *= 4.0;
        }
        if !improved {
            // No descent direction left at this scale: either at a
            // boundary minimum or below float resolution.
            converged = true;
            break;
        }
        if converged {
            break;
        }
    }

    (theta, rss, converged)
}
