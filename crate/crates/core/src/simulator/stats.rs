//! Batch-means output analysis for the simulator.

/// Two-sided 95% Student-t critical values for 1..=30 degrees of freedom.
/// Batch counts are capped at 30, so this table covers every case.
const T_975: [f64; 30] = [
    12.706, 4.303, 3.182, 2.776, 2.571, 2.447, 2.365, 2.306, 2.262, 2.228, 2.201, 2.179, 2.160,
    2.145, 2.131, 2.120, 2.110, 2.101, 2.093, 2.086, 2.080, 2.074, 2.069, 2.064, 2.060, 2.056,
    2.052, 2.048, 2.045, 2.042,
];

/// Default number of tour-aligned batches; little is gained beyond 30.
pub const DEFAULT_BATCHES: u64 = 30;

fn t_score_975(df: usize) -> f64 {
    T_975[df.min(T_975.len()) - 1]
}

/// 95% confidence half-width on the mean of per-batch throughputs.
///
/// `boundaries` holds the `k + 1` completion timestamps delimiting `k`
/// batches of `batch_tours` completed tours each. Fewer than two batches
/// give a degenerate zero half-width.
pub fn batch_means_halfwidth(boundaries: &[f64], batch_tours: u64) -> f64 {
    let k = boundaries.len().saturating_sub(1);
    if k < 2 {
        return 0.0;
    }
    let rates: Vec<f64> = boundaries
        .windows(2)
        .map(|w| batch_tours as f64 / (w[1] - w[0]))
        .collect();
    // Shifted mean so identical rates (deterministic runs) yield a variance
    // of exactly zero.
    let shift = rates[0];
    let mean = shift + rates.iter().map(|r| r - shift).sum::<f64>() / k as f64;
    let var = rates.iter().map(|r| (r - mean) * (r - mean)).sum::<f64>() / (k - 1) as f64;
    t_score_975(k - 1) * (var / k as f64).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_rates_give_zero_halfwidth() {
        // Batches of 10 tours, each taking exactly 19 time units.
        let boundaries: Vec<f64> = (0..=30).map(|i| i as f64 * 19.0).collect();
        assert_eq!(batch_means_halfwidth(&boundaries, 10), 0.0);
    }

    #[test]
    fn degenerate_batch_counts() {
        assert_eq!(batch_means_halfwidth(&[0.0, 1.0], 5), 0.0);
        assert_eq!(batch_means_halfwidth(&[0.0], 5), 0.0);
    }

    #[test]
    fn halfwidth_matches_hand_computation() {
        // Two batches of 10 tours over 10 and 20 time units: rates 1.0 and
        // 0.5, t(df=1) = 12.706.
        let hw = batch_means_halfwidth(&[0.0, 10.0, 30.0], 10);
        let mean: f64 = 0.75;
        let var = (1.0f64 - mean).powi(2) + (0.5 - mean).powi(2);
        let expect = 12.706 * (var / 2.0f64).sqrt();
        assert!((hw - expect).abs() < 1e-12, "{hw} vs {expect}");
    }
}
