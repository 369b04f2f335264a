//! Shared test oracles, kept independent of the library's solution paths.

/// Steady-state repairman throughput from the birth-death chain on the
/// number of machines down, solved as a dense linear system (global balance
/// plus normalization) with Gaussian elimination. No mean-value recursion
/// and no product form, so this is a genuinely independent route.
pub fn birth_death_throughput(s: f64, z: f64, p: u32) -> f64 {
    assert!(s > 0.0 && z >= 0.0 && p >= 1);
    if z == 0.0 {
        // Machines fail instantly: the repairer is never idle.
        return 1.0 / s;
    }
    let n = (p + 1) as usize;
    let mu = 1.0 / s;
    let lambda = |down: usize| (p as usize - down) as f64 / z;

    // Rows 0..n-1: global balance at states 0..p-1; last row: sum = 1.
    let mut a = vec![vec![0.0f64; n]; n];
    let mut b = vec![0.0f64; n];
    for state in 0..n - 1 {
        let out_rate = lambda(state) + if state > 0 { mu } else { 0.0 };
        a[state][state] = -out_rate;
        if state > 0 {
            a[state][state - 1] = lambda(state - 1);
        }
        a[state][state + 1] = mu;
    }
    a[n - 1].fill(1.0);
    b[n - 1] = 1.0;

    let pi = solve(a, b);
    (1.0 - pi[0]) * mu
}

/// Gaussian elimination with partial pivoting.
#[allow(clippy::needless_range_loop)]
fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .expect("nonempty range");
        a.swap(col, pivot);
        b.swap(col, pivot);
        assert!(a[col][col].abs() > 0.0, "singular balance system");
        for row in col + 1..n {
            let factor = a[row][col] / a[col][col];
            if factor == 0.0 {
                continue;
            }
            for k in col..n {
                a[row][k] -= factor * a[col][k];
            }
            b[row] -= factor * b[col];
        }
    }
    let mut x = vec![0.0f64; n];
    for row in (0..n).rev() {
        let mut acc = b[row];
        for col in row + 1..n {
            acc -= a[row][col] * x[col];
        }
        x[row] = acc / a[row][row];
    }
    x
}

#[cfg(test)]
mod self_checks {
    use super::*;

    #[test]
    fn single_machine_rate() {
        let x = birth_death_throughput(1.0, 9.0, 1);
        assert!((x - 0.1).abs() < 1e-14);
    }
}
