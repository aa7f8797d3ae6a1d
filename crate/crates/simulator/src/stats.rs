use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Estimate {
    pub mean: f64,
    /// Standard error of the mean; 0 for a single sample.
    pub se: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Summary {
    pub master_seed: u64,
    pub num_trajectories: usize,
    pub failures: usize,
    /// Total reward over the horizon, per player.
    pub per_player: Vec<Estimate>,
    /// Sum over players of total reward, divided by the horizon.
    pub per_time_total: Estimate,
    /// Fewer than two trajectories, so standard errors are meaningless.
    pub degenerate: bool,
}

/// Fixed-shape pairwise sum, so the result only depends on the order of `xs`.
fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 32 {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

fn estimate(xs: &[f64]) -> Estimate {
    let n = xs.len();
    if n == 0 {
        return Estimate { mean: f64::NAN, se: f64::NAN };
    }
    let mean = pairwise_sum(xs) / n as f64;
    if n < 2 {
        return Estimate { mean, se: 0.0 };
    }
    let dev: Vec<f64> = xs.iter().map(|x| (x - mean) * (x - mean)).collect();
    let var = pairwise_sum(&dev) / (n - 1) as f64;
    Estimate { mean, se: (var / n as f64).sqrt() }
}

/// Means and standard errors from per-trajectory player totals.
pub fn empirical_value(totals: &[Vec<f64>], horizon: usize, failures: usize, master_seed: u64) -> Summary {
    let n = totals.first().map_or(0, |r| r.len());
    let per_player = (0..n).map(|i| estimate(&totals.iter().map(|r| r[i]).collect::<Vec<_>>())).collect();
    let per_time: Vec<f64> = totals.iter().map(|r| r.iter().sum::<f64>() / horizon as f64).collect();
    Summary {
        master_seed,
        num_trajectories: totals.len(),
        failures,
        per_player,
        per_time_total: estimate(&per_time),
        degenerate: totals.len() < 2,
    }
}

/// Mean and standard error of `a[k] - b[k]` (common random numbers).
pub fn paired_difference(a: &[f64], b: &[f64]) -> Estimate {
    assert_eq!(a.len(), b.len(), "paired samples must have equal length");
    estimate(&a.iter().zip(b).map(|(x, y)| x - y).collect::<Vec<_>>())
}
