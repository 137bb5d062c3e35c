use graphsim_measures::stats::average_ranks;

use crate::StatsError;

/// Upper edges of bins 1 to 4 after min-max scaling; bins are closed on the left.
pub const BIN_EDGES: [f64; 4] = [0.2, 0.4, 0.6, 0.8];

/// Min-max scales `deltas` and maps each to a bin 1..=5. Constant input maps to bin 1.
pub fn binned_delta(deltas: &[f64]) -> Vec<u8> {
    let (lo, hi) = deltas.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &d| (lo.min(d), hi.max(d)));
    if hi <= lo {
        return vec![1; deltas.len()];
    }
    deltas
        .iter()
        .map(|&d| {
            let x = (d - lo) / (hi - lo);
            1 + BIN_EDGES.iter().filter(|&&e| x >= e).count() as u8
        })
        .collect()
}

fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx).powi(2);
        syy += (b - my).powi(2);
    }
    (sxx > 0.0 && syy > 0.0).then(|| (sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Spearman's rho: Pearson correlation of average ranks.
pub fn spearman(a: &[f64], b: &[f64]) -> Result<f64, StatsError> {
    if a.len() != b.len() {
        return Err(StatsError::LengthMismatch);
    }
    if a.len() < 3 {
        return Err(StatsError::InsufficientData { needed: 3, found: a.len() });
    }
    pearson(&average_ranks(a), &average_ranks(b)).ok_or(StatsError::Degenerate("zero variance"))
}
