//! Small descriptive-statistics helpers.

/// Ranks starting at 1 with ties sharing their average rank.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &o in &order[i..=j] {
            ranks[o] = avg;
        }
        i = j + 1;
    }
    ranks
}

pub fn mean(x: &[f64]) -> f64 {
    if x.is_empty() {
        0.0
    } else {
        x.iter().sum::<f64>() / x.len() as f64
    }
}

pub fn median(x: &[f64]) -> f64 {
    if x.is_empty() {
        return 0.0;
    }
    let mut s = x.to_vec();
    s.sort_by(f64::total_cmp);
    let m = s.len() / 2;
    if s.len() % 2 == 1 {
        s[m]
    } else {
        0.5 * (s[m - 1] + s[m])
    }
}

fn central_moment(x: &[f64], mu: f64, k: i32) -> f64 {
    x.iter().map(|v| (v - mu).powi(k)).sum::<f64>() / x.len() as f64
}

/// Population standard deviation.
pub fn std_dev(x: &[f64]) -> f64 {
    if x.is_empty() {
        return 0.0;
    }
    central_moment(x, mean(x), 2).sqrt()
}

/// Biased sample skewness; 0 for constant input.
pub fn skewness(x: &[f64]) -> f64 {
    let mu = mean(x);
    let m2 = central_moment(x, mu, 2);
    if m2 <= 1e-300 {
        return 0.0;
    }
    central_moment(x, mu, 3) / m2.powf(1.5)
}

/// Biased excess (Fisher) kurtosis; 0 for constant input.
pub fn kurtosis(x: &[f64]) -> f64 {
    let mu = mean(x);
    let m2 = central_moment(x, mu, 2);
    if m2 <= 1e-300 {
        return 0.0;
    }
    central_moment(x, mu, 4) / (m2 * m2) - 3.0
}
