//! Two-sided one-sample t, Mann-Whitney U and Wilcoxon signed-rank tests.

use graphsim_measures::stats::average_ranks;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};
use statrs::function::erf::erfc;

use crate::StatsError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub statistic: f64,
    pub p: f64,
}

fn normal_sf(z: f64) -> f64 {
    0.5 * erfc(z / std::f64::consts::SQRT_2)
}

/// Sum of t^3 - t over groups of tied values.
fn tie_term(values: &[f64]) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    sorted
        .chunk_by(|a, b| a == b)
        .map(|g| {
            let t = g.len() as f64;
            t * t * t - t
        })
        .sum()
}

/// Student t against `mu0` with n - 1 degrees of freedom.
pub fn one_sample_ttest(values: &[f64], mu0: f64) -> Result<TestResult, StatsError> {
    let n = values.len();
    if n < 2 {
        return Err(StatsError::InsufficientData { needed: 2, found: n });
    }
    let nf = n as f64;
    let mean = values.iter().sum::<f64>() / nf;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (nf - 1.0);
    if var <= 0.0 {
        return Err(StatsError::Degenerate("zero variance"));
    }
    let t = (mean - mu0) / (var / nf).sqrt();
    let dist = StudentsT::new(0.0, 1.0, nf - 1.0).map_err(|_| StatsError::Degenerate("degrees of freedom"))?;
    Ok(TestResult { statistic: t, p: (2.0 * dist.sf(t.abs())).min(1.0) })
}

/// U of the first sample, with the normal approximation, tie correction and continuity
/// correction.
pub fn mann_whitney_u(x: &[f64], y: &[f64]) -> Result<TestResult, StatsError> {
    let (n1, n2) = (x.len(), y.len());
    if n1 == 0 || n2 == 0 {
        return Err(StatsError::InsufficientData { needed: 1, found: 0 });
    }
    let all: Vec<f64> = x.iter().chain(y).copied().collect();
    let ranks = average_ranks(&all);
    let (n1f, n2f, n) = (n1 as f64, n2 as f64, (n1 + n2) as f64);
    let r1: f64 = ranks[..n1].iter().sum();
    let u1 = r1 - n1f * (n1f + 1.0) / 2.0;
    let u = u1.max(n1f * n2f - u1);
    let mu = n1f * n2f / 2.0;
    let s = (n1f * n2f / 12.0 * ((n + 1.0) - tie_term(&all) / (n * (n - 1.0)))).sqrt();
    let p = if s > 0.0 { (2.0 * normal_sf((u - mu - 0.5) / s)).min(1.0) } else { 1.0 };
    Ok(TestResult { statistic: u1, p })
}

/// W = min(R+, R-) over nonzero differences, normal approximation with tie correction.
pub fn wilcoxon_signed_rank(diffs: &[f64]) -> Result<TestResult, StatsError> {
    let d: Vec<f64> = diffs.iter().copied().filter(|&v| v != 0.0).collect();
    if d.len() < 6 {
        return Err(StatsError::InsufficientData { needed: 6, found: d.len() });
    }
    let abs: Vec<f64> = d.iter().map(|v| v.abs()).collect();
    let ranks = average_ranks(&abs);
    let r_plus: f64 = d.iter().zip(&ranks).filter(|(v, _)| **v > 0.0).map(|(_, r)| r).sum();
    let n = d.len() as f64;
    let r_minus = n * (n + 1.0) / 2.0 - r_plus;
    let w = r_plus.min(r_minus);
    let mean = n * (n + 1.0) / 4.0;
    let se = ((n * (n + 1.0) * (2.0 * n + 1.0) - 0.5 * tie_term(&abs)) / 24.0).sqrt();
    let p = if se > 0.0 { (2.0 * normal_sf(((w - mean) / se).abs())).min(1.0) } else { 1.0 };
    Ok(TestResult { statistic: w, p })
}
