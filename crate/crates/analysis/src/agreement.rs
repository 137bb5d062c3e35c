use graphsim_core::{Choice, JudgmentRecord};
use serde::{Deserialize, Serialize};

use crate::StatsError;

/// z for a two-sided 95% interval.
pub const Z_95: f64 = 1.959_963_984_540_054;

/// The target with strictly higher similarity; exact ties abstain.
pub fn measure_choice(s_a: f64, s_b: f64) -> Choice {
    if s_a > s_b {
        Choice::TargetA
    } else if s_b > s_a {
        Choice::TargetB
    } else {
        Choice::Abstain
    }
}

/// A measure's decision on one trial, from its similarities to the two targets.
pub fn measure_judgment(measure: &str, trial_id: &str, triplet_id: &str, s_a: f64, s_b: f64) -> JudgmentRecord {
    JudgmentRecord::new(measure, trial_id, triplet_id, measure_choice(s_a, s_b))
}

/// Cohen's kappa of a square contingency table (rows: rater 1, columns: rater 2).
pub fn kappa_from_table(table: &[Vec<f64>]) -> Result<f64, StatsError> {
    let k = table.len();
    if k == 0 || table.iter().any(|r| r.len() != k) {
        return Err(StatsError::LengthMismatch);
    }
    let n: f64 = table.iter().flatten().sum();
    if n <= 0.0 {
        return Err(StatsError::InsufficientData { needed: 1, found: 0 });
    }
    let p_o = (0..k).map(|i| table[i][i]).sum::<f64>() / n;
    let p_e = (0..k)
        .map(|i| {
            let row: f64 = table[i].iter().sum();
            let col: f64 = table.iter().map(|r| r[i]).sum();
            row * col
        })
        .sum::<f64>()
        / (n * n);
    if (1.0 - p_e).abs() < 1e-15 {
        return Err(StatsError::Degenerate("chance agreement is 1"));
    }
    Ok((p_o - p_e) / (1.0 - p_e))
}

/// Choice pairs with any abstention dropped.
pub fn decided_pairs(a: &[Choice], b: &[Choice]) -> Result<Vec<(Choice, Choice)>, StatsError> {
    if a.len() != b.len() {
        return Err(StatsError::LengthMismatch);
    }
    Ok(a.iter().zip(b).filter(|(x, y)| !x.is_abstain() && !y.is_abstain()).map(|(&x, &y)| (x, y)).collect())
}

fn table_of(pairs: &[(Choice, Choice)]) -> Vec<Vec<f64>> {
    let idx = |c: Choice| usize::from(c == Choice::TargetB);
    let mut t = vec![vec![0.0; 2]; 2];
    for &(x, y) in pairs {
        t[idx(x)][idx(y)] += 1.0;
    }
    t
}

/// Kappa over T_A/T_B decisions; trials where either side abstained are dropped.
pub fn cohens_kappa(a: &[Choice], b: &[Choice]) -> Result<f64, StatsError> {
    let pairs = decided_pairs(a, b)?;
    if pairs.len() < 2 {
        return Err(StatsError::InsufficientData { needed: 2, found: pairs.len() });
    }
    kappa_from_table(&table_of(&pairs))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KappaEstimate {
    pub kappa: f64,
    pub se: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    /// Trials that entered the estimate.
    pub n: usize,
}

/// Kappa with the large-sample standard error sqrt(p_o(1 - p_o) / (n (1 - p_e)^2)) and a
/// 95% interval clamped to [-1, 1].
pub fn kappa_with_ci(a: &[Choice], b: &[Choice]) -> Result<KappaEstimate, StatsError> {
    let pairs = decided_pairs(a, b)?;
    let kappa = cohens_kappa(a, b)?;
    let n = pairs.len() as f64;
    let p_o = pairs.iter().filter(|(x, y)| x == y).count() as f64 / n;
    let p_e = expected_agreement(&pairs);
    let se = (p_o * (1.0 - p_o) / (n * (1.0 - p_e).powi(2))).sqrt();
    Ok(KappaEstimate { kappa, se, ci_low: (kappa - Z_95 * se).max(-1.0), ci_high: (kappa + Z_95 * se).min(1.0), n: pairs.len() })
}

fn expected_agreement(pairs: &[(Choice, Choice)]) -> f64 {
    let n = pairs.len() as f64;
    let a1 = pairs.iter().filter(|p| p.0 == Choice::TargetA).count() as f64 / n;
    let b1 = pairs.iter().filter(|p| p.1 == Choice::TargetA).count() as f64 / n;
    a1 * b1 + (1.0 - a1) * (1.0 - b1)
}
