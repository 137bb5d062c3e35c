//! FEATHER graph embeddings: characteristic functions of the log-degree attribute
//! under random-walk smoothing, mean-pooled over nodes.

use std::f64::consts::PI;

use graphsim_core::Graph;

pub const EVAL_POINTS: usize = 25;
pub const SCALES: usize = 5;

/// Evaluation points `j * pi / EVAL_POINTS` for `j = 1..=EVAL_POINTS`.
pub fn thetas() -> Vec<f64> {
    (1..=EVAL_POINTS).map(|j| j as f64 * PI / EVAL_POINTS as f64).collect()
}

/// Graph embedding of length `2 * EVAL_POINTS * SCALES`, ordered by scale, then real
/// parts for every theta, then imaginary parts.
pub fn feather_embedding(g: &Graph) -> Vec<f64> {
    let n = g.node_count();
    let x: Vec<f64> = (0..n).map(|u| (g.degree(u) as f64 + 1.0).ln()).collect();
    let th = thetas();
    let width = 2 * th.len();
    let mut cur: Vec<f64> = Vec::with_capacity(n * width);
    for &xu in &x {
        cur.extend(th.iter().map(|t| (t * xu).cos()));
        cur.extend(th.iter().map(|t| (t * xu).sin()));
    }
    let mut next = vec![0.0; n * width];
    let mut out = Vec::with_capacity(SCALES * width);
    for _ in 0..SCALES {
        for u in 0..n {
            let row = &mut next[u * width..(u + 1) * width];
            row.iter_mut().for_each(|v| *v = 0.0);
            let nb = g.neighbors(u);
            let w = 1.0 / nb.len().max(1) as f64;
            for &v in nb {
                for (dst, src) in row.iter_mut().zip(&cur[v * width..(v + 1) * width]) {
                    *dst += w * src;
                }
            }
        }
        std::mem::swap(&mut cur, &mut next);
        for c in 0..width {
            out.push((0..n).map(|u| cur[u * width + c]).sum::<f64>() / n as f64);
        }
    }
    out
}
