//! GRASP: functional-map alignment of normalized-Laplacian eigenbases using
//! heat-kernel node descriptors.

use nalgebra::DMatrix;

use crate::alignment::{pinv, symmetric_best_match};
use crate::spectral::Eigen;

/// Upper bound on the number of eigenvectors in the basis.
pub const MAX_BASIS: usize = 20;
pub const DESCRIPTOR_TIMES: usize = 20;
pub const T_MIN: f64 = 0.1;
pub const T_MAX: f64 = 50.0;
/// Eigenvalue differences below this count as a repeated eigenvalue.
pub const GAP_TOLERANCE: f64 = 1e-6;

fn cuts_cleanly(values: &[f64], q: usize) -> bool {
    q == values.len() || values[q] - values[q - 1] > GAP_TOLERANCE
}

/// Largest basis size `q <= MAX_BASIS` that splits neither spectrum inside a
/// repeated eigenvalue.
pub fn common_basis_size(v1: &[f64], v2: &[f64]) -> usize {
    let max_q = MAX_BASIS.min(v1.len()).min(v2.len());
    (1..=max_q).rev().find(|&q| cuts_cleanly(v1, q) && cuts_cleanly(v2, q)).unwrap_or(1)
}

pub fn descriptor_times() -> Vec<f64> {
    (0..DESCRIPTOR_TIMES).map(|i| T_MIN + (T_MAX - T_MIN) * i as f64 / (DESCRIPTOR_TIMES - 1) as f64).collect()
}

/// Heat-kernel diagonal `sum_j exp(-t lambda_j) phi_j(i)^2` per node and time.
pub fn heat_descriptors(e: &Eigen) -> DMatrix<f64> {
    let times = descriptor_times();
    let n = e.values.len();
    DMatrix::from_fn(n, times.len(), |i, c| (0..n).map(|j| (-times[c] * e.values[j]).exp() * e.vectors[(i, j)].powi(2)).sum())
}

/// Node embeddings of `from` mapped into the basis of `to`, and of `to` restricted
/// to the span the descriptors reach.
fn mapped_embeddings(from: &Eigen, to: &Eigen, q: usize) -> (DMatrix<f64>, DMatrix<f64>) {
    let phi_from = from.vectors.columns(0, q).into_owned();
    let phi_to = to.vectors.columns(0, q).into_owned();
    let a = phi_from.transpose() * heat_descriptors(from);
    let b = phi_to.transpose() * heat_descriptors(to);
    let c = &b * pinv(&a);
    let projector = &b * pinv(&b);
    (phi_from * c.transpose(), phi_to * projector.transpose())
}

/// Embedding pairs for both mapping directions: `[(g1 mapped, g2), (g1, g2 mapped)]`.
pub fn grasp_embeddings(e1: &Eigen, e2: &Eigen) -> [(DMatrix<f64>, DMatrix<f64>); 2] {
    let q = common_basis_size(&e1.values, &e2.values);
    let forward = mapped_embeddings(e1, e2, q);
    let (y2, y1) = mapped_embeddings(e2, e1, q);
    [forward, (y1, y2)]
}

/// Best-match embedding distance, averaged over both mapping directions.
pub fn grasp_distance(e1: &Eigen, e2: &Eigen) -> f64 {
    let [(x1, x2), (y1, y2)] = grasp_embeddings(e1, e2);
    0.5 * (symmetric_best_match(&x1, &x2) + symmetric_best_match(&y1, &y2))
}
