//! Graph-level distance from two sets of node embeddings.

use nalgebra::DMatrix;

fn row_distance(a: &DMatrix<f64>, i: usize, b: &DMatrix<f64>, j: usize) -> f64 {
    (0..a.ncols()).map(|c| (a[(i, c)] - b[(j, c)]).powi(2)).sum::<f64>().sqrt()
}

/// Mean over rows of `a` of the Euclidean distance to the nearest row of `b`.
pub fn directed_best_match(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    assert_eq!(a.ncols(), b.ncols(), "embedding widths differ");
    if a.nrows() == 0 || b.nrows() == 0 {
        return 0.0;
    }
    let total: f64 = (0..a.nrows()).map(|i| (0..b.nrows()).map(|j| row_distance(a, i, b, j)).fold(f64::INFINITY, f64::min)).sum();
    total / a.nrows() as f64
}

/// Best-match distance averaged over both directions.
pub fn symmetric_best_match(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    0.5 * (directed_best_match(a, b) + directed_best_match(b, a))
}

/// Moore-Penrose pseudo-inverse; singular values below `1e-10 * max` are dropped.
pub fn pinv(m: &DMatrix<f64>) -> DMatrix<f64> {
    let svd = m.clone().svd(true, true);
    let max = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let eps = (max * 1e-10).max(f64::MIN_POSITIVE);
    svd.pseudo_inverse(eps).expect("both singular vector sets were computed")
}
