//! Laplacian spectra and the three spectral distances (Laplacian, Ipsen-Mikhailov, NetLSD).

use std::collections::HashMap;
use std::f64::consts::FRAC_PI_2;
use std::sync::{Mutex, OnceLock};

use graphsim_core::Graph;
use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

/// Eigenvalues below this are treated as zero.
pub const ZERO_EIGENVALUE: f64 = 1e-8;

pub fn laplacian_matrix(g: &Graph) -> DMatrix<f64> {
    let n = g.node_count();
    let mut l = DMatrix::zeros(n, n);
    for u in 0..n {
        l[(u, u)] = g.degree(u) as f64;
        for &v in g.neighbors(u) {
            l[(u, v)] = -1.0;
        }
    }
    l
}

/// `I - D^{-1/2} A D^{-1/2}`.
pub fn normalized_laplacian_matrix(g: &Graph) -> DMatrix<f64> {
    let n = g.node_count();
    let inv_sqrt: Vec<f64> = (0..n).map(|u| 1.0 / (g.degree(u).max(1) as f64).sqrt()).collect();
    let mut l = DMatrix::identity(n, n);
    for u in 0..n {
        if g.degree(u) == 0 {
            l[(u, u)] = 0.0;
        }
        for &v in g.neighbors(u) {
            l[(u, v)] = -inv_sqrt[u] * inv_sqrt[v];
        }
    }
    l
}

fn clamp_small(values: &mut [f64]) {
    for v in values.iter_mut() {
        if *v < ZERO_EIGENVALUE {
            *v = 0.0;
        }
    }
}

/// Eigenvalues of `D - A` in nonincreasing order; round-off below zero is clamped.
pub fn laplacian_spectrum(g: &Graph) -> Vec<f64> {
    let mut values: Vec<f64> = laplacian_matrix(g).symmetric_eigenvalues().iter().copied().collect();
    clamp_small(&mut values);
    values.sort_by(|a, b| b.total_cmp(a));
    values
}

/// Eigen-decomposition with eigenvalues ascending and eigenvectors as matching columns.
#[derive(Debug, Clone)]
pub struct Eigen {
    pub values: Vec<f64>,
    pub vectors: DMatrix<f64>,
}

pub fn sorted_eigen(m: DMatrix<f64>) -> Eigen {
    let n = m.nrows();
    let SymmetricEigen { eigenvalues, eigenvectors } = SymmetricEigen::new(m);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eigenvalues[a].total_cmp(&eigenvalues[b]));
    let mut values: Vec<f64> = order.iter().map(|&i| eigenvalues[i]).collect();
    clamp_small(&mut values);
    let vectors = DMatrix::from_fn(n, n, |r, c| eigenvectors[(r, order[c])]);
    Eigen { values, vectors }
}

pub fn normalized_laplacian_eigen(g: &Graph) -> Eigen {
    sorted_eigen(normalized_laplacian_matrix(g))
}

/// Euclidean distance between nonincreasing spectra, zero-padded to equal length.
pub fn laplacian_spectral_distance(s1: &[f64], s2: &[f64]) -> f64 {
    let len = s1.len().max(s2.len());
    (0..len)
        .map(|i| {
            let a = s1.get(i).copied().unwrap_or(0.0);
            let b = s2.get(i).copied().unwrap_or(0.0);
            (a - b).powi(2)
        })
        .sum::<f64>()
        .sqrt()
}

pub const NETLSD_POINTS: usize = 250;
pub const NETLSD_T_MIN: f64 = 1e-2;
pub const NETLSD_T_MAX: f64 = 1e2;

pub fn log_space(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.log10(), hi.log10());
    (0..count).map(|i| 10f64.powf(a + (b - a) * i as f64 / (count - 1) as f64)).collect()
}

/// Heat trace of the normalized Laplacian divided by the empty-graph trace `n`.
pub fn netlsd_signature(normalized_eigenvalues: &[f64], points: usize) -> Vec<f64> {
    let n = normalized_eigenvalues.len() as f64;
    log_space(NETLSD_T_MIN, NETLSD_T_MAX, points)
        .into_iter()
        .map(|t| normalized_eigenvalues.iter().map(|&l| (-l * t).exp()).sum::<f64>() / n)
        .collect()
}

pub fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

/// Vibrational frequencies `sqrt(lambda)` of a Laplacian spectrum with the single
/// smallest (zero) eigenvalue removed.
pub fn im_frequencies(laplacian_desc: &[f64]) -> Vec<f64> {
    let mut f: Vec<f64> = laplacian_desc.iter().map(|&l| l.max(0.0).sqrt()).collect();
    f.pop();
    f
}

/// A Lorentzian pole `a + i*gamma` with its cached `Log(-pole)`.
#[derive(Clone, Copy)]
struct Pole {
    z: Complex64,
    log_neg: Complex64,
}

impl Pole {
    fn new(a: f64, gamma: f64) -> Self {
        let z = Complex64::new(a, gamma);
        Self { z, log_neg: (-z).ln() }
    }

    fn conj(self) -> Self {
        // -z is never on the branch cut because Im z != 0.
        Self { z: self.z.conj(), log_neg: self.log_neg.conj() }
    }
}

/// `integral_0^inf dx / ((x - u)(x - v))` for `u`, `v` off the real axis.
fn half_line_pair(u: Pole, v: Pole) -> Complex64 {
    let d = v.z - u.z;
    if d.norm() < 1e-3 * u.z.norm() {
        // Series of (Log(-v) - Log(-u)) / (u - v) around v = u.
        let inv = 1.0 / u.z;
        return -inv + d * inv * inv / 2.0 - d * d * inv * inv * inv / 3.0;
    }
    (v.log_neg - u.log_neg) / (u.z - v.z)
}

/// `L_a L_b` expands into four pole-pair terms; the two conjugate pairs share real parts.
fn pole_overlap(p: Pole, q: Pole) -> f64 {
    -0.5 * (half_line_pair(p, q).re - half_line_pair(p, q.conj()).re)
}

/// `integral_0^inf L_a(x) L_b(x) dx` for Lorentzians `L_a(x) = g / ((x - a)^2 + g^2)`.
pub fn lorentzian_overlap(a: f64, b: f64, gamma: f64) -> f64 {
    pole_overlap(Pole::new(a, gamma), Pole::new(b, gamma))
}

/// `integral_0^inf L_a(x) dx`.
pub fn lorentzian_mass(a: f64, gamma: f64) -> f64 {
    FRAC_PI_2 + (a / gamma).atan()
}

fn overlap_sum(x: &[Pole], y: &[Pole]) -> f64 {
    x.iter().map(|&p| y.iter().map(|&q| pole_overlap(p, q)).sum::<f64>()).sum()
}

/// L2 distance between the normalized Lorentzian densities of two frequency sets.
pub fn ipsen_mikhailov_with_gamma(f1: &[f64], f2: &[f64], gamma: f64) -> f64 {
    let z1: f64 = f1.iter().map(|&a| lorentzian_mass(a, gamma)).sum();
    let z2: f64 = f2.iter().map(|&a| lorentzian_mass(a, gamma)).sum();
    let p1: Vec<Pole> = f1.iter().map(|&a| Pole::new(a, gamma)).collect();
    let p2: Vec<Pole> = f2.iter().map(|&a| Pole::new(a, gamma)).collect();
    let d2 = overlap_sum(&p1, &p1) / (z1 * z1) + overlap_sum(&p2, &p2) / (z2 * z2) - 2.0 * overlap_sum(&p1, &p2) / (z1 * z2);
    d2.max(0.0).sqrt()
}

/// Scale for which the empty graph and the complete graph on `n` nodes lie at
/// Ipsen-Mikhailov distance exactly 1.
pub fn im_calibrated_gamma(n: usize) -> f64 {
    static CACHE: OnceLock<Mutex<HashMap<usize, f64>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(&g) = cache.lock().expect("gamma cache").get(&n) {
        return g;
    }
    let empty = [0.0];
    let complete = [(n as f64).sqrt()];
    let dist = |ln_g: f64| ipsen_mikhailov_with_gamma(&empty, &complete, ln_g.exp());
    let (mut lo, mut hi) = (-20.0f64, 10.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if dist(mid) > 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let g = (0.5 * (lo + hi)).exp();
    cache.lock().expect("gamma cache").insert(n, g);
    g
}

/// Ipsen-Mikhailov distance with the calibrated scale for `max(n1, n2)` nodes,
/// clamped to [0, 1].
pub fn ipsen_mikhailov(laplacian_desc1: &[f64], laplacian_desc2: &[f64]) -> f64 {
    let n = laplacian_desc1.len().max(laplacian_desc2.len());
    let gamma = im_calibrated_gamma(n);
    let d = ipsen_mikhailov_with_gamma(&im_frequencies(laplacian_desc1), &im_frequencies(laplacian_desc2), gamma);
    d.clamp(0.0, 1.0)
}
