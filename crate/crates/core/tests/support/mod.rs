#![allow(dead_code)]

pub mod quadrature;

use chaintail::linalg::{CMatrix, C64};
use chaintail::metric::{FiniteMetricSpace, PointNorm};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Point cloud in R^d under a random ℓ_p norm. With probability 1/4 one
/// point is duplicated, which makes the distance a proper semi-metric.
pub fn random_space(rng: &mut ChaCha8Rng, n: usize) -> FiniteMetricSpace {
    let d = rng.random_range(1..=3);
    let mut points: Vec<Vec<f64>> = (0..n).map(|_| (0..d).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
    if n > 2 && rng.random_bool(0.25) {
        let i = rng.random_range(1..n);
        points[i] = points[0].clone();
    }
    let norm = match rng.random_range(0..3) {
        0 => PointNorm::L1,
        1 => PointNorm::L2,
        _ => PointNorm::Linf,
    };
    FiniteMetricSpace::from_points(&points, norm, None).expect("point clouds give valid semi-metrics")
}

pub fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize, complex: bool) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| {
        let re = rng.random_range(-1.0..1.0);
        let im = if complex { rng.random_range(-1.0..1.0) } else { 0.0 };
        C64::new(re, im)
    })
}

/// Haar-ish random unitary from the QR factor of a complex Gaussian-like matrix.
pub fn random_unitary(rng: &mut ChaCha8Rng, n: usize) -> CMatrix {
    random_matrix(rng, n, n, true).qr().q()
}
