//! Seeded synthetic datasets for tests, benchmarks and the browser demo.

use ndarray::Array2;
use rand_chacha::ChaCha8Rng;
use rand_core::SeedableRng;

use crate::util::unit_open_closed_f64;

/// Standard-normal pair via Box-Muller on ChaCha8 draws.
fn normal_pair(rng: &mut ChaCha8Rng) -> (f64, f64) {
    let u1 = unit_open_closed_f64(rng);
    let u2 = unit_open_closed_f64(rng);
    let r = (-2.0 * u1.ln()).sqrt();
    let theta = std::f64::consts::TAU * u2;
    (r * theta.cos(), r * theta.sin())
}

/// 2-D cloud: `n_core` unit-Gaussian points followed by `n_outliers`
/// points planted exactly on the circle of the given radius. With a
/// radius well beyond the Gaussian bulk, every outlier is a convex-hull
/// vertex of the combined set.
pub fn gaussian_with_hull_outliers(
    n_core: usize,
    n_outliers: usize,
    radius: f64,
    seed: u64,
) -> Array2<f32> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows: Vec<f32> = Vec::with_capacity(2 * (n_core + n_outliers));
    for _ in 0..n_core {
        let (x, y) = normal_pair(&mut rng);
        rows.push(x as f32);
        rows.push(y as f32);
    }
    for _ in 0..n_outliers {
        let theta = std::f64::consts::TAU * unit_open_closed_f64(&mut rng);
        rows.push((radius * theta.cos()) as f32);
        rows.push((radius * theta.sin()) as f32);
    }
    Array2::from_shape_vec((n_core + n_outliers, 2), rows).expect("row-major fill")
}

/// Seeded uniform matrix with entries in `[lo, hi)`.
pub fn uniform_matrix(n: usize, d: usize, seed: u64, lo: f32, hi: f32) -> Array2<f32> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data: Vec<f32> = (0..n * d)
        .map(|_| lo + (hi - lo) * (1.0 - unit_open_closed_f64(&mut rng) as f32))
        .collect();
    Array2::from_shape_vec((n, d), data).expect("row-major fill")
}
