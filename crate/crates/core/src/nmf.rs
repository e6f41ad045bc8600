//! Non-negative matrix factorisation by multiplicative updates.
//!
//! Factorises scaled data `X (m x d)` into non-negative `W (m x k)` and
//! `H (k x d)` minimising the squared Frobenius reconstruction error.
//! The rows of `H` are the archetypes downstream matching works against.
//!
//! All matrix arithmetic is FP32. The scalar error reduction accumulates
//! FP32 residuals in f64 so the convergence test is not polluted by
//! summation noise. Initialisation draws from ChaCha8 seeded with
//! `config.seed`, filling W row-major and then H row-major; this mapping
//! is part of the crate's cross-run determinism contract.

use ndarray::Array2;
use rand_chacha::ChaCha8Rng;
use rand_core::SeedableRng;

use crate::error::{Error, Result};
use crate::util::unit_open_closed_f32;

#[derive(Debug, Clone)]
pub struct NmfConfig {
    /// Archetype count; `1 <= k <= m` (the instance count). `k` may exceed
    /// the feature count: overcomplete factorisations are well defined for
    /// multiplicative updates and arise whenever the requested test set is
    /// larger than the feature dimension.
    pub k: usize,
    pub max_iterations: usize,
    /// Relative error-change stop threshold.
    pub tolerance: f64,
    /// Denominator guard added inside both update rules.
    pub epsilon: f32,
    pub seed: u64,
    /// Upper bound of the uniform initial draws, which lie in (0, init_scale].
    pub init_scale: f32,
}

impl NmfConfig {
    pub fn new(k: usize) -> Self {
        NmfConfig {
            k,
            max_iterations: 300,
            tolerance: 1e-4,
            epsilon: 1e-9,
            seed: 42,
            init_scale: 0.01,
        }
    }

    fn validate(&self, m: usize) -> Result<()> {
        if self.k == 0 || self.k > m {
            return Err(Error::Config(format!(
                "archetype count k={} out of range for {m} instances",
                self.k
            )));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::Config("tolerance must be positive".into()));
        }
        if !(self.epsilon > 0.0) {
            return Err(Error::Config("epsilon must be positive".into()));
        }
        if !(self.init_scale > 0.0) {
            return Err(Error::Config("init_scale must be positive".into()));
        }
        Ok(())
    }
}

/// Factorisation state and its error history.
#[derive(Debug, Clone)]
pub struct FactorPair {
    pub w: Array2<f32>,
    pub h: Array2<f32>,
    /// Squared Frobenius error per iteration; entry 0 is the error of the
    /// initial factors, entry t the error after t update steps.
    pub error_trace: Vec<f64>,
    pub iterations_run: usize,
    pub converged: bool,
}

/// Fill W then H with uniform draws in (0, init_scale] from the seeded
/// generator. Identical `(m, d, config)` always produce bit-identical
/// factors.
pub fn init_factors(m: usize, d: usize, config: &NmfConfig) -> Result<FactorPair> {
    config.validate(m)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut draw_matrix = |rows: usize, cols: usize| {
        let data: Vec<f32> = (0..rows * cols)
            .map(|_| unit_open_closed_f32(&mut rng) * config.init_scale)
            .collect();
        Array2::from_shape_vec((rows, cols), data).expect("row-major fill")
    };
    let w = draw_matrix(m, config.k);
    let h = draw_matrix(config.k, d);
    Ok(FactorPair {
        w,
        h,
        error_trace: Vec::new(),
        iterations_run: 0,
        converged: false,
    })
}

/// Squared Frobenius reconstruction error `||X - WH||_F^2`.
pub fn reconstruction_error(x: &Array2<f32>, w: &Array2<f32>, h: &Array2<f32>) -> f64 {
    let approx = w.dot(h);
    x.iter()
        .zip(approx.iter())
        .map(|(&a, &b)| {
            let r = (a - b) as f64;
            r * r
        })
        .sum()
}

/// One full multiplicative update: H first, then W, each clamped at zero,
/// with the post-update error appended to the trace.
///
/// `H <- H .* (W'X) ./ (W'WH + eps)` followed by
/// `W <- W .* (XH') ./ (WHH' + eps)`.
pub fn update_step(x: &Array2<f32>, factors: &mut FactorPair, epsilon: f32) {
    let wt = factors.w.t();
    let numer_h = wt.dot(x);
    let denom_h = wt.dot(&factors.w).dot(&factors.h);
    azip_ratio(&mut factors.h, &numer_h, &denom_h, epsilon);

    let ht = factors.h.t();
    let numer_w = x.dot(&ht);
    let denom_w = factors.w.dot(&factors.h.dot(&ht));
    azip_ratio(&mut factors.w, &numer_w, &denom_w, epsilon);

    factors
        .error_trace
        .push(reconstruction_error(x, &factors.w, &factors.h));
    factors.iterations_run += 1;
}

fn azip_ratio(base: &mut Array2<f32>, numer: &Array2<f32>, denom: &Array2<f32>, epsilon: f32) {
    ndarray::Zip::from(base)
        .and(numer)
        .and(denom)
        .for_each(|b, &n, &d| {
            let updated = *b * (n / (d + epsilon));
            *b = if updated > 0.0 { updated } else { 0.0 };
        });
}

/// Iterate multiplicative updates until the relative error change
/// `(prev - curr) / max(prev, eps)` drops to `tolerance` or the iteration
/// budget is exhausted.
pub fn factorize(x: &Array2<f32>, config: &NmfConfig) -> Result<FactorPair> {
    let (m, d) = x.dim();
    let mut factors = init_factors(m, d, config)?;
    factors
        .error_trace
        .push(reconstruction_error(x, &factors.w, &factors.h));
    for _ in 0..config.max_iterations {
        update_step(x, &mut factors, config.epsilon);
        let t = factors.error_trace.len();
        let prev = factors.error_trace[t - 2];
        let curr = factors.error_trace[t - 1];
        let rel = (prev - curr) / prev.max(config.epsilon as f64);
        if rel <= config.tolerance {
            factors.converged = true;
            break;
        }
    }
    Ok(factors)
}
