//! Small internal helpers shared across modules.

/// Map `0..n` through `f`, collecting results in index order.
///
/// Runs on the rayon pool when the `parallel` feature is enabled and
/// sequentially otherwise; the output is identical either way because
/// results are assembled by index, not by completion order.
pub(crate) fn par_map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..n).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(f).collect()
    }
}

/// Number of workers distance batching should plan for.
pub(crate) fn worker_count() -> usize {
    #[cfg(feature = "parallel")]
    {
        rayon::current_num_threads().max(1)
    }
    #[cfg(not(feature = "parallel"))]
    {
        1
    }
}

/// Uniform draw in (0, 1] with 24-bit resolution.
///
/// The mapping from the raw `next_u32` output is part of the crate's
/// determinism contract: `((x >> 8) + 1) / 2^24`.
pub(crate) fn unit_open_closed_f32(rng: &mut impl rand_core::RngCore) -> f32 {
    (((rng.next_u32() >> 8) + 1) as f32) * (1.0 / 16_777_216.0)
}

/// Uniform draw in (0, 1] with 53-bit resolution: `((x >> 11) + 1) / 2^53`.
pub(crate) fn unit_open_closed_f64(rng: &mut impl rand_core::RngCore) -> f64 {
    (((rng.next_u64() >> 11) + 1) as f64) * (1.0 / 9_007_199_254_740_992.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_chacha::ChaCha8Rng;
    use rand_core::SeedableRng;

    #[test]
    fn unit_draws_stay_in_range() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..10_000 {
            let a = unit_open_closed_f32(&mut rng);
            assert!(a > 0.0 && a <= 1.0);
            let b = unit_open_closed_f64(&mut rng);
            assert!(b > 0.0 && b <= 1.0);
        }
    }

    #[test]
    fn par_map_preserves_index_order() {
        let v = par_map_indexed(100, |i| i * 3);
        assert_eq!(v, (0..100).map(|i| i * 3).collect::<Vec<_>>());
    }
}
