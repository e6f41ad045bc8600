//! Archetypal-vs-random comparison harness.
//!
//! Evaluates one archetypal partition against repeated seeded random
//! splits of the same encoded features, reporting per-metric means and
//! standard deviations over the random baseline.

use ndarray::{Array2, Axis};
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::assign::{partition_matrix, test_count, Partition, PartitionOptions};
use crate::encode::{encode, DatasetSource};
use crate::error::{Error, Result};
use crate::metrics::{evaluate_split, MetricReport, MetricVector};
use crate::util::par_map_indexed;

/// Seeded uniform split: `k` test indices drawn without replacement.
///
/// Deterministic per `(n, fraction, seed)`: a partial Fisher-Yates walk
/// over `0..n` driven by ChaCha8, taking `j = i + next_u64() % (n - i)`.
pub fn random_split(n: usize, fraction: f64, seed: u64) -> Result<Partition> {
    if n < 2 {
        return Err(Error::Data(format!(
            "splitting needs at least 2 instances, got {n}"
        )));
    }
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::Config(format!(
            "fraction must lie in the open interval (0, 1), got {fraction}"
        )));
    }
    let k = test_count(n, fraction);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pool: Vec<usize> = (0..n).collect();
    for i in 0..k {
        let j = i + (rng.next_u64() as usize) % (n - i);
        pool.swap(i, j);
    }
    let test_indices = pool[..k].to_vec();
    let mut in_test = vec![false; n];
    for &t in &test_indices {
        in_test[t] = true;
    }
    let train_indices: Vec<usize> = (0..n).filter(|&i| !in_test[i]).collect();
    Ok(Partition {
        test_indices,
        train_indices,
        fraction,
        k,
        canonical_test_positions: Vec::new(),
    })
}

/// One archetypal split against a seeded random baseline.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub fraction: f64,
    /// Metrics of the archetypal partition.
    pub benchmake: MetricReport,
    /// Per-metric mean over the random-split seeds.
    pub random_mean: MetricVector,
    /// Per-metric sample standard deviation over the seeds.
    pub random_std: MetricVector,
    pub seeds: Vec<u64>,
}

fn split_rows(values: &Array2<f32>, part: &Partition) -> (Array2<f32>, Array2<f32>) {
    (
        values.select(Axis(0), &part.train_indices),
        values.select(Axis(0), &part.test_indices),
    )
}

/// Compare on already-encoded features. Both methods are evaluated with
/// `evaluate_split` on identical feature matrices; only the index sets
/// differ.
pub fn compare_encoded(
    values: &Array2<f32>,
    fraction: f64,
    n_seeds: usize,
    opts: &PartitionOptions,
) -> Result<ComparisonReport> {
    if n_seeds < 2 {
        return Err(Error::Config(format!(
            "need at least 2 random seeds for a mean/std baseline, got {n_seeds}"
        )));
    }
    let n = values.nrows();
    let archetypal = partition_matrix(values, fraction, opts)?;
    let (train, test) = split_rows(values, &archetypal);
    let benchmake = evaluate_split(&train, &test)?;

    let seeds: Vec<u64> = (0..n_seeds as u64).collect();
    let runs: Vec<Result<MetricVector>> = par_map_indexed(n_seeds, |s| {
        let part = random_split(n, fraction, seeds[s])?;
        let (tr, te) = split_rows(values, &part);
        Ok(evaluate_split(&tr, &te)?.aggregate())
    });
    let runs: Vec<MetricVector> = runs.into_iter().collect::<Result<Vec<_>>>()?;

    let mut mean = [0.0f64; 7];
    for run in &runs {
        for (m, v) in mean.iter_mut().zip(run.to_array()) {
            *m += v;
        }
    }
    for m in mean.iter_mut() {
        *m /= runs.len() as f64;
    }
    let mut var = [0.0f64; 7];
    for run in &runs {
        for ((v, m), x) in var.iter_mut().zip(mean).zip(run.to_array()) {
            let r = x - m;
            *v += r * r;
        }
    }
    for v in var.iter_mut() {
        *v = (*v / (runs.len() - 1) as f64).sqrt();
    }

    Ok(ComparisonReport {
        fraction,
        benchmake,
        random_mean: MetricVector::from_array(mean),
        random_std: MetricVector::from_array(var),
        seeds,
    })
}

/// Encode a source and compare at one fraction.
pub fn compare(
    source: &DatasetSource,
    fraction: f64,
    n_seeds: usize,
    opts: &PartitionOptions,
) -> Result<ComparisonReport> {
    let dataset = encode(source)?;
    compare_encoded(&dataset.matrix.values, fraction, n_seeds, opts)
}

/// One independent comparison per fraction.
pub fn sweep(
    source: &DatasetSource,
    fractions: &[f64],
    n_seeds: usize,
    opts: &PartitionOptions,
) -> Result<Vec<ComparisonReport>> {
    let dataset = encode(source)?;
    fractions
        .iter()
        .map(|&f| compare_encoded(&dataset.matrix.values, f, n_seeds, opts))
        .collect()
}
