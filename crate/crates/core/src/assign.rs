//! Distance computation and archetype-to-instance matching.
//!
//! Every canonical-order instance gets a Euclidean distance to every
//! archetype; each archetype then claims its nearest still-unclaimed
//! instance, in archetype order, and those instances form the test set.

use ndarray::Array2;

use crate::canonical::{canonical_order, min_max_scale};
use crate::encode::{encode, DatasetSource};
use crate::error::{Error, Result};
use crate::nmf::{factorize, NmfConfig};
use crate::util::{par_map_indexed, worker_count};

/// Instance-to-archetype distances.
#[derive(Debug, Clone)]
pub struct DistanceMatrix {
    /// `values[[i, j]]` = Euclidean distance from instance i to archetype j.
    pub values: Array2<f32>,
    /// Rows per batch used during computation (informational; the result
    /// is bit-identical for any batch size).
    pub batch_size: usize,
}

/// Default batch size: `ceil(n / (4 * workers))`, at least 1.
pub fn default_batch_size(n: usize) -> usize {
    n.div_ceil(4 * worker_count()).max(1)
}

/// Compute the full distance matrix in row batches.
///
/// Each entry sums squared FP32 differences in fixed feature order, so the
/// result does not depend on the batch size or the worker count.
pub fn batched_distances(
    instances: &Array2<f32>,
    archetypes: &Array2<f32>,
    batch_size: usize,
) -> DistanceMatrix {
    let (n, d) = instances.dim();
    let (k, d2) = archetypes.dim();
    assert_eq!(d, d2, "feature dimension mismatch");
    assert!(batch_size >= 1, "batch size must be at least 1");
    let n_batches = n.div_ceil(batch_size);
    let batches: Vec<Vec<f32>> = par_map_indexed(n_batches, |b| {
        let start = b * batch_size;
        let end = (start + batch_size).min(n);
        let mut out = Vec::with_capacity((end - start) * k);
        for i in start..end {
            let row = instances.row(i);
            let row = row.as_slice().expect("standard-layout row");
            for j in 0..k {
                let arch = archetypes.row(j);
                let arch = arch.as_slice().expect("standard-layout row");
                let mut acc = 0f32;
                for (&a, &b) in row.iter().zip(arch) {
                    let diff = a - b;
                    acc += diff * diff;
                }
                out.push(acc.sqrt());
            }
        }
        out
    });
    let mut flat = Vec::with_capacity(n * k);
    for batch in batches {
        flat.extend_from_slice(&batch);
    }
    DistanceMatrix {
        values: Array2::from_shape_vec((n, k), flat).expect("batch assembly"),
        batch_size,
    }
}

/// Greedy unique matching: archetypes in order 0..k each take the argmin
/// over instances not yet claimed; exact ties resolve to the smaller
/// canonical position. Returns canonical positions, one per archetype.
pub fn match_archetypes(distances: &DistanceMatrix) -> Result<Vec<usize>> {
    let (n, k) = distances.values.dim();
    if k > n {
        return Err(Error::Config(format!(
            "cannot match {k} archetypes against {n} instances"
        )));
    }
    let mut taken = vec![false; n];
    let mut picks = Vec::with_capacity(k);
    for j in 0..k {
        let mut best: Option<(f32, usize)> = None;
        for i in 0..n {
            if taken[i] {
                continue;
            }
            let dij = distances.values[[i, j]];
            // strict < keeps the smallest index among exact ties
            if best.map_or(true, |(b, _)| dij < b) {
                best = Some((dij, i));
            }
        }
        let (_, pick) = best.expect("k <= n leaves a candidate");
        taken[pick] = true;
        picks.push(pick);
    }
    Ok(picks)
}

/// Test-set size for a requested fraction: `clamp(floor(fraction * n), 1, n-1)`,
/// guaranteeing both sides of the split are non-empty.
pub fn test_count(n: usize, fraction: f64) -> usize {
    ((fraction * n as f64).floor() as usize).clamp(1, n - 1)
}

/// Pipeline knobs: the NMF schedule plus the distance batch override.
#[derive(Debug, Clone)]
pub struct PartitionOptions {
    pub max_iterations: usize,
    pub tolerance: f64,
    pub epsilon: f32,
    pub seed: u64,
    pub init_scale: f32,
    /// Distance batch size; defaults to `ceil(n / (4 * workers))`.
    pub batch_size: Option<usize>,
}

impl Default for PartitionOptions {
    fn default() -> Self {
        let base = NmfConfig::new(1);
        PartitionOptions {
            max_iterations: base.max_iterations,
            tolerance: base.tolerance,
            epsilon: base.epsilon,
            seed: base.seed,
            init_scale: base.init_scale,
            batch_size: None,
        }
    }
}

impl PartitionOptions {
    pub fn nmf_config(&self, k: usize) -> NmfConfig {
        NmfConfig {
            k,
            max_iterations: self.max_iterations,
            tolerance: self.tolerance,
            epsilon: self.epsilon,
            seed: self.seed,
            init_scale: self.init_scale,
        }
    }
}

/// Disjoint train/test split expressed in original dataset order.
#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    /// Original-order indices of the test instances, in archetype order.
    pub test_indices: Vec<usize>,
    /// Remaining original-order indices, ascending.
    pub train_indices: Vec<usize>,
    pub fraction: f64,
    pub k: usize,
    /// Canonical positions of the test picks (audit trail; empty for
    /// random baselines, which have no canonical stage).
    pub canonical_test_positions: Vec<usize>,
}

impl Partition {
    pub fn n_instances(&self) -> usize {
        self.test_indices.len() + self.train_indices.len()
    }
}

/// Archetypal partition of an in-memory encoded matrix.
///
/// Pipeline: canonical order -> min-max scale -> NMF (k archetypes) ->
/// batched distances -> greedy matching -> map canonical positions back to
/// original indices. Labels never enter any step.
pub fn partition_matrix(
    encoded: &Array2<f32>,
    fraction: f64,
    opts: &PartitionOptions,
) -> Result<Partition> {
    let n = encoded.nrows();
    if n < 2 {
        return Err(Error::Data(format!(
            "partitioning needs at least 2 instances, got {n}"
        )));
    }
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::Config(format!(
            "fraction must lie in the open interval (0, 1), got {fraction}"
        )));
    }
    let k = test_count(n, fraction);
    let order = canonical_order(encoded);
    let canonical = order.apply(encoded);
    let scaled = min_max_scale(&canonical)?;
    let factors = factorize(&scaled.values, &opts.nmf_config(k))?;
    let batch = opts.batch_size.unwrap_or_else(|| default_batch_size(n));
    let distances = batched_distances(&scaled.values, &factors.h, batch);
    let positions = match_archetypes(&distances)?;
    let test_indices: Vec<usize> = positions.iter().map(|&p| order.permutation[p]).collect();
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
        canonical_test_positions: positions,
    })
}

/// Archetypal partition straight from a dataset source.
pub fn partition(
    source: &DatasetSource,
    fraction: f64,
    opts: &PartitionOptions,
) -> Result<Partition> {
    let dataset = encode(source)?;
    partition_matrix(&dataset.matrix.values, fraction, opts)
}
