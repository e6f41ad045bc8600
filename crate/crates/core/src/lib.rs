//! Deterministic archetypal train/test partitioning and split evaluation.
//!
//! The engine turns a dataset of any supported modality (tabular, image,
//! signal, sequence, graph) into an FP32 feature matrix, orders rows
//! canonically by content hash, min-max scales them, factorises the
//! result with non-negative matrix factorisation, and assigns each
//! archetype its nearest unique real instance. Those instances form a
//! reproducible, edge-case-heavy test set; the rest is the training set.
//! A companion evaluator quantifies train/test divergence with seven
//! statistics, and a harness compares the archetypal split against
//! repeated seeded random splits.
//!
//! Determinism contract: identical input bytes (up to row order),
//! fraction and configuration produce bit-identical partitions and
//! reports, independent of worker count or distance batch size.

pub mod assign;
pub mod canonical;
pub mod encode;
pub mod error;
pub mod harness;
pub mod io;
pub mod metrics;
pub mod nmf;
pub mod synth;
mod util;

pub use assign::{partition, partition_matrix, Partition, PartitionOptions};
pub use encode::{encode, DatasetSource, EncodedDataset, EncodedMatrix, Modality};
pub use error::{Error, Result};
pub use metrics::{evaluate_split, MetricReport, MetricVector};
pub use nmf::{factorize, FactorPair, NmfConfig};

/// Install a global worker pool of the given size. Call before any
/// parallel work runs; the worker count never changes numeric outputs.
#[cfg(feature = "parallel")]
pub fn set_worker_threads(n: usize) -> Result<()> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Error::Config(format!("cannot configure {n} worker threads: {e}")))
}
