//! End-to-end properties of the partition pipeline.

use std::fs;

use benchmake::assign::PartitionOptions;
use benchmake::encode::LabelSource;
use benchmake::synth;
use benchmake::{partition, partition_matrix, DatasetSource, Modality};
use ndarray::{Array2, Axis};
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

fn shuffle_rows(matrix: &Array2<f32>, seed: u64) -> (Array2<f32>, Vec<usize>) {
    let n = matrix.nrows();
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for i in (1..n).rev() {
        let j = (rng.next_u64() as usize) % (i + 1);
        order.swap(i, j);
    }
    (matrix.select(Axis(0), &order), order)
}

fn row_contents(matrix: &Array2<f32>, indices: &[usize]) -> Vec<Vec<u32>> {
    // bit patterns make row multisets comparable without float quirks
    let mut rows: Vec<Vec<u32>> = indices
        .iter()
        .map(|&i| matrix.row(i).iter().map(|v| v.to_bits()).collect())
        .collect();
    rows.sort();
    rows
}

#[test]
fn shuffled_input_selects_the_same_test_rows_by_content() {
    let data = synth::uniform_matrix(60, 5, 17, -3.0, 9.0);
    let (shuffled, _) = shuffle_rows(&data, 99);
    let opts = PartitionOptions::default();

    let a = partition_matrix(&data, 0.2, &opts).unwrap();
    let b = partition_matrix(&shuffled, 0.2, &opts).unwrap();

    assert_eq!(a.k, b.k);
    assert_eq!(
        row_contents(&data, &a.test_indices),
        row_contents(&shuffled, &b.test_indices)
    );
    assert_eq!(
        row_contents(&data, &a.train_indices),
        row_contents(&shuffled, &b.train_indices)
    );
}

#[test]
fn partition_from_file_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("data.csv");
    let data = synth::uniform_matrix(40, 3, 5, 0.0, 1.0);
    let mut text = String::new();
    for row in data.rows() {
        let cells: Vec<String> = row.iter().map(|v| format!("{v}")).collect();
        text.push_str(&cells.join(","));
        text.push('\n');
    }
    fs::write(&path, text).unwrap();

    let source = DatasetSource::new(Modality::Tabular, &path);
    let a = partition(&source, 0.25, &PartitionOptions::default()).unwrap();
    let b = partition(&source, 0.25, &PartitionOptions::default()).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.k, 10);
}

#[test]
fn labels_never_influence_the_partition() {
    let dir = tempfile::tempdir().unwrap();
    let data_path = dir.path().join("data.csv");
    let label_path = dir.path().join("labels.csv");
    let data = synth::uniform_matrix(20, 3, 8, 0.0, 1.0);
    let mut text = String::new();
    for row in data.rows() {
        let cells: Vec<String> = row.iter().map(|v| format!("{v}")).collect();
        text.push_str(&cells.join(","));
        text.push('\n');
    }
    fs::write(&data_path, &text).unwrap();
    fs::write(&label_path, "x\n".repeat(20)).unwrap();

    let plain = DatasetSource::new(Modality::Tabular, &data_path);
    let mut labelled = DatasetSource::new(Modality::Tabular, &data_path);
    labelled.labels = Some(LabelSource::File(label_path));

    let a = partition(&plain, 0.2, &PartitionOptions::default()).unwrap();
    let b = partition(&labelled, 0.2, &PartitionOptions::default()).unwrap();
    assert_eq!(a, b);
}

#[test]
fn canonical_positions_map_back_to_test_indices() {
    let data = synth::uniform_matrix(30, 4, 23, 0.0, 2.0);
    let part = partition_matrix(&data, 0.3, &PartitionOptions::default()).unwrap();
    let order = benchmake::canonical::canonical_order(&data);
    for (pos, orig) in part
        .canonical_test_positions
        .iter()
        .zip(&part.test_indices)
    {
        assert_eq!(order.permutation[*pos], *orig);
    }
}

#[test]
fn hull_outliers_attract_the_test_set() {
    // 2-D cloud with planted extremes: the test picks should over-select
    // the planted points relative to their 4% share of the data
    let data = synth::gaussian_with_hull_outliers(480, 20, 5.0, 42);
    let part = partition_matrix(&data, 0.1, &PartitionOptions::default()).unwrap();
    let planted = part.test_indices.iter().filter(|&&i| i >= 480).count();
    assert!(
        planted >= 10,
        "expected most planted outliers in the test set, got {planted}/20"
    );
}
