//! Modality encoders: turn each supported input kind into an `n x d` FP32
//! feature matrix with one row per instance.
//!
//! Encoding is a pure function of file contents. Labels, when present,
//! ride along as an opaque string vector indexed like the rows; they are
//! never folded into the feature matrix.

use std::collections::BTreeSet;
use std::collections::HashMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::io::{self, TensorFile};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Modality {
    Tabular,
    Image,
    Signal,
    Sequence,
    Graph,
}

impl fmt::Display for Modality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Modality::Tabular => "tabular",
            Modality::Image => "image",
            Modality::Signal => "signal",
            Modality::Sequence => "sequence",
            Modality::Graph => "graph",
        };
        f.write_str(s)
    }
}

impl FromStr for Modality {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tabular" => Ok(Modality::Tabular),
            "image" => Ok(Modality::Image),
            "signal" => Ok(Modality::Signal),
            "sequence" => Ok(Modality::Sequence),
            "graph" => Ok(Modality::Graph),
            other => Err(Error::Config(format!(
                "unknown modality {other:?} (expected tabular, image, signal, sequence or graph)"
            ))),
        }
    }
}

/// Where labels come from, if anywhere.
#[derive(Debug, Clone)]
pub enum LabelSource {
    /// One label per line, aligned with instance order.
    File(PathBuf),
    /// Zero-based column of a CSV input, excluded from the features.
    Column(usize),
}

#[derive(Debug, Clone, Default)]
pub struct EncodeOptions {
    /// First CSV row is a header (tabular and graph mode a).
    pub has_header: bool,
    /// Per-graph node counts; presence selects graph mode (b).
    pub graph_sizes: Option<PathBuf>,
}

/// A dataset declaration the ingestion layer can resolve.
#[derive(Debug, Clone)]
pub struct DatasetSource {
    pub modality: Modality,
    pub data_path: PathBuf,
    pub labels: Option<LabelSource>,
    pub options: EncodeOptions,
}

impl DatasetSource {
    pub fn new(modality: Modality, data_path: impl Into<PathBuf>) -> Self {
        DatasetSource {
            modality,
            data_path: data_path.into(),
            labels: None,
            options: EncodeOptions::default(),
        }
    }
}

/// Encoded feature matrix plus the metadata needed to reproduce reports.
#[derive(Debug, Clone)]
pub struct EncodedMatrix {
    pub values: Array2<f32>,
    pub feature_names: Option<Vec<String>>,
    /// Sequence modality only: the character vocabulary backing the columns.
    pub vocabulary: Option<Vec<char>>,
}

impl EncodedMatrix {
    pub fn n_instances(&self) -> usize {
        self.values.nrows()
    }

    pub fn n_features(&self) -> usize {
        self.values.ncols()
    }

    fn validate(self) -> Result<Self> {
        let (n, d) = self.values.dim();
        if n < 2 {
            return Err(Error::Data(format!(
                "need at least 2 instances, got {n}"
            )));
        }
        if d == 0 {
            return Err(Error::Data("encoded matrix has no features".into()));
        }
        for (i, row) in self.values.rows().into_iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                if !v.is_finite() {
                    return Err(Error::Data(format!(
                        "non-finite value at instance {i}, feature {j}"
                    )));
                }
            }
        }
        Ok(self)
    }
}

#[derive(Debug, Clone)]
pub struct EncodedDataset {
    pub matrix: EncodedMatrix,
    pub labels: Option<Vec<String>>,
}

/// Resolve a dataset source into an encoded matrix (plus labels).
pub fn encode(source: &DatasetSource) -> Result<EncodedDataset> {
    match source.modality {
        Modality::Tabular => encode_tabular(source),
        Modality::Image => encode_image(source),
        Modality::Signal => encode_signal(source),
        Modality::Sequence => encode_sequence(source),
        Modality::Graph => encode_graph(source),
    }
}

fn attach_labels(
    source: &DatasetSource,
    matrix: EncodedMatrix,
    column_labels: Option<Vec<String>>,
) -> Result<EncodedDataset> {
    let matrix = matrix.validate()?;
    let labels = match (&source.labels, column_labels) {
        (Some(LabelSource::File(path)), _) => Some(io::read_lines(path)?),
        (Some(LabelSource::Column(_)), Some(from_csv)) => Some(from_csv),
        (Some(LabelSource::Column(_)), None) => {
            return Err(Error::Config(format!(
                "a label column only applies to CSV inputs, not {} data",
                source.modality
            )));
        }
        (None, _) => None,
    };
    if let Some(ref l) = labels {
        if l.len() != matrix.n_instances() {
            return Err(Error::Data(format!(
                "label count {} does not match instance count {}",
                l.len(),
                matrix.n_instances()
            )));
        }
    }
    Ok(EncodedDataset { matrix, labels })
}

fn label_column(source: &DatasetSource) -> Option<usize> {
    match source.labels {
        Some(LabelSource::Column(c)) => Some(c),
        _ => None,
    }
}

pub fn encode_tabular(source: &DatasetSource) -> Result<EncodedDataset> {
    let table = io::read_csv_matrix(
        &source.data_path,
        source.options.has_header,
        label_column(source),
    )?;
    let matrix = EncodedMatrix {
        values: table.values,
        feature_names: table.feature_names,
        vocabulary: None,
    };
    attach_labels(source, matrix, table.labels)
}

/// Flatten `(n, h, w[, c])` image tensors to one row per image in
/// height-major, then width, then channel order (the payload's own
/// row-major order).
pub fn encode_image(source: &DatasetSource) -> Result<EncodedDataset> {
    let tensor = TensorFile::read(&source.data_path)?;
    if !(tensor.rank() == 3 || tensor.rank() == 4) {
        return Err(Error::Data(format!(
            "image data expects a rank-3 (n,h,w) or rank-4 (n,h,w,c) tensor, got rank {}",
            tensor.rank()
        )));
    }
    let matrix = flatten_tensor(tensor)?;
    attach_labels(source, matrix, None)
}

/// Flatten `(n, t)` or `(n, channels, t)` signal tensors channel-major.
pub fn encode_signal(source: &DatasetSource) -> Result<EncodedDataset> {
    let tensor = TensorFile::read(&source.data_path)?;
    if !(tensor.rank() == 2 || tensor.rank() == 3) {
        return Err(Error::Data(format!(
            "signal data expects a rank-2 (n,t) or rank-3 (n,channels,t) tensor, got rank {}",
            tensor.rank()
        )));
    }
    let matrix = flatten_tensor(tensor)?;
    attach_labels(source, matrix, None)
}

fn flatten_tensor(tensor: TensorFile) -> Result<EncodedMatrix> {
    let n = tensor.n_instances();
    let d = tensor.instance_len();
    let values = Array2::from_shape_vec((n, d), tensor.payload)
        .map_err(|e| Error::Data(format!("tensor reshape failed: {e}")))?;
    Ok(EncodedMatrix {
        values,
        feature_names: None,
        vocabulary: None,
    })
}

pub fn encode_sequence(source: &DatasetSource) -> Result<EncodedDataset> {
    let lines = io::read_lines(&source.data_path)?;
    if lines.is_empty() {
        return Err(Error::Data(format!(
            "{}: empty sequence dataset",
            source.data_path.display()
        )));
    }
    let vocab = sequence_vocabulary(&lines);
    let matrix = encode_sequences_with_vocab(&lines, &vocab)?;
    attach_labels(source, matrix, None)
}

/// Distinct characters across the dataset, ascending by code point (which
/// equals byte-wise ascending order of their UTF-8 encodings).
pub fn sequence_vocabulary(lines: &[String]) -> Vec<char> {
    let set: BTreeSet<char> = lines.iter().flat_map(|l| l.chars()).collect();
    set.into_iter().collect()
}

/// Bag-of-characters counts against a fixed vocabulary.
pub fn encode_sequences_with_vocab(lines: &[String], vocab: &[char]) -> Result<EncodedMatrix> {
    if vocab.is_empty() {
        return Err(Error::Data(
            "sequence vocabulary is empty (no characters in the dataset)".into(),
        ));
    }
    let index: HashMap<char, usize> = vocab.iter().enumerate().map(|(i, &c)| (c, i)).collect();
    let mut values = Array2::<f32>::zeros((lines.len(), vocab.len()));
    for (i, line) in lines.iter().enumerate() {
        for ch in line.chars() {
            match index.get(&ch) {
                Some(&j) => values[[i, j]] += 1.0,
                None => {
                    return Err(Error::Data(format!(
                        "sequence {i} contains character {ch:?} outside the shared vocabulary"
                    )));
                }
            }
        }
    }
    Ok(EncodedMatrix {
        values,
        feature_names: Some(vocab.iter().map(|c| c.to_string()).collect()),
        vocabulary: Some(vocab.to_vec()),
    })
}

/// Graph encoding. Mode (a): the input is already a per-instance CSV
/// matrix and passes through like tabular data. Mode (b), selected by a
/// graph-sizes file: the input is a rank-2 node-feature tensor whose rows
/// are grouped into per-graph blocks; each graph becomes one row of
/// per-feature `[mean, min, max, sum]` aggregates (d = 4 x features).
pub fn encode_graph(source: &DatasetSource) -> Result<EncodedDataset> {
    let Some(sizes_path) = &source.options.graph_sizes else {
        return encode_tabular(source);
    };
    let sizes = io::read_graph_sizes(sizes_path)?;
    let tensor = TensorFile::read(&source.data_path)?;
    if tensor.rank() != 2 {
        return Err(Error::Data(format!(
            "graph node data expects a rank-2 (nodes,features) tensor, got rank {}",
            tensor.rank()
        )));
    }
    let nodes = tensor.n_instances();
    let f = tensor.instance_len();
    let total: usize = sizes.iter().sum();
    if total != nodes {
        return Err(Error::Data(format!(
            "graph sizes sum to {total} nodes but the tensor has {nodes} rows"
        )));
    }
    let node_matrix = Array2::from_shape_vec((nodes, f), tensor.payload)
        .map_err(|e| Error::Data(format!("tensor reshape failed: {e}")))?;
    let mut values = Array2::<f32>::zeros((sizes.len(), 4 * f));
    let mut start = 0usize;
    for (g, &len) in sizes.iter().enumerate() {
        let block = node_matrix.slice(ndarray::s![start..start + len, ..]);
        for j in 0..f {
            let col = block.column(j);
            let mut sum = 0f32;
            let mut min = f32::INFINITY;
            let mut max = f32::NEG_INFINITY;
            for &v in col.iter() {
                sum += v;
                if v < min {
                    min = v;
                }
                if v > max {
                    max = v;
                }
            }
            values[[g, 4 * j]] = sum / len as f32;
            values[[g, 4 * j + 1]] = min;
            values[[g, 4 * j + 2]] = max;
            values[[g, 4 * j + 3]] = sum;
        }
        start += len;
    }
    let matrix = EncodedMatrix {
        values,
        feature_names: None,
        vocabulary: None,
    };
    attach_labels(source, matrix, None)
}

/// Encode a train/test pair with shared encoder state.
///
/// Sequences draw one vocabulary from the union of both files so the two
/// matrices share columns; other modalities encode independently.
pub fn encode_pair(
    train: &DatasetSource,
    test: &DatasetSource,
) -> Result<(EncodedDataset, EncodedDataset)> {
    if train.modality != test.modality {
        return Err(Error::Config(format!(
            "train modality {} does not match test modality {}",
            train.modality, test.modality
        )));
    }
    if train.modality == Modality::Sequence {
        let train_lines = io::read_lines(&train.data_path)?;
        let test_lines = io::read_lines(&test.data_path)?;
        if train_lines.is_empty() || test_lines.is_empty() {
            return Err(Error::Data("empty sequence dataset".into()));
        }
        let mut all = train_lines.clone();
        all.extend(test_lines.iter().cloned());
        let vocab = sequence_vocabulary(&all);
        let tr = encode_sequences_with_vocab(&train_lines, &vocab)?.validate()?;
        let te = encode_sequences_with_vocab(&test_lines, &vocab)?.validate()?;
        return Ok((
            EncodedDataset {
                matrix: tr,
                labels: None,
            },
            EncodedDataset {
                matrix: te,
                labels: None,
            },
        ));
    }
    Ok((encode(train)?, encode(test)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use std::fs;

    fn seq_lines(lines: &[&str]) -> Vec<String> {
        lines.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn sequence_counts_match_by_hand() {
        let lines = seq_lines(&["ab", "abb"]);
        let vocab = sequence_vocabulary(&lines);
        assert_eq!(vocab, vec!['a', 'b']);
        let m = encode_sequences_with_vocab(&lines, &vocab).unwrap();
        assert_eq!(m.values, array![[1.0f32, 1.0], [1.0, 2.0]]);
    }

    #[test]
    fn sequence_counts_are_order_blind() {
        let lines = seq_lines(&["CCO", "OCC"]);
        let vocab = sequence_vocabulary(&lines);
        let m = encode_sequences_with_vocab(&lines, &vocab).unwrap();
        assert_eq!(m.values.row(0), m.values.row(1));
    }

    #[test]
    fn empty_string_gives_zero_row() {
        let lines = seq_lines(&["", "a"]);
        let vocab = sequence_vocabulary(&lines);
        assert_eq!(vocab, vec!['a']);
        let m = encode_sequences_with_vocab(&lines, &vocab).unwrap();
        assert_eq!(m.values, array![[0.0f32], [1.0]]);
    }

    #[test]
    fn vocabulary_is_dataset_order_invariant() {
        let a = sequence_vocabulary(&seq_lines(&["zya", "bc"]));
        let b = sequence_vocabulary(&seq_lines(&["bc", "zya"]));
        assert_eq!(a, b);
        assert_eq!(a, vec!['a', 'b', 'c', 'y', 'z']);
    }

    #[test]
    fn tabular_from_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        fs::write(&path, "1,2\n3,4\n5,6\n").unwrap();
        let ds = encode(&DatasetSource::new(Modality::Tabular, &path)).unwrap();
        assert_eq!(
            ds.matrix.values,
            array![[1.0f32, 2.0], [3.0, 4.0], [5.0, 6.0]]
        );
    }

    #[test]
    fn image_flattening_shapes() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("imgs.bmt");
        // two 2x2x1 images
        TensorFile::new(vec![2, 2, 2, 1], (0..8).map(|v| v as f32).collect())
            .unwrap()
            .write(&path)
            .unwrap();
        let ds = encode(&DatasetSource::new(Modality::Image, &path)).unwrap();
        assert_eq!(ds.matrix.values.dim(), (2, 4));
        assert_eq!(
            ds.matrix.values,
            array![[0.0f32, 1.0, 2.0, 3.0], [4.0, 5.0, 6.0, 7.0]]
        );
    }

    #[test]
    fn mnist_sized_images_flatten_to_784() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("imgs.bmt");
        TensorFile::new(vec![2, 28, 28, 1], vec![0.5; 2 * 784])
            .unwrap()
            .write(&path)
            .unwrap();
        let ds = encode(&DatasetSource::new(Modality::Image, &path)).unwrap();
        assert_eq!(ds.matrix.n_features(), 784);
    }

    #[test]
    fn image_rejects_wrong_rank() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("flat.bmt");
        TensorFile::new(vec![2, 4], vec![0.0; 8])
            .unwrap()
            .write(&path)
            .unwrap();
        let err = encode(&DatasetSource::new(Modality::Image, &path)).unwrap_err();
        assert!(err.to_string().contains("rank"));
    }

    #[test]
    fn signal_flattening_is_channel_major() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sig.bmt");
        // two signals, 2 channels x 3 timesteps
        TensorFile::new(vec![2, 2, 3], (0..12).map(|v| v as f32).collect())
            .unwrap()
            .write(&path)
            .unwrap();
        let ds = encode(&DatasetSource::new(Modality::Signal, &path)).unwrap();
        assert_eq!(ds.matrix.values.dim(), (2, 6));
        assert_eq!(ds.matrix.values.row(0).to_vec(), vec![0.0, 1.0, 2.0, 3.0, 4.0, 5.0]);
    }

    #[test]
    fn sixteen_length_one_series_give_sixteen_features() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sites.bmt");
        TensorFile::new(vec![3, 16, 1], (0..48).map(|v| v as f32).collect())
            .unwrap()
            .write(&path)
            .unwrap();
        let ds = encode(&DatasetSource::new(Modality::Signal, &path)).unwrap();
        assert_eq!(ds.matrix.n_features(), 16);
    }

    #[test]
    fn graph_mode_b_aggregates_blocks() {
        let dir = tempfile::tempdir().unwrap();
        let data = dir.path().join("nodes.bmt");
        let sizes = dir.path().join("sizes.csv");
        // graph 0: nodes [[1],[3]]; graph 1: nodes [[2]]
        TensorFile::new(vec![3, 1], vec![1.0, 3.0, 2.0])
            .unwrap()
            .write(&data)
            .unwrap();
        fs::write(&sizes, "2\n1\n").unwrap();
        let mut source = DatasetSource::new(Modality::Graph, &data);
        source.options.graph_sizes = Some(sizes);
        let ds = encode(&source).unwrap();
        // per-feature [mean, min, max, sum]
        assert_eq!(
            ds.matrix.values,
            array![[2.0f32, 1.0, 3.0, 4.0], [2.0, 2.0, 2.0, 2.0]]
        );
    }

    #[test]
    fn graph_mode_a_passes_through_csv() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("g.csv");
        fs::write(&path, "1,2,3\n4,5,6\n").unwrap();
        let ds = encode(&DatasetSource::new(Modality::Graph, &path)).unwrap();
        assert_eq!(ds.matrix.values.dim(), (2, 3));
    }

    #[test]
    fn labels_must_align() {
        let dir = tempfile::tempdir().unwrap();
        let data = dir.path().join("t.csv");
        let labels = dir.path().join("y.csv");
        fs::write(&data, "1,2\n3,4\n").unwrap();
        fs::write(&labels, "a\nb\nc\n").unwrap();
        let mut source = DatasetSource::new(Modality::Tabular, &data);
        source.labels = Some(LabelSource::File(labels));
        let err = encode(&source).unwrap_err();
        assert!(err.to_string().contains("label count"));
    }

    #[test]
    fn single_instance_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("one.csv");
        fs::write(&path, "1,2\n").unwrap();
        let err = encode(&DatasetSource::new(Modality::Tabular, &path)).unwrap_err();
        assert!(err.to_string().contains("at least 2"));
    }

    #[test]
    fn shared_vocabulary_spans_both_files() {
        let dir = tempfile::tempdir().unwrap();
        let train = dir.path().join("train.txt");
        let test = dir.path().join("test.txt");
        fs::write(&train, "aa\nab\n").unwrap();
        fs::write(&test, "cc\nca\n").unwrap();
        let (tr, te) = encode_pair(
            &DatasetSource::new(Modality::Sequence, &train),
            &DatasetSource::new(Modality::Sequence, &test),
        )
        .unwrap();
        assert_eq!(tr.matrix.vocabulary, Some(vec!['a', 'b', 'c']));
        assert_eq!(tr.matrix.n_features(), 3);
        assert_eq!(te.matrix.n_features(), 3);
    }
}
