//! On-disk formats: the binary tensor container and the pinned CSV dialect.
//!
//! CSV dialect: comma separator, `.` decimal point, optional single header
//! row, no quoting. Sequence files are UTF-8 with one sequence per line
//! (trailing newline optional). All formats are bit-exact interchange
//! contracts, so parsing is implemented directly rather than through a
//! dialect-configurable reader.

use std::fs;
use std::io::Write;
use std::path::Path;

use ndarray::Array2;

use crate::error::{Error, Result};

/// Magic tag opening every tensor file.
pub const TENSOR_MAGIC: &[u8; 8] = b"BMTENSR1";

/// Binary tensor container: 8-byte magic, `rank: u32 LE` (2, 3 or 4),
/// `rank` dimensions as `u64 LE`, then the row-major FP32 LE payload.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorFile {
    pub dims: Vec<u64>,
    pub payload: Vec<f32>,
}

impl TensorFile {
    pub fn new(dims: Vec<u64>, payload: Vec<f32>) -> Result<Self> {
        if !(2..=4).contains(&dims.len()) {
            return Err(Error::Data(format!(
                "tensor rank must be 2, 3 or 4, got {}",
                dims.len()
            )));
        }
        let expected = dims.iter().try_fold(1u64, |acc, &d| acc.checked_mul(d));
        match expected {
            Some(len) if len as usize == payload.len() => Ok(TensorFile { dims, payload }),
            _ => Err(Error::Data(format!(
                "tensor payload length {} does not match dims {:?}",
                payload.len(),
                dims
            ))),
        }
    }

    pub fn rank(&self) -> usize {
        self.dims.len()
    }

    /// Number of instances (leading dimension).
    pub fn n_instances(&self) -> usize {
        self.dims[0] as usize
    }

    /// Flattened length of one instance (product of trailing dimensions).
    pub fn instance_len(&self) -> usize {
        self.dims[1..].iter().product::<u64>() as usize
    }

    pub fn read(path: &Path) -> Result<Self> {
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        let fail = |msg: &str| Error::Parse(format!("{}: {}", path.display(), msg));
        if bytes.len() < 12 {
            return Err(fail("truncated tensor header"));
        }
        if &bytes[..8] != TENSOR_MAGIC {
            return Err(fail("bad magic (expected BMTENSR1)"));
        }
        let rank = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
        if !(2..=4).contains(&rank) {
            return Err(fail(&format!("rank must be 2, 3 or 4, got {rank}")));
        }
        let header_len = 12 + 8 * rank;
        if bytes.len() < header_len {
            return Err(fail("truncated dimension list"));
        }
        let dims: Vec<u64> = (0..rank)
            .map(|i| {
                let at = 12 + 8 * i;
                u64::from_le_bytes(bytes[at..at + 8].try_into().unwrap())
            })
            .collect();
        let count = dims
            .iter()
            .try_fold(1u64, |acc, &d| acc.checked_mul(d))
            .ok_or_else(|| fail("dimension product overflows"))?;
        let expected_bytes = count
            .checked_mul(4)
            .and_then(|b| b.checked_add(header_len as u64))
            .ok_or_else(|| fail("payload size overflows"))?;
        if bytes.len() as u64 != expected_bytes {
            return Err(fail(&format!(
                "payload length {} bytes does not match dims {:?}",
                bytes.len() - header_len,
                dims
            )));
        }
        let payload: Vec<f32> = bytes[header_len..]
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
            .collect();
        for (i, &v) in payload.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::Parse(format!(
                    "{}: non-finite value at payload position {i}",
                    path.display()
                )));
            }
        }
        Ok(TensorFile { dims, payload })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut out = Vec::with_capacity(12 + 8 * self.dims.len() + 4 * self.payload.len());
        out.extend_from_slice(TENSOR_MAGIC);
        out.extend_from_slice(&(self.dims.len() as u32).to_le_bytes());
        for &d in &self.dims {
            out.extend_from_slice(&d.to_le_bytes());
        }
        for &v in &self.payload {
            out.extend_from_slice(&v.to_le_bytes());
        }
        fs::write(path, out).map_err(|e| Error::io(path, e))
    }
}

/// Parsed CSV table with the label column (if any) split out.
#[derive(Debug, Clone)]
pub struct CsvTable {
    pub values: Array2<f32>,
    pub feature_names: Option<Vec<String>>,
    pub labels: Option<Vec<String>>,
}

/// Parse a CSV file under the pinned dialect.
///
/// `label_column` is a zero-based column index extracted as opaque label
/// strings and excluded from the feature matrix.
pub fn read_csv_matrix(
    path: &Path,
    has_header: bool,
    label_column: Option<usize>,
) -> Result<CsvTable> {
    let text = read_utf8(path)?;
    parse_csv(&text, has_header, label_column, &path.display().to_string())
}

/// Dialect parser, split out so in-memory tables can be tested directly.
pub fn parse_csv(
    text: &str,
    has_header: bool,
    label_column: Option<usize>,
    origin: &str,
) -> Result<CsvTable> {
    let mut lines = text.lines();
    let mut feature_names = None;
    let mut width = None;
    if has_header {
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse(format!("{origin}: missing header row")))?;
        let mut names: Vec<String> = header.split(',').map(|s| s.trim().to_string()).collect();
        width = Some(names.len());
        if let Some(col) = label_column {
            if col >= names.len() {
                return Err(Error::Parse(format!(
                    "{origin}: label column {col} out of range (header has {} columns)",
                    names.len()
                )));
            }
            names.remove(col);
        }
        feature_names = Some(names);
    }

    let mut labels = label_column.map(|_| Vec::new());
    let mut flat: Vec<f32> = Vec::new();
    let mut n_rows = 0usize;
    let mut n_features = 0usize;
    for (line_no, line) in lines.enumerate() {
        let row_no = line_no + 1 + usize::from(has_header); // 1-based file line
        let cells: Vec<&str> = line.split(',').collect();
        match width {
            None => width = Some(cells.len()),
            Some(w) if w != cells.len() => {
                return Err(Error::Parse(format!(
                    "{origin}: row {row_no} has {} cells, expected {w}",
                    cells.len()
                )));
            }
            _ => {}
        }
        if let Some(col) = label_column {
            if col >= cells.len() {
                return Err(Error::Parse(format!(
                    "{origin}: label column {col} out of range at row {row_no}"
                )));
            }
        }
        let mut row_features = 0usize;
        for (c, cell) in cells.iter().enumerate() {
            if Some(c) == label_column {
                labels.as_mut().unwrap().push(cell.trim().to_string());
                continue;
            }
            let v: f32 = cell.trim().parse().map_err(|_| {
                Error::Parse(format!(
                    "{origin}: row {row_no}, column {}: cannot parse {:?} as a number",
                    c + 1,
                    cell.trim()
                ))
            })?;
            if !v.is_finite() {
                return Err(Error::Parse(format!(
                    "{origin}: row {row_no}, column {}: non-finite value {:?}",
                    c + 1,
                    cell.trim()
                )));
            }
            flat.push(v);
            row_features += 1;
        }
        n_features = row_features;
        n_rows += 1;
    }
    if n_rows == 0 {
        return Err(Error::Parse(format!("{origin}: no data rows")));
    }
    if n_features == 0 {
        return Err(Error::Parse(format!("{origin}: no feature columns")));
    }
    let values = Array2::from_shape_vec((n_rows, n_features), flat)
        .map_err(|e| Error::Parse(format!("{origin}: {e}")))?;
    Ok(CsvTable {
        values,
        feature_names,
        labels,
    })
}

/// Read a UTF-8 text file.
pub fn read_utf8(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// One string per line; a trailing newline does not create an empty entry.
pub fn read_lines(path: &Path) -> Result<Vec<String>> {
    Ok(read_utf8(path)?.lines().map(|s| s.to_string()).collect())
}

/// Per-graph node counts for graph mode (b): one positive integer per line.
pub fn read_graph_sizes(path: &Path) -> Result<Vec<usize>> {
    let mut sizes = Vec::new();
    for (i, line) in read_lines(path)?.iter().enumerate() {
        let n: usize = line.trim().parse().map_err(|_| {
            Error::Parse(format!(
                "{}: line {}: cannot parse {:?} as a node count",
                path.display(),
                i + 1,
                line.trim()
            ))
        })?;
        if n == 0 {
            return Err(Error::Data(format!(
                "{}: line {}: graph with zero nodes",
                path.display(),
                i + 1
            )));
        }
        sizes.push(n);
    }
    if sizes.is_empty() {
        return Err(Error::Data(format!(
            "{}: empty graph-sizes file",
            path.display()
        )));
    }
    Ok(sizes)
}

/// Write one value per line with a trailing newline.
pub fn write_lines<T: std::fmt::Display>(path: &Path, values: &[T]) -> Result<()> {
    let mut file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut buf = String::new();
    for v in values {
        buf.push_str(&v.to_string());
        buf.push('\n');
    }
    file.write_all(buf.as_bytes()).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn csv_parses_plain_table() {
        let t = parse_csv("1,2\n3,4\n5,6", false, None, "test").unwrap();
        assert_eq!(t.values, array![[1.0f32, 2.0], [3.0, 4.0], [5.0, 6.0]]);
        assert!(t.feature_names.is_none());
    }

    #[test]
    fn csv_header_becomes_feature_names() {
        let t = parse_csv("a,b\n1,2\n3,4", true, None, "test").unwrap();
        assert_eq!(t.feature_names, Some(vec!["a".into(), "b".into()]));
        assert_eq!(t.values.nrows(), 2);
    }

    #[test]
    fn csv_bad_cell_names_location() {
        let err = parse_csv("1,2\n3,abc\n5,6", false, None, "test").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("row 2"), "{msg}");
        assert!(msg.contains("column 2"), "{msg}");
        assert!(msg.contains("abc"), "{msg}");
    }

    #[test]
    fn csv_ragged_rows_rejected() {
        let err = parse_csv("1,2\n3\n5,6", false, None, "test").unwrap_err();
        assert!(err.to_string().contains("row 2"));
    }

    #[test]
    fn csv_rejects_non_finite() {
        assert!(parse_csv("1,2\n3,inf", false, None, "test").is_err());
        assert!(parse_csv("1,NaN", false, None, "test").is_err());
    }

    #[test]
    fn csv_label_column_is_extracted() {
        let t = parse_csv("1,yes,2\n3,no,4", false, Some(1), "test").unwrap();
        assert_eq!(t.values, array![[1.0f32, 2.0], [3.0, 4.0]]);
        assert_eq!(t.labels, Some(vec!["yes".into(), "no".into()]));
    }

    #[test]
    fn tensor_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.bmt");
        let t = TensorFile::new(vec![2, 3], vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]).unwrap();
        t.write(&path).unwrap();
        let back = TensorFile::read(&path).unwrap();
        assert_eq!(t, back);
        assert_eq!(back.n_instances(), 2);
        assert_eq!(back.instance_len(), 3);
    }

    #[test]
    fn tensor_rejects_bad_magic_and_size() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.bmt");
        fs::write(&path, b"NOTMAGIC\x02\x00\x00\x00").unwrap();
        assert!(TensorFile::read(&path).is_err());

        let mut bytes = Vec::new();
        bytes.extend_from_slice(TENSOR_MAGIC);
        bytes.extend_from_slice(&2u32.to_le_bytes());
        bytes.extend_from_slice(&2u64.to_le_bytes());
        bytes.extend_from_slice(&2u64.to_le_bytes());
        bytes.extend_from_slice(&1.0f32.to_le_bytes()); // 1 of 4 values
        fs::write(&path, bytes).unwrap();
        let err = TensorFile::read(&path).unwrap_err();
        assert!(err.to_string().contains("payload"));
    }

    #[test]
    fn graph_sizes_rejects_zero() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sizes.csv");
        fs::write(&path, "2\n0\n1\n").unwrap();
        let err = read_graph_sizes(&path).unwrap_err();
        assert!(err.to_string().contains("zero nodes"));
    }
}
