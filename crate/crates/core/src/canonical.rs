//! Deterministic row ordering and min-max scaling.
//!
//! Every downstream stage (factorisation, distance matching) consumes rows
//! in the canonical order produced here, which is a pure function of row
//! *content*: rows are fingerprinted with MD5 over their little-endian
//! IEEE-754 32-bit serialisation and sorted ascending by digest bytes.
//! Duplicate rows (identical digests) keep ascending original-index order,
//! so the full ordering is total and reproducible across runs and across
//! input row permutations.

use md5::{Digest, Md5};
use ndarray::Array2;

use crate::error::{Error, Result};
use crate::util::par_map_indexed;

/// 128-bit content fingerprint of one row.
pub type RowDigest = [u8; 16];

/// Content-based row ordering.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CanonicalOrder {
    /// `permutation[pos]` is the original index of the row at canonical
    /// position `pos`; a bijection on `0..n`.
    pub permutation: Vec<usize>,
    /// Per-row digests in canonical order (ascending byte order).
    pub digests: Vec<RowDigest>,
}

impl CanonicalOrder {
    pub fn len(&self) -> usize {
        self.permutation.len()
    }

    pub fn is_empty(&self) -> bool {
        self.permutation.is_empty()
    }

    /// Inverse map: original index -> canonical position.
    pub fn inverse(&self) -> Vec<usize> {
        let mut inv = vec![0usize; self.permutation.len()];
        for (pos, &orig) in self.permutation.iter().enumerate() {
            inv[orig] = pos;
        }
        inv
    }

    /// Copy of `matrix` with rows rearranged into canonical order.
    pub fn apply(&self, matrix: &Array2<f32>) -> Array2<f32> {
        let (n, d) = matrix.dim();
        assert_eq!(n, self.permutation.len(), "row count mismatch");
        let mut out = Array2::zeros((n, d));
        for (pos, &orig) in self.permutation.iter().enumerate() {
            out.row_mut(pos).assign(&matrix.row(orig));
        }
        out
    }
}

/// MD5 digest of a row's little-endian FP32 byte serialisation, in column
/// order. Rows are hashed *before* scaling, so the ordering never depends
/// on other rows' value ranges.
pub fn row_digest(row: &[f32]) -> RowDigest {
    let mut hasher = Md5::new();
    for v in row {
        hasher.update(v.to_le_bytes());
    }
    hasher.finalize().into()
}

/// Sort rows ascending by digest bytes, breaking exact ties (duplicate
/// rows) by ascending original index. The input is not mutated.
pub fn canonical_order(matrix: &Array2<f32>) -> CanonicalOrder {
    let n = matrix.nrows();
    let digests: Vec<RowDigest> = par_map_indexed(n, |i| {
        let row = matrix.row(i);
        let slice = row.as_slice().expect("standard-layout row");
        row_digest(slice)
    });
    let mut permutation: Vec<usize> = (0..n).collect();
    permutation.sort_unstable_by(|&a, &b| digests[a].cmp(&digests[b]).then(a.cmp(&b)));
    let sorted = permutation.iter().map(|&i| digests[i]).collect();
    CanonicalOrder {
        permutation,
        digests: sorted,
    }
}

/// Per-column min-max scaled matrix.
#[derive(Debug, Clone)]
pub struct ScaledMatrix {
    /// All entries in [0, 1]; constant columns map to all zeros.
    pub values: Array2<f32>,
    pub col_min: Vec<f32>,
    pub col_range: Vec<f32>,
}

/// Scale each column onto [0, 1] in FP32.
///
/// `values[i][j] = (x[i][j] - col_min[j]) / col_range[j]` when the column
/// range is positive; columns with zero range become all zeros.
pub fn min_max_scale(matrix: &Array2<f32>) -> Result<ScaledMatrix> {
    let (n, d) = matrix.dim();
    if n == 0 || d == 0 {
        return Err(Error::Data(format!(
            "cannot scale an empty matrix ({n}x{d})"
        )));
    }
    let mut col_min = vec![f32::INFINITY; d];
    let mut col_max = vec![f32::NEG_INFINITY; d];
    for row in matrix.rows() {
        for (j, &v) in row.iter().enumerate() {
            if v < col_min[j] {
                col_min[j] = v;
            }
            if v > col_max[j] {
                col_max[j] = v;
            }
        }
    }
    let col_range: Vec<f32> = col_min
        .iter()
        .zip(&col_max)
        .map(|(&lo, &hi)| hi - lo)
        .collect();
    let mut values = matrix.clone();
    for mut row in values.rows_mut() {
        for (j, v) in row.iter_mut().enumerate() {
            *v = if col_range[j] > 0.0 {
                (*v - col_min[j]) / col_range[j]
            } else {
                0.0
            };
        }
    }
    Ok(ScaledMatrix {
        values,
        col_min,
        col_range,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn hex(d: &RowDigest) -> String {
        d.iter().map(|b| format!("{b:02x}")).collect()
    }

    #[test]
    fn digest_matches_external_md5() {
        // Frozen from an independent MD5 implementation (Python hashlib)
        // over the little-endian FP32 serialisations.
        assert_eq!(
            hex(&row_digest(&[1.0, 2.0])),
            "057a7f5ab69cb695657046b18832c330"
        );
        assert_eq!(
            hex(&row_digest(&[2.0, 1.0])),
            "0795fa5e030325b61a931546142947a2"
        );
    }

    #[test]
    fn digest_is_deterministic_and_order_sensitive() {
        assert_eq!(row_digest(&[1.0, 2.0]), row_digest(&[1.0, 2.0]));
        assert_ne!(row_digest(&[1.0, 2.0]), row_digest(&[2.0, 1.0]));
    }

    #[test]
    fn canonical_order_matches_external_md5_ordering() {
        // Digest order verified externally: row 2 < row 0 < row 1.
        let m = array![[0.0f32, 0.0], [0.0, 1.0], [0.0, 3.0]];
        let order = canonical_order(&m);
        assert_eq!(order.permutation, vec![2, 0, 1]);
        assert_eq!(hex(&order.digests[0]), "0be72aa7f96bc854d2510b6aa7e8fe95");
        assert_eq!(hex(&order.digests[1]), "7dea362b3fac8e00956a4952a3d4f474");
        assert_eq!(hex(&order.digests[2]), "b5ce7b2e71f14b237f1d8a6c2dacd247");
        for w in order.digests.windows(2) {
            assert!(w[0] <= w[1]);
        }
    }

    #[test]
    fn duplicate_rows_break_ties_by_original_index() {
        let mut m = Array2::zeros((6, 2));
        for i in 0..6 {
            m[[i, 0]] = i as f32;
        }
        // identical rows at original indices 2 and 5
        let row2 = m.row(2).to_owned();
        m.row_mut(5).assign(&row2);
        let order = canonical_order(&m);
        let pos2 = order.permutation.iter().position(|&i| i == 2).unwrap();
        let pos5 = order.permutation.iter().position(|&i| i == 5).unwrap();
        assert!(pos2 < pos5, "smaller original index must come first");
        assert_eq!(pos2 + 1, pos5, "duplicates are adjacent in digest order");
    }

    #[test]
    fn permutation_is_bijective() {
        let m = array![[3.0f32, 1.0], [1.0, 5.0], [2.0, 6.0], [0.5, 0.5]];
        let order = canonical_order(&m);
        let inv = order.inverse();
        for orig in 0..4 {
            assert_eq!(order.permutation[inv[orig]], orig);
        }
    }

    #[test]
    fn shuffled_input_yields_same_canonical_contents() {
        let m = array![[3.0f32, 1.0], [1.0, 5.0], [2.0, 6.0], [9.0, 0.0]];
        let shuffled = array![[9.0f32, 0.0], [3.0, 1.0], [2.0, 6.0], [1.0, 5.0]];
        let a = canonical_order(&m).apply(&m);
        let b = canonical_order(&shuffled).apply(&shuffled);
        assert_eq!(a, b);
    }

    #[test]
    fn min_max_scale_examples() {
        let m = array![[1.0f32], [2.0], [3.0]];
        let s = min_max_scale(&m).unwrap();
        assert_eq!(s.values, array![[0.0f32], [0.5], [1.0]]);

        let constant = array![[5.0f32], [5.0], [5.0]];
        let s = min_max_scale(&constant).unwrap();
        assert_eq!(s.values, array![[0.0f32], [0.0], [0.0]]);
        assert_eq!(s.col_range, vec![0.0]);

        let signed = array![[-2.0f32], [0.0], [2.0]];
        let s = min_max_scale(&signed).unwrap();
        assert_eq!(s.values, array![[0.0f32], [0.5], [1.0]]);
    }

    #[test]
    fn min_max_scale_rejects_empty() {
        assert!(min_max_scale(&Array2::<f32>::zeros((0, 3))).is_err());
        assert!(min_max_scale(&Array2::<f32>::zeros((3, 0))).is_err());
    }

    #[test]
    fn min_max_scale_is_idempotent() {
        let m = array![
            [1.0f32, -7.5, 0.0],
            [2.5, 3.25, 0.0],
            [-4.0, 11.0, 0.0],
            [0.125, 2.0, 0.0]
        ];
        let once = min_max_scale(&m).unwrap();
        let twice = min_max_scale(&once.values).unwrap();
        assert_eq!(once.values, twice.values);
    }
}
