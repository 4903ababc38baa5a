//! Dense row-major design matrix for training and prediction.

use crate::error::{Error, Result};
use crate::model::FeatureMatrix;

/// A dense row-major matrix of finite values with a fixed column count.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    data: Vec<f64>,
    n_rows: usize,
    n_cols: usize,
}

impl Matrix {
    /// Build from explicit rows; all rows must share one width and every
    /// entry must be finite.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Matrix> {
        if rows.is_empty() {
            return Err(Error::empty("matrix with zero rows"));
        }
        let n_cols = rows[0].len();
        if n_cols == 0 {
            return Err(Error::empty("matrix with zero columns"));
        }
        let mut data = Vec::with_capacity(rows.len() * n_cols);
        for (r, row) in rows.iter().enumerate() {
            if row.len() != n_cols {
                return Err(Error::invalid(format!(
                    "row {r} has {} entries, expected {n_cols}",
                    row.len()
                )));
            }
            for (c, &v) in row.iter().enumerate() {
                if !v.is_finite() {
                    return Err(Error::NonFiniteFeature { row: r, col: c });
                }
                data.push(v);
            }
        }
        Ok(Matrix {
            data,
            n_rows: rows.len(),
            n_cols,
        })
    }

    /// Select `columns` (in order, repeats allowed) from a feature matrix.
    pub fn from_feature_matrix(features: &FeatureMatrix, columns: &[usize]) -> Result<Matrix> {
        if features.n_rows() == 0 {
            return Err(Error::empty("feature matrix with zero rows"));
        }
        if columns.is_empty() {
            return Err(Error::empty("column selection"));
        }
        for &c in columns {
            if c >= 3 {
                return Err(Error::invalid(format!(
                    "feature column index {c} out of range (0..3)"
                )));
            }
        }
        let mut data = Vec::with_capacity(features.n_rows() * columns.len());
        for row in features.rows() {
            for &c in columns {
                data.push(row[c]);
            }
        }
        Ok(Matrix {
            data,
            n_rows: features.n_rows(),
            n_cols: columns.len(),
        })
    }

    /// Stack several matrices of equal width on top of each other.
    pub fn vstack(parts: &[&Matrix]) -> Result<Matrix> {
        let Some(first) = parts.first() else {
            return Err(Error::empty("vertical stack of zero matrices"));
        };
        let n_cols = first.n_cols;
        let mut data = Vec::new();
        let mut n_rows = 0;
        for part in parts {
            if part.n_cols != n_cols {
                return Err(Error::invalid(format!(
                    "cannot stack a {}-column matrix onto {n_cols} columns",
                    part.n_cols
                )));
            }
            data.extend_from_slice(&part.data);
            n_rows += part.n_rows;
        }
        Ok(Matrix {
            data,
            n_rows,
            n_cols,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.n_cols..(r + 1) * self.n_cols]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.n_cols)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{FeatureMatrix, SleepWakeLabel, COL_ACT, COL_HR};

    #[test]
    fn rows_round_trip_and_dimensions_are_exact() {
        let m = Matrix::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0], vec![5.0, 6.0]]).unwrap();
        assert_eq!(m.n_rows(), 3);
        assert_eq!(m.n_cols(), 2);
        assert_eq!(m.row(1), &[3.0, 4.0]);
        assert_eq!(m.rows().count(), 3);
    }

    #[test]
    fn ragged_or_non_finite_rows_are_rejected() {
        assert!(Matrix::from_rows(&[vec![1.0], vec![1.0, 2.0]]).is_err());
        let err = Matrix::from_rows(&[vec![1.0, f64::NAN]]).unwrap_err();
        assert!(matches!(
            err,
            Error::NonFiniteFeature { row: 0, col: 1 }
        ));
        assert!(Matrix::from_rows(&[]).is_err());
    }

    #[test]
    fn column_selection_preserves_order_and_values() {
        let fm = FeatureMatrix::new(
            "s",
            vec![[60.0, 0.05, 3.0], [70.0, 0.02, 0.0]],
            vec![0, 1],
            vec![SleepWakeLabel::Wake, SleepWakeLabel::Sleep],
        )
        .unwrap();
        let all = Matrix::from_feature_matrix(&fm, &[0, 1, 2]).unwrap();
        assert_eq!(all.row(0), &[60.0, 0.05, 3.0]);
        let act_only = Matrix::from_feature_matrix(&fm, &[COL_ACT]).unwrap();
        assert_eq!(act_only.n_cols(), 1);
        assert_eq!(act_only.row(0), &[3.0]);
        assert_eq!(act_only.row(1), &[0.0]);
        assert!(Matrix::from_feature_matrix(&fm, &[COL_HR, 3]).is_err());
    }

    #[test]
    fn vstack_concatenates_rows_in_order() {
        let a = Matrix::from_rows(&[vec![1.0, 2.0]]).unwrap();
        let b = Matrix::from_rows(&[vec![3.0, 4.0], vec![5.0, 6.0]]).unwrap();
        let s = Matrix::vstack(&[&a, &b]).unwrap();
        assert_eq!(s.n_rows(), 3);
        assert_eq!(s.row(2), &[5.0, 6.0]);
        let w = Matrix::from_rows(&[vec![1.0]]).unwrap();
        assert!(Matrix::vstack(&[&a, &w]).is_err());
    }
}
