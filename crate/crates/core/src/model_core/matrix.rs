use std::ops::Deref;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Dense real matrix with one sample per column.
///
/// Entries are always finite and the shape is fixed at construction. Read
/// access to the underlying [`DMatrix`] is available through `Deref`; every
/// constructor validates its input.
#[derive(Debug, Clone, PartialEq)]
pub struct RealMatrix(DMatrix<f64>);

impl RealMatrix {
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        if m.nrows() == 0 || m.ncols() == 0 {
            return Err(Error::EmptyInput(format!(
                "matrix of shape {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        if m.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("matrix"));
        }
        Ok(RealMatrix(m))
    }

    pub fn from_column_slice(rows: usize, cols: usize, data: &[f64]) -> Result<Self> {
        check_len(rows, cols, data.len())?;
        Self::new(DMatrix::from_column_slice(rows, cols, data))
    }

    pub fn from_row_slice(rows: usize, cols: usize, data: &[f64]) -> Result<Self> {
        check_len(rows, cols, data.len())?;
        Self::new(DMatrix::from_row_slice(rows, cols, data))
    }

    /// Builds a matrix whose columns are the given vectors.
    pub fn from_columns(columns: &[Vec<f64>]) -> Result<Self> {
        let rows = columns.first().map(Vec::len).unwrap_or(0);
        if let Some(bad) = columns.iter().find(|c| c.len() != rows) {
            return Err(Error::Dimension(format!(
                "column of length {} among columns of length {rows}",
                bad.len()
            )));
        }
        let data: Vec<f64> = columns.iter().flatten().copied().collect();
        Self::from_column_slice(rows, columns.len(), &data)
    }

    pub fn identity(n: usize) -> Result<Self> {
        Self::new(DMatrix::identity(n, n))
    }

    pub fn rows(&self) -> usize {
        self.0.nrows()
    }

    pub fn cols(&self) -> usize {
        self.0.ncols()
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_inner(self) -> DMatrix<f64> {
        self.0
    }

    pub fn column_vec(&self, j: usize) -> Vec<f64> {
        self.0.column(j).iter().copied().collect()
    }

    /// `self * rhs`, checking inner dimensions.
    ///
    /// Each output column is an independent matrix-vector product, so a column's
    /// result is bit-identical however many other columns share the call.
    pub fn matmul(&self, rhs: &RealMatrix) -> Result<RealMatrix> {
        if self.cols() != rhs.rows() {
            return Err(Error::Dimension(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows(),
                self.cols(),
                rhs.rows(),
                rhs.cols()
            )));
        }
        let mut out = DMatrix::zeros(self.rows(), rhs.cols());
        for (j, col) in rhs.0.column_iter().enumerate() {
            out.set_column(j, &(&self.0 * col));
        }
        Self::new(out)
    }

    /// Horizontal concatenation `[self | rhs]`.
    pub fn hstack(&self, rhs: &RealMatrix) -> Result<RealMatrix> {
        if self.rows() != rhs.rows() {
            return Err(Error::Dimension(format!(
                "cannot stack {} rows beside {} rows",
                self.rows(),
                rhs.rows()
            )));
        }
        let mut out = DMatrix::zeros(self.rows(), self.cols() + rhs.cols());
        out.columns_mut(0, self.cols()).copy_from(&self.0);
        out.columns_mut(self.cols(), rhs.cols()).copy_from(&rhs.0);
        Ok(RealMatrix(out))
    }

    /// Columns `start..start + count` as a new matrix.
    pub fn column_range(&self, start: usize, count: usize) -> Result<RealMatrix> {
        if count == 0 || start + count > self.cols() {
            return Err(Error::Dimension(format!(
                "column range {start}..{} out of 0..{}",
                start + count,
                self.cols()
            )));
        }
        Ok(RealMatrix(self.0.columns(start, count).into_owned()))
    }

    /// Squared Frobenius norm accumulated in column-major order.
    pub fn frobenius_sq(&self) -> f64 {
        self.0.iter().map(|v| v * v).sum()
    }
}

impl Deref for RealMatrix {
    type Target = DMatrix<f64>;

    fn deref(&self) -> &DMatrix<f64> {
        &self.0
    }
}

fn check_len(rows: usize, cols: usize, len: usize) -> Result<()> {
    if rows * cols != len {
        return Err(Error::Dimension(format!(
            "{len} values cannot fill a {rows}x{cols} matrix"
        )));
    }
    Ok(())
}
