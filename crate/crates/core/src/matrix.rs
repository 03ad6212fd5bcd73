//! Dense matrices over a single [`FieldSpec`] with exact Gaussian elimination.

use std::fmt;

use thiserror::Error;

use crate::galois::{FieldElement, FieldSpec, GaloisError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MatrixError {
    #[error("matrix dimensions must be positive (got {rows}x{cols})")]
    Empty { rows: usize, cols: usize },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("linear system has no solution")]
    NoSolution,
    #[error("matrix is singular")]
    Singular,
    #[error("column index {index} out of range for {cols} columns")]
    ColumnOutOfRange { index: usize, cols: usize },
    #[error("cofactor expansion limited to 8x8, got {0}x{0}")]
    TooLargeForLaplace(usize),
    #[error(transparent)]
    Field(#[from] GaloisError),
}

pub type Result<T> = std::result::Result<T, MatrixError>;

/// Row-major matrix of elements of one field.
#[derive(Clone, PartialEq, Eq)]
pub struct FMatrix {
    field: FieldSpec,
    rows: usize,
    cols: usize,
    data: Vec<FieldElement>,
}

impl fmt::Debug for FMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "FMatrix {}x{} over {}", self.rows, self.cols, self.field)?;
        for r in 0..self.rows {
            let row: Vec<u64> = self.row(r).iter().map(FieldElement::index).collect();
            writeln!(f, "  {row:?}")?;
        }
        Ok(())
    }
}

/// Result of [`FMatrix::solve`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Solution {
    /// The solution with every free variable set to zero.
    pub x: Vec<FieldElement>,
    /// Dimension of the solution space; zero means `x` is unique.
    pub free_dimensions: usize,
}

impl Solution {
    pub fn is_unique(&self) -> bool {
        self.free_dimensions == 0
    }
}

/// Reduced row echelon form and the pivot column of each nonzero row.
#[derive(Debug, Clone)]
pub struct Echelon {
    pub reduced: FMatrix,
    pub pivots: Vec<usize>,
}

impl FMatrix {
    pub fn new(
        field: &FieldSpec,
        rows: usize,
        cols: usize,
        data: Vec<FieldElement>,
    ) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(MatrixError::Empty { rows, cols });
        }
        if data.len() != rows * cols {
            return Err(MatrixError::DimensionMismatch(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        for e in &data {
            if e.field() != field {
                return Err(GaloisError::FieldMismatch {
                    left: format!("{field:?}"),
                    right: format!("{:?}", e.field()),
                }
                .into());
            }
        }
        Ok(FMatrix {
            field: field.clone(),
            rows,
            cols,
            data,
        })
    }

    pub fn zeros(field: &FieldSpec, rows: usize, cols: usize) -> Result<Self> {
        Self::new(field, rows, cols, vec![field.zero(); rows * cols])
    }

    pub fn identity(field: &FieldSpec, n: usize) -> Result<Self> {
        let mut m = Self::zeros(field, n, n)?;
        for i in 0..n {
            m.data[i * n + i] = field.one();
        }
        Ok(m)
    }

    pub fn from_rows(field: &FieldSpec, rows: Vec<Vec<FieldElement>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(MatrixError::DimensionMismatch("ragged rows".into()));
        }
        Self::new(field, r, c, rows.into_iter().flatten().collect())
    }

    pub fn field(&self) -> &FieldSpec {
        &self.field
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> &FieldElement {
        &self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, value: FieldElement) -> Result<()> {
        if value.field() != &self.field {
            return Err(GaloisError::FieldMismatch {
                left: format!("{:?}", self.field),
                right: format!("{:?}", value.field()),
            }
            .into());
        }
        self.data[r * self.cols + c] = value;
        Ok(())
    }

    pub fn row(&self, r: usize) -> &[FieldElement] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn column(&self, c: usize) -> Vec<FieldElement> {
        (0..self.rows).map(|r| self.get(r, c).clone()).collect()
    }

    pub fn entries(&self) -> &[FieldElement] {
        &self.data
    }

    pub fn transpose(&self) -> FMatrix {
        let mut data = Vec::with_capacity(self.data.len());
        for c in 0..self.cols {
            for r in 0..self.rows {
                data.push(self.get(r, c).clone());
            }
        }
        FMatrix {
            field: self.field.clone(),
            rows: self.cols,
            cols: self.rows,
            data,
        }
    }

    /// Submatrix made of the given columns, in the given order.
    pub fn select_columns(&self, columns: &[usize]) -> Result<FMatrix> {
        if columns.is_empty() {
            return Err(MatrixError::Empty {
                rows: self.rows,
                cols: 0,
            });
        }
        if let Some(&index) = columns.iter().find(|&&c| c >= self.cols) {
            return Err(MatrixError::ColumnOutOfRange {
                index,
                cols: self.cols,
            });
        }
        let mut data = Vec::with_capacity(self.rows * columns.len());
        for r in 0..self.rows {
            for &c in columns {
                data.push(self.get(r, c).clone());
            }
        }
        Ok(FMatrix {
            field: self.field.clone(),
            rows: self.rows,
            cols: columns.len(),
            data,
        })
    }

    /// Submatrix made of the given rows, in the given order.
    pub fn select_rows(&self, rows: &[usize]) -> Result<FMatrix> {
        if rows.is_empty() {
            return Err(MatrixError::Empty {
                rows: 0,
                cols: self.cols,
            });
        }
        let mut data = Vec::with_capacity(rows.len() * self.cols);
        for &r in rows {
            if r >= self.rows {
                return Err(MatrixError::DimensionMismatch(format!(
                    "row {r} out of range"
                )));
            }
            data.extend_from_slice(self.row(r));
        }
        Ok(FMatrix {
            field: self.field.clone(),
            rows: rows.len(),
            cols: self.cols,
            data,
        })
    }

    pub fn mul_vec(&self, v: &[FieldElement]) -> Result<Vec<FieldElement>> {
        if v.len() != self.cols {
            return Err(MatrixError::DimensionMismatch(format!(
                "vector of length {} against {} columns",
                v.len(),
                self.cols
            )));
        }
        (0..self.rows)
            .map(|r| {
                let mut acc = self.field.zero();
                for (a, b) in self.row(r).iter().zip(v) {
                    acc = acc.try_add(&a.try_mul(b)?)?;
                }
                Ok(acc)
            })
            .collect()
    }

    pub fn mul(&self, other: &FMatrix) -> Result<FMatrix> {
        if self.cols != other.rows {
            return Err(MatrixError::DimensionMismatch(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut data = Vec::with_capacity(self.rows * other.cols);
        for r in 0..self.rows {
            for c in 0..other.cols {
                let mut acc = self.field.zero();
                for k in 0..self.cols {
                    acc = acc.try_add(&self.get(r, k).try_mul(other.get(k, c))?)?;
                }
                data.push(acc);
            }
        }
        Ok(FMatrix {
            field: self.field.clone(),
            rows: self.rows,
            cols: other.cols,
            data,
        })
    }

    /// Gauss-Jordan elimination. Pivots are the first nonzero entry scanning
    /// columns left to right; pivot rows are scaled to 1.
    pub fn echelon(&self) -> Echelon {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..m.cols {
            if row == m.rows {
                break;
            }
            let Some(p) = (row..m.rows).find(|&r| !m.get(r, col).is_zero()) else {
                continue;
            };
            m.swap_rows(row, p);
            let inv = m.get(row, col).inv().expect("pivot is nonzero");
            for c in col..m.cols {
                let v = m.get(row, c) * &inv;
                m.data[row * m.cols + c] = v;
            }
            for r in 0..m.rows {
                if r == row || m.get(r, col).is_zero() {
                    continue;
                }
                let factor = m.get(r, col).clone();
                for c in col..m.cols {
                    let v = m.get(r, c) - &(&factor * m.get(row, c));
                    m.data[r * m.cols + c] = v;
                }
            }
            pivots.push(col);
            row += 1;
        }
        Echelon { reduced: m, pivots }
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for c in 0..self.cols {
            self.data.swap(a * self.cols + c, b * self.cols + c);
        }
    }

    pub fn rank(&self) -> usize {
        // Forward elimination only; cheaper than the full reduced form.
        let mut m = self.clone();
        let mut row = 0;
        for col in 0..m.cols {
            if row == m.rows {
                break;
            }
            let Some(p) = (row..m.rows).find(|&r| !m.get(r, col).is_zero()) else {
                continue;
            };
            m.swap_rows(row, p);
            let inv = m.get(row, col).inv().expect("pivot is nonzero");
            for r in row + 1..m.rows {
                if m.get(r, col).is_zero() {
                    continue;
                }
                let factor = m.get(r, col) * &inv;
                for c in col..m.cols {
                    let v = m.get(r, c) - &(&factor * m.get(row, c));
                    m.data[r * m.cols + c] = v;
                }
            }
            row += 1;
        }
        row
    }

    /// Kernel basis: one vector per free column (in column order), with that
    /// free variable set to 1 and the other free variables set to 0.
    pub fn null_space_basis(&self) -> Vec<Vec<FieldElement>> {
        let Echelon { reduced, pivots } = self.echelon();
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        free.iter()
            .map(|&f| {
                let mut v = vec![self.field.zero(); self.cols];
                v[f] = self.field.one();
                for (r, &pc) in pivots.iter().enumerate() {
                    v[pc] = -reduced.get(r, f);
                }
                v
            })
            .collect()
    }

    /// Solves `self * x = b`. Free variables are set to zero.
    pub fn solve(&self, b: &[FieldElement]) -> Result<Solution> {
        if b.len() != self.rows {
            return Err(MatrixError::DimensionMismatch(format!(
                "right-hand side of length {} for {} rows",
                b.len(),
                self.rows
            )));
        }
        let mut data = Vec::with_capacity(self.rows * (self.cols + 1));
        for (r, rhs) in b.iter().enumerate() {
            data.extend_from_slice(self.row(r));
            data.push(rhs.clone());
        }
        let augmented = FMatrix::new(&self.field, self.rows, self.cols + 1, data)?;
        let Echelon { reduced, pivots } = augmented.echelon();
        if pivots.last() == Some(&self.cols) {
            return Err(MatrixError::NoSolution);
        }
        let mut x = vec![self.field.zero(); self.cols];
        for (r, &pc) in pivots.iter().enumerate() {
            x[pc] = reduced.get(r, self.cols).clone();
        }
        Ok(Solution {
            x,
            free_dimensions: self.cols - pivots.len(),
        })
    }

    pub fn inverse(&self) -> Result<FMatrix> {
        if self.rows != self.cols {
            return Err(MatrixError::NotSquare {
                rows: self.rows,
                cols: self.cols,
            });
        }
        let n = self.rows;
        let mut data = Vec::with_capacity(n * 2 * n);
        for r in 0..n {
            data.extend_from_slice(self.row(r));
            for c in 0..n {
                data.push(if r == c {
                    self.field.one()
                } else {
                    self.field.zero()
                });
            }
        }
        let Echelon { reduced, pivots } = FMatrix::new(&self.field, n, 2 * n, data)?.echelon();
        if pivots.len() < n || pivots[n - 1] >= n {
            return Err(MatrixError::Singular);
        }
        let cols: Vec<usize> = (n..2 * n).collect();
        reduced.select_columns(&cols)
    }

    /// Determinant by elimination.
    pub fn det(&self) -> Result<FieldElement> {
        if self.rows != self.cols {
            return Err(MatrixError::NotSquare {
                rows: self.rows,
                cols: self.cols,
            });
        }
        let mut m = self.clone();
        let n = m.rows;
        let mut det = self.field.one();
        for col in 0..n {
            let Some(p) = (col..n).find(|&r| !m.get(r, col).is_zero()) else {
                return Ok(self.field.zero());
            };
            if p != col {
                m.swap_rows(col, p);
                det = -det;
            }
            let pivot = m.get(col, col).clone();
            det = &det * &pivot;
            let inv = pivot.inv().expect("pivot is nonzero");
            for r in col + 1..n {
                if m.get(r, col).is_zero() {
                    continue;
                }
                let factor = m.get(r, col) * &inv;
                for c in col..n {
                    let v = m.get(r, c) - &(&factor * m.get(col, c));
                    m.data[r * n + c] = v;
                }
            }
        }
        Ok(det)
    }

    /// Determinant by cofactor expansion along the first row. Exponential;
    /// kept as an independent cross-check for [`FMatrix::det`].
    pub fn laplace_det(&self) -> Result<FieldElement> {
        if self.rows != self.cols {
            return Err(MatrixError::NotSquare {
                rows: self.rows,
                cols: self.cols,
            });
        }
        if self.rows > 8 {
            return Err(MatrixError::TooLargeForLaplace(self.rows));
        }
        let rows: Vec<usize> = (0..self.rows).collect();
        let cols: Vec<usize> = (0..self.cols).collect();
        Ok(self.cofactor(&rows, &cols))
    }

    fn cofactor(&self, rows: &[usize], cols: &[usize]) -> FieldElement {
        if rows.len() == 1 {
            return self.get(rows[0], cols[0]).clone();
        }
        let mut acc = self.field.zero();
        for (k, &c) in cols.iter().enumerate() {
            let entry = self.get(rows[0], c);
            if entry.is_zero() {
                continue;
            }
            let minor_cols: Vec<usize> = cols.iter().copied().filter(|&x| x != c).collect();
            let term = entry * &self.cofactor(&rows[1..], &minor_cols);
            acc = if k % 2 == 0 {
                &acc + &term
            } else {
                &acc - &term
            };
        }
        acc
    }
}
