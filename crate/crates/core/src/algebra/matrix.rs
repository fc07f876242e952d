use std::fmt;

use super::{AlgebraError, Field, Gf};

/// Dense row-major matrix over GF(2^8).
#[derive(Clone, PartialEq, Eq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<Gf>,
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            let row: Vec<String> = self.row(r).iter().map(|v| format!("{:02x}", v.0)).collect();
            writeln!(f, "  {}", row.join(" "))?;
        }
        write!(f, "]")
    }
}

impl Matrix {
    pub fn new(rows: usize, cols: usize, data: Vec<Gf>) -> Result<Matrix, AlgebraError> {
        if data.len() != rows * cols {
            return Err(AlgebraError::DimensionMismatch {
                expected: (rows, cols),
                found: (data.len(), 1),
            });
        }
        Ok(Matrix { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Matrix {
        Matrix {
            rows,
            cols,
            data: vec![Gf::ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Matrix {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m.set(i, i, Gf::ONE);
        }
        m
    }

    /// Builds a matrix whose columns are the given vectors (all the same length).
    pub fn from_columns(columns: &[Vec<Gf>]) -> Result<Matrix, AlgebraError> {
        let rows = columns.first().map_or(0, Vec::len);
        let cols = columns.len();
        let mut m = Matrix::zeros(rows, cols);
        for (c, col) in columns.iter().enumerate() {
            if col.len() != rows {
                return Err(AlgebraError::DimensionMismatch {
                    expected: (rows, cols),
                    found: (col.len(), c),
                });
            }
            for (r, &v) in col.iter().enumerate() {
                m.set(r, c, v);
            }
        }
        Ok(m)
    }

    /// Builds a matrix whose rows are the given vectors (all the same length).
    pub fn from_rows(rows: &[Vec<Gf>]) -> Result<Matrix, AlgebraError> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for row in rows {
            if row.len() != cols {
                return Err(AlgebraError::DimensionMismatch {
                    expected: (rows.len(), cols),
                    found: (rows.len(), row.len()),
                });
            }
            data.extend_from_slice(row);
        }
        Ok(Matrix {
            rows: rows.len(),
            cols,
            data,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn entries(&self) -> &[Gf] {
        &self.data
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> Gf {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: Gf) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[Gf] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn column(&self, c: usize) -> Vec<Gf> {
        (0..self.rows).map(|r| self.get(r, c)).collect()
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t.set(c, r, self.get(r, c));
            }
        }
        t
    }

    pub fn select_columns(&self, cols: &[usize]) -> Matrix {
        let mut m = Matrix::zeros(self.rows, cols.len());
        for r in 0..self.rows {
            for (j, &c) in cols.iter().enumerate() {
                m.set(r, j, self.get(r, c));
            }
        }
        m
    }

    pub fn mul(&self, field: &Field, other: &Matrix) -> Result<Matrix, AlgebraError> {
        if self.cols != other.rows {
            return Err(AlgebraError::DimensionMismatch {
                expected: (self.cols, other.cols),
                found: (other.rows, other.cols),
            });
        }
        let mut out = Matrix::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            let dst = &mut out.data[r * other.cols..(r + 1) * other.cols];
            for k in 0..self.cols {
                field.axpy(dst, self.get(r, k), other.row(k));
            }
        }
        Ok(out)
    }

    /// Row vector times matrix: `v * self`.
    pub fn left_mul_vec(&self, field: &Field, v: &[Gf]) -> Result<Vec<Gf>, AlgebraError> {
        if v.len() != self.rows {
            return Err(AlgebraError::DimensionMismatch {
                expected: (1, self.rows),
                found: (1, v.len()),
            });
        }
        let mut out = vec![Gf::ZERO; self.cols];
        for (r, &c) in v.iter().enumerate() {
            field.axpy(&mut out, c, self.row(r));
        }
        Ok(out)
    }

    /// Solves `self * x = b` for square `self`.
    ///
    /// Gauss-Jordan elimination taking the first nonzero entry in each
    /// column as the pivot. A singular system reports the first column
    /// without a pivot (0-based).
    pub fn solve(&self, field: &Field, b: &Matrix) -> Result<Matrix, AlgebraError> {
        if self.rows != self.cols {
            return Err(AlgebraError::NotSquare {
                rows: self.rows,
                cols: self.cols,
            });
        }
        if b.rows != self.rows {
            return Err(AlgebraError::DimensionMismatch {
                expected: (self.rows, b.cols),
                found: (b.rows, b.cols),
            });
        }
        let n = self.rows;
        let mut a = self.clone();
        let mut x = b.clone();
        for col in 0..n {
            let pivot = (col..n)
                .find(|&r| !a.get(r, col).is_zero())
                .ok_or(AlgebraError::Singular { column: col })?;
            if pivot != col {
                a.swap_rows(pivot, col);
                x.swap_rows(pivot, col);
            }
            let inv = field.inv(a.get(col, col))?;
            a.scale_row(field, col, inv);
            x.scale_row(field, col, inv);
            for r in 0..n {
                if r == col {
                    continue;
                }
                let factor = a.get(r, col);
                if factor.is_zero() {
                    continue;
                }
                a.add_scaled_row(field, r, col, factor);
                x.add_scaled_row(field, r, col, factor);
            }
        }
        Ok(x)
    }

    pub fn inverse(&self, field: &Field) -> Result<Matrix, AlgebraError> {
        self.solve(field, &Matrix::identity(self.rows))
    }

    /// Row rank over the field.
    pub fn rank(&self, field: &Field) -> usize {
        let mut a = self.clone();
        let mut rank = 0;
        for col in 0..a.cols {
            if rank == a.rows {
                break;
            }
            let Some(pivot) = (rank..a.rows).find(|&r| !a.get(r, col).is_zero()) else {
                continue;
            };
            a.swap_rows(pivot, rank);
            let inv = field.inv(a.get(rank, col)).expect("pivot is nonzero");
            a.scale_row(field, rank, inv);
            for r in rank + 1..a.rows {
                let factor = a.get(r, col);
                if !factor.is_zero() {
                    a.add_scaled_row(field, r, rank, factor);
                }
            }
            rank += 1;
        }
        rank
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for c in 0..self.cols {
            self.data.swap(a * self.cols + c, b * self.cols + c);
        }
    }

    fn scale_row(&mut self, field: &Field, r: usize, s: Gf) {
        for v in &mut self.data[r * self.cols..(r + 1) * self.cols] {
            *v = field.mul(*v, s);
        }
    }

    // row[dst] += factor * row[src]
    fn add_scaled_row(&mut self, field: &Field, dst: usize, src: usize, factor: Gf) {
        let cols = self.cols;
        let (lo, hi) = self.data.split_at_mut(dst.max(src) * cols);
        let (d, s) = if dst < src {
            (&mut lo[dst * cols..(dst + 1) * cols], &hi[..cols])
        } else {
            (&mut hi[..cols], &lo[src * cols..(src + 1) * cols])
        };
        field.axpy(d, factor, s);
    }
}
