//! Brute-force dense linear algebra used to check the structured inverses.
//!
//! Nothing in here knows about the model; it is plain Gaussian elimination
//! and matrix arithmetic so that it can serve as an independent oracle.

use std::fmt;
use std::ops::{Index, IndexMut};

use crate::error::{Error, Result};

/// Row-major dense matrix of `f64`.
#[derive(Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Builds a matrix from nested rows. All rows must have equal length.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().find(|r| r.len() != cols) {
            return Err(Error::DimensionMismatch {
                left: (1, cols),
                right: (1, bad.len()),
            });
        }
        Ok(Self {
            rows: rows.len(),
            cols,
            data: rows.concat(),
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn scale(mut self, factor: f64) -> Self {
        self.data.iter_mut().for_each(|v| *v *= factor);
        self
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

impl Index<(usize, usize)> for DenseMatrix {
    type Output = f64;

    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        assert!(
            i < self.rows && j < self.cols,
            "index ({i}, {j}) out of bounds"
        );
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for DenseMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        assert!(
            i < self.rows && j < self.cols,
            "index ({i}, {j}) out of bounds"
        );
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Debug for DenseMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "DenseMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            writeln!(f, "  {:?}", self.row(i))?;
        }
        write!(f, "]")
    }
}

/// Standard matrix product.
pub fn mat_mul(lhs: &DenseMatrix, rhs: &DenseMatrix) -> Result<DenseMatrix> {
    if lhs.cols != rhs.rows {
        return Err(Error::DimensionMismatch {
            left: lhs.shape(),
            right: rhs.shape(),
        });
    }
    let mut out = DenseMatrix::zeros(lhs.rows, rhs.cols);
    for i in 0..lhs.rows {
        for k in 0..lhs.cols {
            let l = lhs[(i, k)];
            if l == 0.0 {
                continue;
            }
            let src = rhs.row(k);
            let dst = &mut out.data[i * rhs.cols..(i + 1) * rhs.cols];
            for (d, r) in dst.iter_mut().zip(src) {
                *d += l * r;
            }
        }
    }
    Ok(out)
}

/// Maximum entrywise absolute difference.
pub fn max_abs_diff(lhs: &DenseMatrix, rhs: &DenseMatrix) -> Result<f64> {
    if lhs.shape() != rhs.shape() {
        return Err(Error::DimensionMismatch {
            left: lhs.shape(),
            right: rhs.shape(),
        });
    }
    Ok(lhs
        .data
        .iter()
        .zip(&rhs.data)
        .fold(0.0, |m, (x, y)| m.max((x - y).abs())))
}

/// `max |m * inv - I|`.
pub fn identity_residual(m: &DenseMatrix, inv: &DenseMatrix) -> Result<f64> {
    let prod = mat_mul(m, inv)?;
    max_abs_diff(&prod, &DenseMatrix::identity(prod.rows()))
}

/// Inverse together with its identity residual `max |m * inverse - I|`.
#[derive(Debug, Clone)]
pub struct DenseInverse {
    pub inverse: DenseMatrix,
    pub residual: f64,
}

/// Smallest pivot magnitude accepted by [`dense_invert`].
pub const MIN_PIVOT: f64 = 1e-300;

/// Inverts a square matrix by Gauss-Jordan elimination with partial pivoting.
pub fn dense_invert(m: &DenseMatrix) -> Result<DenseInverse> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch {
            left: m.shape(),
            right: (m.cols, m.rows),
        });
    }
    let n = m.rows;
    let mut work = m.clone();
    let mut inv = DenseMatrix::identity(n);

    for col in 0..n {
        let (pivot_row, magnitude) =
            (col..n)
                .map(|r| (r, work[(r, col)].abs()))
                .fold(
                    (col, -1.0),
                    |best, cand| if cand.1 > best.1 { cand } else { best },
                );
        if magnitude.is_nan() || magnitude <= MIN_PIVOT {
            return Err(Error::SingularMatrix {
                pivot: col,
                magnitude,
            });
        }
        if pivot_row != col {
            swap_rows(&mut work, pivot_row, col);
            swap_rows(&mut inv, pivot_row, col);
        }

        let p = work[(col, col)];
        for j in 0..n {
            work[(col, j)] /= p;
            inv[(col, j)] /= p;
        }
        for r in 0..n {
            if r == col {
                continue;
            }
            let factor = work[(r, col)];
            if factor == 0.0 {
                continue;
            }
            for j in 0..n {
                let w = work[(col, j)];
                let v = inv[(col, j)];
                work[(r, j)] -= factor * w;
                inv[(r, j)] -= factor * v;
            }
        }
    }

    let residual = identity_residual(m, &inv)?;
    Ok(DenseInverse {
        inverse: inv,
        residual,
    })
}

fn swap_rows(m: &mut DenseMatrix, a: usize, b: usize) {
    let cols = m.cols;
    for j in 0..cols {
        m.data.swap(a * cols + j, b * cols + j);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn two_by_two() -> DenseMatrix {
        DenseMatrix::from_rows(&[vec![2.0, 0.5], vec![0.5, 2.0]]).unwrap()
    }

    #[test]
    fn identity_inverts_to_itself() {
        let inv = dense_invert(&DenseMatrix::identity(5)).unwrap();
        assert_eq!(inv.inverse, DenseMatrix::identity(5));
        assert_eq!(inv.residual, 0.0);
    }

    #[test]
    fn two_by_two_matches_cofactor_formula() {
        let m = two_by_two();
        let inv = dense_invert(&m).unwrap().inverse;
        // det = 3.75; inverse = adj / det
        let expected =
            DenseMatrix::from_rows(&[vec![2.0 / 3.75, -0.5 / 3.75], vec![-0.5 / 3.75, 2.0 / 3.75]])
                .unwrap();
        assert!(max_abs_diff(&inv, &expected).unwrap() < 1e-15);
        assert!((inv[(0, 0)] - 0.5333333).abs() < 1e-7);
        assert!((inv[(0, 1)] + 0.1333333).abs() < 1e-7);
        assert!(identity_residual(&m, &inv).unwrap() < 1e-12);
    }

    #[test]
    fn hilbert_residual_is_reported() {
        let h = DenseMatrix::from_fn(4, 4, |i, j| 1.0 / (i + j + 1) as f64);
        let inv = dense_invert(&h).unwrap();
        assert!(inv.residual.is_finite());
        assert!(inv.residual < 1e-9);
        // Known exact inverse entry of the 4x4 Hilbert matrix.
        assert!((inv.inverse[(0, 0)] - 16.0).abs() < 1e-8);
        assert!((inv.inverse[(3, 3)] - 2800.0).abs() < 1e-6);
    }

    #[test]
    fn singular_matrix_reports_pivot() {
        let m = DenseMatrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 4.0]]).unwrap();
        match dense_invert(&m) {
            Err(Error::SingularMatrix { pivot, .. }) => assert_eq!(pivot, 1),
            other => panic!("expected SingularMatrix, got {other:?}"),
        }
    }

    #[test]
    fn mul_and_diff_basics() {
        let a = two_by_two();
        let i = DenseMatrix::identity(2);
        assert_eq!(mat_mul(&a, &i).unwrap(), a);
        assert_eq!(mat_mul(&i, &a).unwrap(), a);
        assert_eq!(max_abs_diff(&a, &a).unwrap(), 0.0);
        assert_eq!(max_abs_diff(&i, &DenseMatrix::zeros(2, 2)).unwrap(), 1.0);
        let approx_inv =
            DenseMatrix::from_rows(&[vec![8.0 / 15.0, -2.0 / 15.0], vec![-2.0 / 15.0, 8.0 / 15.0]])
                .unwrap();
        assert!(identity_residual(&a, &approx_inv).unwrap() < 1e-12);
    }

    #[test]
    fn dimension_mismatch() {
        let a = DenseMatrix::zeros(2, 3);
        assert!(matches!(
            mat_mul(&a, &a),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(matches!(
            max_abs_diff(&a, &DenseMatrix::zeros(3, 2)),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(matches!(
            dense_invert(&a),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    fn square(n: usize) -> impl Strategy<Value = DenseMatrix> {
        proptest::collection::vec(-1.0f64..1.0, n * n)
            .prop_map(move |v| DenseMatrix::from_fn(n, n, |i, j| v[i * n + j]))
    }

    proptest! {
        #[test]
        fn double_inverse_recovers_diagonally_dominant(m in (1usize..8).prop_flat_map(square)) {
            // Shift the diagonal so the condition number stays small.
            let n = m.rows();
            let mut m = m;
            for i in 0..n {
                m[(i, i)] += n as f64 + 1.0;
            }
            let inv = dense_invert(&m).unwrap().inverse;
            let back = dense_invert(&inv).unwrap().inverse;
            prop_assert!(max_abs_diff(&back, &m).unwrap() < 1e-8);
        }

        #[test]
        fn product_is_associative(
            (a, b, c) in (1usize..7).prop_flat_map(|n| (square(n), square(n), square(n)))
        ) {
            let left = mat_mul(&mat_mul(&a, &b).unwrap(), &c).unwrap();
            let right = mat_mul(&a, &mat_mul(&b, &c).unwrap()).unwrap();
            prop_assert!(max_abs_diff(&left, &right).unwrap() < 1e-10);
        }
    }
}
