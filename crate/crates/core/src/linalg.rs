//! Small dense helpers: Gram matrices and exact least-squares residuals.

use crate::scalar::{dot, norm_sq, Scalar};

/// Symmetric `k x k` matrix stored by rows. Rows are kept separately so the
/// matrix can grow by one column in `O(k)` extra work.
#[derive(Clone, Debug, PartialEq)]
pub struct Gram<T> {
    rows: Vec<Vec<T>>,
}

impl<T: Scalar> Gram<T> {
    pub fn empty() -> Self {
        Self { rows: Vec::new() }
    }

    /// `A^T A` for the given columns.
    pub fn from_columns(columns: &[Vec<T>]) -> Self {
        let mut g = Self::empty();
        for (i, c) in columns.iter().enumerate() {
            g.push_column(&columns[..i], c);
        }
        g
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.rows[i][j]
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[T] {
        &self.rows[i]
    }

    /// Extends the matrix by one column `c`, given the existing columns.
    pub fn push_column(&mut self, existing: &[Vec<T>], c: &[T]) {
        debug_assert_eq!(existing.len(), self.dim());
        let mut new_row: Vec<T> = existing.iter().map(|e| dot(e, c)).collect();
        for (row, &v) in self.rows.iter_mut().zip(&new_row) {
            row.push(v);
        }
        new_row.push(norm_sq(c));
        self.rows.push(new_row);
    }

    /// `G v`.
    pub fn mul_vec(&self, v: &[T]) -> Vec<T> {
        self.rows.iter().map(|r| dot(r, v)).collect()
    }
}

/// Residual `b - P b` of projecting `b` onto the span of `columns`.
///
/// Modified Gram-Schmidt with one re-orthogonalization pass; columns whose
/// remaining norm falls below a relative threshold are treated as linearly
/// dependent and skipped, which gives the minimum-norm least-squares
/// residual for rank-deficient systems.
pub fn least_squares_residual<T: Scalar>(columns: &[Vec<T>], b: &[T]) -> Vec<T> {
    let drop_tol = T::lit(1e-12);
    let mut basis: Vec<Vec<T>> = Vec::with_capacity(columns.len());
    for c in columns {
        let original = norm_sq(c).sqrt();
        if original == T::zero() {
            continue;
        }
        let mut q = c.clone();
        for _ in 0..2 {
            for e in &basis {
                let p = dot(e, &q);
                for (qi, &ei) in q.iter_mut().zip(e) {
                    *qi -= p * ei;
                }
            }
        }
        let nq = norm_sq(&q).sqrt();
        if nq <= drop_tol * original {
            continue;
        }
        for qi in q.iter_mut() {
            *qi /= nq;
        }
        basis.push(q);
    }
    let mut r = b.to_vec();
    for _ in 0..2 {
        for e in &basis {
            let p = dot(e, &r);
            for (ri, &ei) in r.iter_mut().zip(e) {
                *ri -= p * ei;
            }
        }
    }
    r
}
