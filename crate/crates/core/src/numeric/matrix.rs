use std::fmt;
use std::ops::{Index, IndexMut};

use num_complex::Complex64;

use super::Scalar;
use crate::error::{Error, Result};

/// Dense row-major matrix over a [`Scalar`] backend.
///
/// Dimensions are fixed at construction; indexing is bounds-checked.
#[derive(Clone, PartialEq)]
pub struct Matrix<S> {
    rows: usize,
    cols: usize,
    data: Vec<S>,
}

impl<S: Scalar> Matrix<S> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![S::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = S::one();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> S) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Self { rows, cols, data }
    }

    /// Builds a matrix from row vectors; all rows must have equal length.
    pub fn from_rows(rows: &[Vec<S>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::DimensionMismatch("ragged rows".into()));
        }
        Ok(Self {
            rows: rows.len(),
            cols,
            data: rows.iter().flat_map(|r| r.iter().cloned()).collect(),
        })
    }

    /// Builds a matrix whose columns are the given vectors.
    pub fn from_columns(cols: &[Vec<S>]) -> Result<Self> {
        Ok(Self::from_rows(cols)?.transpose())
    }

    pub fn diagonal(entries: &[S]) -> Self {
        let mut m = Self::zeros(entries.len(), entries.len());
        for (i, e) in entries.iter().enumerate() {
            m[(i, i)] = e.clone();
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn is_empty(&self) -> bool {
        self.rows == 0 || self.cols == 0
    }

    pub fn get(&self, r: usize, c: usize) -> Option<&S> {
        if r < self.rows && c < self.cols {
            self.data.get(r * self.cols + c)
        } else {
            None
        }
    }

    pub fn row(&self, r: usize) -> &[S] {
        assert!(r < self.rows, "row {r} out of bounds ({} rows)", self.rows);
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn column(&self, c: usize) -> Vec<S> {
        assert!(c < self.cols, "column {c} out of bounds ({} cols)", self.cols);
        (0..self.rows).map(|r| self[(r, c)].clone()).collect()
    }

    pub fn row_vectors(&self) -> Vec<Vec<S>> {
        (0..self.rows).map(|r| self.row(r).to_vec()).collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)].clone())
    }

    pub fn map<T: Scalar>(&self, f: impl Fn(&S) -> T) -> Matrix<T> {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(f).collect(),
        }
    }

    pub fn to_c64(&self) -> Matrix<Complex64> {
        self.map(|s| s.to_c64())
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "matrix product dimension mismatch");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for l in 0..self.cols {
                let a = &self[(i, l)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = &other[(l, j)];
                    if b.is_zero() {
                        continue;
                    }
                    let cur = std::mem::replace(&mut out[(i, j)], S::zero());
                    out[(i, j)] = cur + a.clone() * b.clone();
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[S]) -> Vec<S> {
        assert_eq!(self.cols, v.len(), "matrix-vector dimension mismatch");
        (0..self.rows).map(|r| dot(self.row(r), v)).collect()
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Self::from_fn(self.rows, self.cols, |r, c| {
            self[(r, c)].clone() + other[(r, c)].clone()
        })
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Self::from_fn(self.rows, self.cols, |r, c| {
            self[(r, c)].clone() - other[(r, c)].clone()
        })
    }

    pub fn scale(&self, s: &S) -> Self {
        self.map(|x| x.clone() * s.clone())
    }

    /// Block-diagonal sum.
    pub fn direct_sum(&self, other: &Self) -> Self {
        let mut out = Self::zeros(self.rows + other.rows, self.cols + other.cols);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out[(r, c)] = self[(r, c)].clone();
            }
        }
        for r in 0..other.rows {
            for c in 0..other.cols {
                out[(self.rows + r, self.cols + c)] = other[(r, c)].clone();
            }
        }
        out
    }

    pub fn max_modulus(&self) -> f64 {
        self.data.iter().map(Scalar::modulus).fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data
            .iter()
            .map(|x| x.modulus().powi(2))
            .sum::<f64>()
            .sqrt()
    }

    pub fn is_real(&self) -> bool {
        self.data.iter().all(Scalar::is_real)
    }

    /// Gauss-Jordan inverse. Pivots by modulus; a pivot counts as zero when it
    /// is exactly zero (exact backend) or below `tol * max|entry|` (approximate).
    pub fn inverse(&self, tol: f64) -> Result<Self> {
        if !self.is_square() {
            return Err(Error::DimensionMismatch("inverse of non-square matrix".into()));
        }
        let n = self.rows;
        let scale = self.max_modulus();
        if scale == 0.0 {
            return Err(Error::SingularMatrix);
        }
        let mut a = self.clone();
        let mut inv = Self::identity(n);
        for col in 0..n {
            let pivot = (col..n)
                .max_by(|&x, &y| a[(x, col)].modulus().total_cmp(&a[(y, col)].modulus()))
                .expect("non-empty range");
            let p = a[(pivot, col)].clone();
            if p.is_zero() || (!S::EXACT && p.modulus() <= tol * scale) {
                return Err(Error::SingularMatrix);
            }
            a.swap_rows(col, pivot);
            inv.swap_rows(col, pivot);
            let pinv = S::one() / p;
            for c in 0..n {
                a[(col, c)] = a[(col, c)].clone() * pinv.clone();
                inv[(col, c)] = inv[(col, c)].clone() * pinv.clone();
            }
            for r in 0..n {
                if r == col || a[(r, col)].is_zero() {
                    continue;
                }
                let factor = a[(r, col)].clone();
                for c in 0..n {
                    let t = a[(col, c)].clone();
                    if !t.is_zero() {
                        a[(r, c)] = a[(r, c)].clone() - factor.clone() * t;
                    }
                    let t = inv[(col, c)].clone();
                    if !t.is_zero() {
                        inv[(r, c)] = inv[(r, c)].clone() - factor.clone() * t;
                    }
                }
            }
        }
        Ok(inv)
    }

    /// Reduced row echelon form and pivot columns. Exact scalars pivot on
    /// the first nonzero entry, approximate ones on the largest modulus with
    /// entries below `tol * max|entry|` treated as zero.
    pub fn rref(&self, tol: f64) -> (Self, Vec<usize>) {
        let mut a = self.clone();
        let cutoff = tol * self.max_modulus();
        let negligible = |x: &S| x.is_zero() || (!S::EXACT && x.modulus() <= cutoff);
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..a.cols {
            if r == a.rows {
                break;
            }
            let candidate = if S::EXACT {
                (r..a.rows).find(|&i| !a[(i, c)].is_zero())
            } else {
                (r..a.rows).max_by(|&x, &y| a[(x, c)].modulus().total_cmp(&a[(y, c)].modulus()))
            };
            let Some(p) = candidate.filter(|&p| !negligible(&a[(p, c)])) else {
                continue;
            };
            a.swap_rows(r, p);
            let inv = S::one() / a[(r, c)].clone();
            for j in c..a.cols {
                if !a[(r, j)].is_zero() {
                    a[(r, j)] = a[(r, j)].clone() * inv.clone();
                }
            }
            for i in (0..a.rows).filter(|&i| i != r) {
                if a[(i, c)].is_zero() {
                    continue;
                }
                let factor = a[(i, c)].clone();
                for j in c..a.cols {
                    let t = a[(r, j)].clone();
                    if !t.is_zero() {
                        a[(i, j)] = a[(i, j)].clone() - factor.clone() * t;
                    }
                }
            }
            pivots.push(c);
            r += 1;
        }
        (a, pivots)
    }

    /// Solves `self * x = b` for square nonsingular `self`.
    pub fn solve(&self, b: &[S], tol: f64) -> Result<Vec<S>> {
        Ok(self.inverse(tol)?.mul_vec(b))
    }

    pub fn pow(&self, e: usize) -> Self {
        assert!(self.is_square());
        let mut result = Self::identity(self.rows);
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        result
    }

    pub fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for c in 0..self.cols {
            self.data.swap(a * self.cols + c, b * self.cols + c);
        }
    }

    pub fn data(&self) -> &[S] {
        &self.data
    }
}

impl<S> Index<(usize, usize)> for Matrix<S> {
    type Output = S;

    fn index(&self, (r, c): (usize, usize)) -> &S {
        assert!(
            r < self.rows && c < self.cols,
            "index ({r}, {c}) out of bounds for {}x{} matrix",
            self.rows,
            self.cols
        );
        &self.data[r * self.cols + c]
    }
}

impl<S> IndexMut<(usize, usize)> for Matrix<S> {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut S {
        assert!(
            r < self.rows && c < self.cols,
            "index ({r}, {c}) out of bounds for {}x{} matrix",
            self.rows,
            self.cols
        );
        &mut self.data[r * self.cols + c]
    }
}

impl<S: fmt::Debug> fmt::Debug for Matrix<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            writeln!(f, "  {:?}", &self.data[r * self.cols..(r + 1) * self.cols])?;
        }
        write!(f, "]")
    }
}

/// Bilinear (non-conjugating) dot product.
pub fn dot<S: Scalar>(a: &[S], b: &[S]) -> S {
    assert_eq!(a.len(), b.len(), "dot product length mismatch");
    let mut acc = S::zero();
    for (x, y) in a.iter().zip(b) {
        if x.is_zero() || y.is_zero() {
            continue;
        }
        acc = acc + x.clone() * y.clone();
    }
    acc
}

pub fn norm<S: Scalar>(v: &[S]) -> f64 {
    v.iter().map(|x| x.modulus().powi(2)).sum::<f64>().sqrt()
}

pub fn scale_vec<S: Scalar>(v: &[S], s: &S) -> Vec<S> {
    v.iter().map(|x| x.clone() * s.clone()).collect()
}
