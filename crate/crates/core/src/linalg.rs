//! Small dense matrices over a [`Field`], with the handful of exact
//! elimination routines the symbolic checks need (rank, kernel, span tests).

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use crate::scalar::Field;

/// Row-major dense matrix.
#[derive(Clone, PartialEq)]
pub struct Matrix<F> {
    rows: usize,
    cols: usize,
    data: Vec<F>,
}

impl<F: Field> Matrix<F> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![F::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = F::one();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> F) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Matrix { rows, cols, data }
    }

    /// Build from rows; panics on ragged input.
    pub fn from_rows(rows: Vec<Vec<F>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged matrix rows");
        Matrix {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        }
    }

    /// Matrix whose columns are the given vectors (all of length `dim`).
    pub fn from_columns(dim: usize, columns: &[Vec<F>]) -> Self {
        Self::from_fn(dim, columns.len(), |i, j| columns[j][i].clone())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[F] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<F> {
        (0..self.rows).map(|i| self[(i, j)].clone()).collect()
    }

    pub fn columns(&self) -> Vec<Vec<F>> {
        (0..self.cols).map(|j| self.column(j)).collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].clone())
    }

    /// Entrywise conjugate.
    pub fn conj(&self) -> Self {
        self.map(|x| x.conj())
    }

    pub fn map<G: Field>(&self, f: impl Fn(&F) -> G) -> Matrix<G> {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(f).collect(),
        }
    }

    pub fn scale(&self, k: &F) -> Self {
        self.map(|x| x.clone() * k.clone())
    }

    pub fn apply(&self, v: &[F]) -> Vec<F> {
        assert_eq!(v.len(), self.cols, "dimension mismatch in apply");
        (0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(v)
                    .fold(F::zero(), |acc, (a, b)| acc + a.clone() * b.clone())
            })
            .collect()
    }

    /// `[self | other]`.
    pub fn hstack(&self, other: &Self) -> Self {
        assert_eq!(self.rows, other.rows);
        Self::from_fn(self.rows, self.cols + other.cols, |i, j| {
            if j < self.cols {
                self[(i, j)].clone()
            } else {
                other[(i, j - self.cols)].clone()
            }
        })
    }

    /// `[self ; other]`.
    pub fn vstack(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.cols);
        let mut data = self.data.clone();
        data.extend(other.data.iter().cloned());
        Matrix {
            rows: self.rows + other.rows,
            cols: self.cols,
            data,
        }
    }

    pub fn max_magnitude(&self) -> f64 {
        self.data.iter().map(Field::magnitude).fold(0.0, f64::max)
    }

    pub fn is_zero(&self, tol: f64) -> bool {
        self.data.iter().all(|x| x.is_negligible(tol))
    }

    /// Reduced row echelon form and pivot columns. Pivots are chosen by
    /// largest magnitude, so the same routine serves exact and float fields.
    pub fn rref(&self, tol: f64) -> (Self, Vec<usize>) {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..m.cols {
            if r == m.rows {
                break;
            }
            let (best, mag) = (r..m.rows)
                .map(|i| (i, m[(i, c)].magnitude()))
                .fold((r, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
            if m[(best, c)].is_negligible(tol) || mag < 0.0 {
                continue;
            }
            m.swap_rows(r, best);
            let inv = F::one() / m[(r, c)].clone();
            for j in 0..m.cols {
                m[(r, j)] = m[(r, j)].clone() * inv.clone();
            }
            for i in 0..m.rows {
                if i != r && !m[(i, c)].is_zero() {
                    let f = m[(i, c)].clone();
                    for j in 0..m.cols {
                        let v = m[(r, j)].clone() * f.clone();
                        m[(i, j)] = m[(i, j)].clone() - v;
                    }
                }
            }
            if !F::EXACT {
                for i in 0..m.rows {
                    if i != r && m[(i, c)].is_negligible(tol) {
                        m[(i, c)] = F::zero();
                    }
                }
            }
            pivots.push(c);
            r += 1;
        }
        (m, pivots)
    }

    pub fn rank(&self, tol: f64) -> usize {
        self.rref(tol).1.len()
    }

    /// Basis (as column vectors) of `{v : self * v = 0}`.
    pub fn kernel(&self, tol: f64) -> Vec<Vec<F>> {
        let (r, pivots) = self.rref(tol);
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        free.iter()
            .map(|&f| {
                let mut v = vec![F::zero(); self.cols];
                v[f] = F::one();
                for (row, &p) in pivots.iter().enumerate() {
                    v[p] = -r[(row, f)].clone();
                }
                v
            })
            .collect()
    }

    /// A basis of the column space, taken from the original columns.
    pub fn column_basis(&self, tol: f64) -> Vec<Vec<F>> {
        let (_, pivots) = self.rref(tol);
        pivots.iter().map(|&c| self.column(c)).collect()
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a != b {
            for j in 0..self.cols {
                self.data.swap(a * self.cols + j, b * self.cols + j);
            }
        }
    }
}

/// Span equality of two families of column vectors via ranks of the stacked bases.
pub fn same_span<F: Field>(a: &Matrix<F>, b: &Matrix<F>, tol: f64) -> bool {
    let ra = a.rank(tol);
    let rb = b.rank(tol);
    ra == rb && a.hstack(b).rank(tol) == ra
}

/// Basis of `span(a) ∩ span(b)` for column families `a`, `b`.
pub fn intersect_spans<F: Field>(a: &Matrix<F>, b: &Matrix<F>, tol: f64) -> Vec<Vec<F>> {
    let stacked = a.hstack(&-b.clone());
    let kernel = stacked.kernel(tol);
    let combos: Vec<Vec<F>> = kernel.iter().map(|k| a.apply(&k[..a.cols()])).collect();
    if combos.is_empty() {
        return combos;
    }
    Matrix::from_columns(a.rows(), &combos).column_basis(tol)
}

/// Basis of `span(a) + span(b)`.
pub fn sum_spans<F: Field>(a: &Matrix<F>, b: &Matrix<F>, tol: f64) -> Vec<Vec<F>> {
    a.hstack(b).column_basis(tol)
}

impl<F> Index<(usize, usize)> for Matrix<F> {
    type Output = F;
    fn index(&self, (i, j): (usize, usize)) -> &F {
        &self.data[i * self.cols + j]
    }
}

impl<F> IndexMut<(usize, usize)> for Matrix<F> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut F {
        &mut self.data[i * self.cols + j]
    }
}

impl<F: Field> Mul for &Matrix<F> {
    type Output = Matrix<F>;
    fn mul(self, rhs: &Matrix<F>) -> Matrix<F> {
        assert_eq!(self.cols, rhs.rows, "dimension mismatch in product");
        let mut out = Matrix::<F>::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    out[(i, j)] = out[(i, j)].clone() + a.clone() * rhs[(k, j)].clone();
                }
            }
        }
        out
    }
}

impl<F: Field> Add for &Matrix<F> {
    type Output = Matrix<F>;
    fn add(self, rhs: &Matrix<F>) -> Matrix<F> {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Matrix::from_fn(self.rows, self.cols, |i, j| self[(i, j)].clone() + rhs[(i, j)].clone())
    }
}

impl<F: Field> Sub for &Matrix<F> {
    type Output = Matrix<F>;
    fn sub(self, rhs: &Matrix<F>) -> Matrix<F> {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Matrix::from_fn(self.rows, self.cols, |i, j| self[(i, j)].clone() - rhs[(i, j)].clone())
    }
}

impl<F: Field> Neg for Matrix<F> {
    type Output = Matrix<F>;
    fn neg(self) -> Matrix<F> {
        self.map(|x| -x.clone())
    }
}

impl<F: fmt::Debug> fmt::Debug for Matrix<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut list = f.debug_list();
        for i in 0..self.rows {
            list.entry(&&self.data[i * self.cols..(i + 1) * self.cols]);
        }
        list.finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{Rational, Scalar};
    use num_complex::Complex;

    fn q(n: i64) -> Rational {
        Rational::from_int(n)
    }

    #[test]
    fn exact_rank_and_kernel() {
        let m = Matrix::from_rows(vec![vec![q(1), q(2), q(3)], vec![q(2), q(4), q(6)]]);
        assert_eq!(m.rank(0.0), 1);
        let k = m.kernel(0.0);
        assert_eq!(k.len(), 2);
        for v in &k {
            assert!(m.apply(v).iter().all(|x| x == &q(0)));
        }
    }

    #[test]
    fn span_tests_over_complex_rationals() {
        let i = Complex::new(q(0), q(1));
        let one = Complex::new(q(1), q(0));
        let a = Matrix::from_columns(2, &[vec![one.clone(), i.clone()]]);
        let b = Matrix::from_columns(2, &[vec![i.clone(), -one.clone()]]);
        assert!(same_span(&a, &b, 0.0));
        let c = a.conj();
        assert!(!same_span(&a, &c, 0.0));
        assert!(intersect_spans(&a, &c, 0.0).is_empty());
        assert_eq!(sum_spans(&a, &c, 0.0).len(), 2);
    }

    #[test]
    fn float_rank_respects_tolerance() {
        let m = Matrix::from_rows(vec![vec![1.0, 1.0], vec![1.0, 1.0 + 1e-14]]);
        assert_eq!(m.rank(1e-10), 1);
        assert_eq!(m.rank(1e-16), 2);
    }
}
