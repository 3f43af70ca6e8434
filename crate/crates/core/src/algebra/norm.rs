use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};

/// Largest dimension for which norms are taken from a dense SVD.
pub const DENSE_LIMIT: usize = 600;

const LANCZOS_MAX_ITER: usize = 400;
const LANCZOS_TOL: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormMethod {
    DenseSvd,
    Lanczos { iterations: usize },
    ClosedForm,
}

impl NormMethod {
    pub fn tag(&self) -> &'static str {
        match self {
            NormMethod::DenseSvd => "dense-svd",
            NormMethod::Lanczos { .. } => "lanczos",
            NormMethod::ClosedForm => "closed-form",
        }
    }
}

/// A norm together with how it was obtained; `radius` is the lattice
/// window for truncated regular representations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormEstimate {
    pub value: f64,
    pub method: NormMethod,
    pub radius: Option<i64>,
}

/// Largest singular value.
pub fn operator_norm(m: &DMatrix<Complex64>) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.singular_values().iter().copied().fold(0.0, f64::max)
}

/// Column-compressed complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseOperator {
    pub rows: usize,
    pub columns: Vec<Vec<(usize, Complex64)>>,
}

impl SparseOperator {
    pub fn cols(&self) -> usize {
        self.columns.len()
    }

    pub fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        let mut y = vec![Complex64::new(0.0, 0.0); self.rows];
        for (col, &xj) in self.columns.iter().zip(x) {
            if xj == Complex64::new(0.0, 0.0) {
                continue;
            }
            for &(i, v) in col {
                y[i] += v * xj;
            }
        }
        y
    }

    pub fn apply_adjoint(&self, y: &[Complex64]) -> Vec<Complex64> {
        self.columns
            .iter()
            .map(|col| col.iter().map(|&(i, v)| v.conj() * y[i]).sum())
            .collect()
    }

    pub fn to_dense(&self) -> DMatrix<Complex64> {
        let mut m = DMatrix::zeros(self.rows, self.cols());
        for (j, col) in self.columns.iter().enumerate() {
            for &(i, v) in col {
                m[(i, j)] += v;
            }
        }
        m
    }

    /// Dense SVD when small, Lanczos on `A*A` otherwise.
    pub fn norm(&self) -> NormEstimate {
        if self.rows.max(self.cols()) <= DENSE_LIMIT {
            NormEstimate {
                value: operator_norm(&self.to_dense()),
                method: NormMethod::DenseSvd,
                radius: None,
            }
        } else {
            let (value, iterations) = lanczos_norm(self, LANCZOS_MAX_ITER, LANCZOS_TOL);
            NormEstimate {
                value,
                method: NormMethod::Lanczos { iterations },
                radius: None,
            }
        }
    }
}

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Number of eigenvalues of the tridiagonal matrix `(alpha, beta)` below `x`.
fn sturm_count(alpha: &[f64], beta: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut d = 1.0;
    for i in 0..alpha.len() {
        let b2 = if i == 0 { 0.0 } else { beta[i - 1] * beta[i - 1] };
        d = alpha[i] - x - if i == 0 { 0.0 } else { b2 / d };
        if d == 0.0 {
            d = f64::EPSILON * (x.abs() + 1.0);
        }
        if d < 0.0 {
            count += 1;
        }
    }
    count
}

/// Largest eigenvalue of a symmetric tridiagonal matrix by Sturm bisection.
fn top_ritz(alpha: &[f64], beta: &[f64]) -> f64 {
    let k = alpha.len();
    let off = |i: usize| if i < beta.len() { beta[i].abs() } else { 0.0 };
    let radius = |i: usize| off(i) + if i > 0 { off(i - 1) } else { 0.0 };
    let mut lo = (0..k).map(|i| alpha[i] - radius(i)).fold(f64::INFINITY, f64::min);
    let mut hi = (0..k).map(|i| alpha[i] + radius(i)).fold(f64::NEG_INFINITY, f64::max);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if sturm_count(alpha, beta, mid) == k {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// Largest singular value of `a` by Lanczos on `a*a` with full
/// reorthogonalization. Returns the estimate and the iteration count.
///
/// Ritz values approach the top of the spectrum from below, so the result
/// is a lower bound; it converges slowly when the top of the spectrum is
/// tightly clustered, as for large truncation windows.
pub fn lanczos_norm(a: &SparseOperator, max_iter: usize, tol: f64) -> (f64, usize) {
    let n = a.cols();
    if n == 0 {
        return (0.0, 0);
    }
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x1a2c);
    let mut q: Vec<Complex64> = (0..n)
        .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    let nq = dot(&q, &q).re.sqrt();
    q.iter_mut().for_each(|z| *z /= nq);

    let mut basis: Vec<Vec<Complex64>> = vec![q];
    let (mut alpha, mut beta) = (Vec::new(), Vec::new());
    let mut last = 0.0;
    for it in 0..max_iter.min(n) {
        let qj = &basis[it];
        let mut w = a.apply_adjoint(&a.apply(qj));
        let aj = dot(qj, &w).re;
        alpha.push(aj);
        for _ in 0..2 {
            for b in &basis {
                let c = dot(b, &w);
                w.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
            }
        }
        let bj = dot(&w, &w).re.sqrt();
        let theta = top_ritz(&alpha, &beta);
        let converged = it > 2 && (theta - last).abs() <= tol * theta.abs().max(1e-300);
        last = theta;
        if converged || bj <= 1e-13 * theta.abs().max(1e-300) {
            return (theta.max(0.0).sqrt(), it + 1);
        }
        beta.push(bj);
        w.iter_mut().for_each(|z| *z /= bj);
        basis.push(w);
    }
    (last.max(0.0).sqrt(), alpha.len())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn shift(n: usize) -> SparseOperator {
        SparseOperator {
            rows: n,
            columns: (0..n)
                .map(|j| if j + 1 < n { vec![(j + 1, Complex64::new(1.0, 0.0))] } else { vec![] })
                .collect(),
        }
    }

    #[test]
    fn dense_and_lanczos_agree() {
        // 1 + S + S* on a path: norm 1 + 2cos(π/(n+1)), with a tightly
        // clustered top of the spectrum.
        let n = 700;
        let mut op = shift(n);
        for j in 0..n {
            op.columns[j].push((j, Complex64::new(1.0, 0.0)));
            if j > 0 {
                op.columns[j].push((j - 1, Complex64::new(1.0, 0.0)));
            }
        }
        let exact = 1.0 + 2.0 * (std::f64::consts::PI / (n as f64 + 1.0)).cos();
        let est = op.norm();
        assert!(matches!(est.method, NormMethod::Lanczos { .. }));
        assert!(est.value <= exact + 1e-12);
        assert!((exact - est.value) / exact < 5e-5, "{} vs {exact}", est.value);
        let dense = operator_norm(&op.to_dense());
        assert!((dense - exact).abs() < 1e-10);
    }

    #[test]
    fn sturm_bisection_matches_dense_eigenvalues() {
        let (alpha, beta) = (vec![2.0, -1.0, 0.5, 3.0], vec![1.0, 0.3, -2.0]);
        let mut t = DMatrix::<f64>::zeros(4, 4);
        for i in 0..4 {
            t[(i, i)] = alpha[i];
            if i < 3 {
                t[(i, i + 1)] = beta[i];
                t[(i + 1, i)] = beta[i];
            }
        }
        let top = nalgebra::SymmetricEigen::new(t).eigenvalues.max();
        assert!((top_ritz(&alpha, &beta) - top).abs() < 1e-13);
    }

    #[test]
    fn truncated_shift_has_norm_one() {
        assert!((shift(50).norm().value - 1.0).abs() < 1e-12);
        assert_eq!(operator_norm(&DMatrix::zeros(0, 0)), 0.0);
    }
}
