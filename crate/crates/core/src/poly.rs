//! Sparse multivariate polynomials and polynomial differential forms.
//!
//! Coefficients are generic [`Scalar`]s so the same code computes exact
//! rational identities and quick floating-point evaluations.

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use crate::linalg::Matrix;
use crate::scalar::Scalar;

/// Exponent vector of a monomial.
pub type Exponents = Vec<u32>;

/// Polynomial in `nvars` commuting variables, stored as a sparse map from
/// exponent vectors to nonzero coefficients.
#[derive(Clone, PartialEq)]
pub struct Polynomial<S> {
    nvars: usize,
    terms: BTreeMap<Exponents, S>,
}

impl<S: Scalar> Polynomial<S> {
    pub fn zero(nvars: usize) -> Self {
        Polynomial {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(nvars: usize, c: S) -> Self {
        Self::monomial(vec![0; nvars], c)
    }

    /// The coordinate function `z_i`.
    pub fn var(nvars: usize, i: usize) -> Self {
        let mut e = vec![0; nvars];
        e[i] = 1;
        Self::monomial(e, S::one())
    }

    pub fn monomial(exponents: Exponents, c: S) -> Self {
        let mut p = Self::zero(exponents.len());
        p.add_term(exponents, c);
        p
    }

    /// Collect `(exponents, coefficient)` pairs; repeated monomials are summed.
    pub fn from_terms(nvars: usize, terms: impl IntoIterator<Item = (Exponents, S)>) -> Self {
        let mut p = Self::zero(nvars);
        for (e, c) in terms {
            assert_eq!(e.len(), nvars, "exponent vector length mismatch");
            p.add_term(e, c);
        }
        p
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exponents, &S)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, exponents: &[u32]) -> S {
        self.terms.get(exponents).cloned().unwrap_or_else(S::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Zero up to `tol` on every coefficient (exact for rationals).
    pub fn is_negligible(&self, tol: f64) -> bool {
        self.terms.values().all(|c| c.is_negligible(tol))
    }

    pub fn max_abs_coefficient(&self) -> f64 {
        self.terms.values().map(|c| c.approx().abs()).fold(0.0, f64::max)
    }

    /// Total degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(|e| e.iter().sum()).max()
    }

    /// Highest combined degree in the listed variables.
    pub fn degree_in(&self, vars: &[usize]) -> Option<u32> {
        self.terms
            .keys()
            .map(|e| vars.iter().map(|&v| e[v]).sum())
            .max()
    }

    pub fn add_term(&mut self, exponents: Exponents, c: S) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(exponents) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                let sum = o.get().clone() + c;
                if sum.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = sum;
                }
            }
        }
    }

    pub fn scale(&self, k: &S) -> Self {
        if k.is_zero() {
            return Self::zero(self.nvars);
        }
        Polynomial {
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .map(|(e, c)| (e.clone(), c.clone() * k.clone()))
                .collect(),
        }
    }

    pub fn derivative(&self, var: usize) -> Self {
        let mut out = Self::zero(self.nvars);
        for (e, c) in &self.terms {
            if e[var] > 0 {
                let mut e2 = e.clone();
                e2[var] -= 1;
                out.add_term(e2, c.clone() * S::from_int(e[var] as i64));
            }
        }
        out
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut acc = Self::constant(self.nvars, S::one());
        for _ in 0..n {
            acc = &acc * self;
        }
        acc
    }

    pub fn eval(&self, point: &[S]) -> S {
        self.terms.iter().fold(S::zero(), |acc, (e, c)| {
            let mut m = c.clone();
            for (x, &k) in point.iter().zip(e) {
                for _ in 0..k {
                    m = m * x.clone();
                }
            }
            acc + m
        })
    }

    pub fn eval_f64(&self, point: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(e, c)| {
                c.approx()
                    * point
                        .iter()
                        .zip(e)
                        .map(|(x, &k)| x.powi(k as i32))
                        .product::<f64>()
            })
            .sum()
    }

    /// Substitute `z_i ↦ Σ_j A_ij w_j`, producing a polynomial in `A.cols()` variables.
    pub fn pullback_linear(&self, a: &Matrix<S>) -> Self {
        self.pullback_affine(a, &vec![S::zero(); a.rows()])
    }

    /// Substitute `z_i ↦ Σ_j A_ij w_j + b_i`.
    pub fn pullback_affine(&self, a: &Matrix<S>, b: &[S]) -> Self {
        assert_eq!(a.rows(), self.nvars, "pullback dimension mismatch");
        assert_eq!(b.len(), self.nvars, "offset dimension mismatch");
        let n = a.cols();
        let images: Vec<Polynomial<S>> = (0..self.nvars)
            .map(|i| {
                let mut img = Polynomial::constant(n, b[i].clone());
                for j in 0..n {
                    let mut e = vec![0; n];
                    e[j] = 1;
                    img.add_term(e, a[(i, j)].clone());
                }
                img
            })
            .collect();
        let mut out = Self::zero(n);
        for (e, c) in &self.terms {
            let mut m = Self::constant(n, c.clone());
            for (img, &k) in images.iter().zip(e) {
                if k > 0 {
                    m = &m * &img.pow(k);
                }
            }
            out = &out + &m;
        }
        out
    }

    /// Same polynomial with `f64` coefficients.
    pub fn to_f64(&self) -> Polynomial<f64> {
        Polynomial::from_terms(self.nvars, self.terms.iter().map(|(e, c)| (e.clone(), c.approx())))
    }

    /// Reinterpret in a larger variable set via an index map `old var i ↦ new var map[i]`.
    pub fn embed(&self, nvars: usize, map: &[usize]) -> Self {
        Polynomial::from_terms(
            nvars,
            self.terms.iter().map(|(e, c)| {
                let mut e2 = vec![0; nvars];
                for (i, &k) in e.iter().enumerate() {
                    e2[map[i]] += k;
                }
                (e2, c.clone())
            }),
        )
    }

    /// Variables actually appearing in some monomial.
    pub fn support_vars(&self) -> Vec<usize> {
        (0..self.nvars)
            .filter(|&v| self.terms.keys().any(|e| e[v] > 0))
            .collect()
    }
}

impl<'a, S: Scalar> Add for &'a Polynomial<S> {
    type Output = Polynomial<S>;
    fn add(self, rhs: &Polynomial<S>) -> Polynomial<S> {
        assert_eq!(self.nvars, rhs.nvars, "variable count mismatch");
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(e.clone(), c.clone());
        }
        out
    }
}

impl<'a, S: Scalar> Sub for &'a Polynomial<S> {
    type Output = Polynomial<S>;
    fn sub(self, rhs: &Polynomial<S>) -> Polynomial<S> {
        self + &(-rhs)
    }
}

impl<'a, S: Scalar> Neg for &'a Polynomial<S> {
    type Output = Polynomial<S>;
    fn neg(self) -> Polynomial<S> {
        self.scale(&-S::one())
    }
}

impl<'a, S: Scalar> Mul for &'a Polynomial<S> {
    type Output = Polynomial<S>;
    fn mul(self, rhs: &Polynomial<S>) -> Polynomial<S> {
        assert_eq!(self.nvars, rhs.nvars, "variable count mismatch");
        let mut out = Polynomial::zero(self.nvars);
        for (e1, c1) in &self.terms {
            for (e2, c2) in &rhs.terms {
                let e: Exponents = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                out.add_term(e, c1.clone() * c2.clone());
            }
        }
        out
    }
}

impl<S: Scalar> fmt::Debug for Polynomial<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl<S: Scalar> fmt::Display for Polynomial<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, (e, c)) in self.terms.iter().enumerate() {
            if k > 0 {
                write!(f, " + ")?;
            }
            write!(f, "({c})")?;
            for (v, &p) in e.iter().enumerate() {
                match p {
                    0 => {}
                    1 => write!(f, "·z{v}")?,
                    _ => write!(f, "·z{v}^{p}")?,
                }
            }
        }
        Ok(())
    }
}

/// A 1-form `Σ α_k dz^k` with polynomial coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct OneForm<S: Scalar> {
    pub coeffs: Vec<Polynomial<S>>,
}

/// A 2-form `Σ_{i<j} β_ij dz^i ∧ dz^j` with polynomial coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct TwoForm<S: Scalar> {
    nvars: usize,
    coeffs: BTreeMap<(usize, usize), Polynomial<S>>,
}

impl<S: Scalar> OneForm<S> {
    pub fn zero(nvars: usize) -> Self {
        OneForm {
            coeffs: vec![Polynomial::zero(nvars); nvars],
        }
    }

    pub fn nvars(&self) -> usize {
        self.coeffs.len()
    }

    /// Exterior derivative of a function.
    pub fn exact(f: &Polynomial<S>) -> Self {
        OneForm {
            coeffs: (0..f.nvars()).map(|k| f.derivative(k)).collect(),
        }
    }

    pub fn d(&self) -> TwoForm<S> {
        let n = self.nvars();
        let mut out = TwoForm::zero(n);
        for i in 0..n {
            for j in i + 1..n {
                let c = &self.coeffs[j].derivative(i) - &self.coeffs[i].derivative(j);
                out.set(i, j, c);
            }
        }
        out
    }

    /// Pullback along the linear map `w ↦ A w`.
    pub fn pullback_linear(&self, a: &Matrix<S>) -> Self {
        let n = a.cols();
        let moved: Vec<Polynomial<S>> = self.coeffs.iter().map(|c| c.pullback_linear(a)).collect();
        OneForm {
            coeffs: (0..n)
                .map(|k| {
                    moved.iter().enumerate().fold(Polynomial::zero(n), |acc, (j, c)| {
                        &acc + &c.scale(&a[(j, k)])
                    })
                })
                .collect(),
        }
    }

    /// Evaluate on a constant vector field.
    pub fn contract(&self, v: &[S]) -> Polynomial<S> {
        self.coeffs
            .iter()
            .zip(v)
            .fold(Polynomial::zero(self.nvars()), |acc, (c, x)| &acc + &c.scale(x))
    }

    pub fn eval_f64(&self, point: &[f64]) -> Vec<f64> {
        self.coeffs.iter().map(|c| c.eval_f64(point)).collect()
    }

    pub fn to_f64(&self) -> OneForm<f64> {
        OneForm {
            coeffs: self.coeffs.iter().map(Polynomial::to_f64).collect(),
        }
    }

    pub fn is_negligible(&self, tol: f64) -> bool {
        self.coeffs.iter().all(|c| c.is_negligible(tol))
    }

    pub fn max_abs_coefficient(&self) -> f64 {
        self.coeffs.iter().map(Polynomial::max_abs_coefficient).fold(0.0, f64::max)
    }

    /// A primitive `f` with `df = self` and `f(0) = 0`, via the radial homotopy
    /// operator. Only meaningful when `self` is closed.
    pub fn radial_primitive(&self) -> Polynomial<S> {
        let n = self.nvars();
        let mut f = Polynomial::zero(n);
        for (k, c) in self.coeffs.iter().enumerate() {
            for (e, coef) in c.terms() {
                let deg: u32 = e.iter().sum();
                let mut e2 = e.clone();
                e2[k] += 1;
                f.add_term(e2, coef.clone() / S::from_int(deg as i64 + 1));
            }
        }
        f
    }
}

impl<'a, S: Scalar> Add for &'a OneForm<S> {
    type Output = OneForm<S>;
    fn add(self, rhs: &OneForm<S>) -> OneForm<S> {
        OneForm {
            coeffs: self.coeffs.iter().zip(&rhs.coeffs).map(|(a, b)| a + b).collect(),
        }
    }
}

impl<'a, S: Scalar> Sub for &'a OneForm<S> {
    type Output = OneForm<S>;
    fn sub(self, rhs: &OneForm<S>) -> OneForm<S> {
        OneForm {
            coeffs: self.coeffs.iter().zip(&rhs.coeffs).map(|(a, b)| a - b).collect(),
        }
    }
}

impl<S: Scalar> TwoForm<S> {
    pub fn zero(nvars: usize) -> Self {
        TwoForm {
            nvars,
            coeffs: BTreeMap::new(),
        }
    }

    /// Constant 2-form from an antisymmetric matrix `β(u,v) = uᵀ M v`.
    pub fn from_matrix(m: &Matrix<S>) -> Self {
        let n = m.rows();
        let mut out = Self::zero(n);
        for i in 0..n {
            for j in i + 1..n {
                out.set(i, j, Polynomial::constant(n, m[(i, j)].clone()));
            }
        }
        out
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    /// Coefficient of `dz^i ∧ dz^j` (antisymmetric in `i, j`).
    pub fn get(&self, i: usize, j: usize) -> Polynomial<S> {
        match i.cmp(&j) {
            std::cmp::Ordering::Less => self
                .coeffs
                .get(&(i, j))
                .cloned()
                .unwrap_or_else(|| Polynomial::zero(self.nvars)),
            std::cmp::Ordering::Greater => -&self.get(j, i),
            std::cmp::Ordering::Equal => Polynomial::zero(self.nvars),
        }
    }

    pub fn set(&mut self, i: usize, j: usize, c: Polynomial<S>) {
        assert!(i < j);
        if c.is_zero() {
            self.coeffs.remove(&(i, j));
        } else {
            self.coeffs.insert((i, j), c);
        }
    }

    pub fn components(&self) -> impl Iterator<Item = (&(usize, usize), &Polynomial<S>)> {
        self.coeffs.iter()
    }

    pub fn pullback_linear(&self, a: &Matrix<S>) -> Self {
        let n = a.cols();
        let moved: BTreeMap<(usize, usize), Polynomial<S>> = self
            .coeffs
            .iter()
            .map(|(&k, c)| (k, c.pullback_linear(a)))
            .collect();
        let mut out = Self::zero(n);
        for k in 0..n {
            for l in k + 1..n {
                let mut acc = Polynomial::zero(n);
                for (&(i, j), c) in &moved {
                    let w = a[(i, k)].clone() * a[(j, l)].clone() - a[(j, k)].clone() * a[(i, l)].clone();
                    acc = &acc + &c.scale(&w);
                }
                out.set(k, l, acc);
            }
        }
        out
    }

    pub fn is_negligible(&self, tol: f64) -> bool {
        self.coeffs.values().all(|c| c.is_negligible(tol))
    }

    pub fn max_abs_coefficient(&self) -> f64 {
        self.coeffs.values().map(Polynomial::max_abs_coefficient).fold(0.0, f64::max)
    }
}

impl<'a, S: Scalar> Add for &'a TwoForm<S> {
    type Output = TwoForm<S>;
    fn add(self, rhs: &TwoForm<S>) -> TwoForm<S> {
        let mut out = self.clone();
        for (&(i, j), c) in &rhs.coeffs {
            let sum = &out.get(i, j) + c;
            out.set(i, j, sum);
        }
        out
    }
}

impl<'a, S: Scalar> Neg for &'a TwoForm<S> {
    type Output = TwoForm<S>;
    fn neg(self) -> TwoForm<S> {
        TwoForm {
            nvars: self.nvars,
            coeffs: self.coeffs.iter().map(|(&k, c)| (k, -c)).collect(),
        }
    }
}

impl<'a, S: Scalar> Sub for &'a TwoForm<S> {
    type Output = TwoForm<S>;
    fn sub(self, rhs: &TwoForm<S>) -> TwoForm<S> {
        self + &(-rhs)
    }
}
