use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use serde_json::{json, Value};

use super::{json_complex, AlgebraError, StarAlgebra};
use crate::linalg::Matrix;
use crate::numfmt::scalar_to_json;
use crate::prequant::Bicharacter;
use crate::scalar::Scalar;

/// Default bound on `max_i |m_i|` over the support of any product.
pub const DEFAULT_SUPPORT_CAP: i64 = 32;

/// `C*(ℤ^d, σ)` with `σ(m, n) = exp(iπ mᵀBn)`, `B` antisymmetric.
///
/// With rational `B` the exponent is reduced modulo 2 before any rounding,
/// so equal phases are bitwise equal.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeAlgebra<S: Scalar> {
    b: Matrix<S>,
    cap: i64,
}

fn bilinear<S: Scalar>(b: &Matrix<S>, m: &[i64], n: &[i64]) -> S {
    let mut acc = S::zero();
    for (i, &mi) in m.iter().enumerate() {
        for (j, &nj) in n.iter().enumerate() {
            if mi != 0 && nj != 0 {
                acc = acc + b[(i, j)].clone() * S::from_int(mi * nj);
            }
        }
    }
    acc
}

impl<S: Scalar> LatticeAlgebra<S> {
    pub fn new(b: Matrix<S>) -> Result<Arc<Self>, AlgebraError> {
        Self::with_cap(b, DEFAULT_SUPPORT_CAP)
    }

    pub fn with_cap(b: Matrix<S>, cap: i64) -> Result<Arc<Self>, AlgebraError> {
        if b.rows() != b.cols() {
            return Err(AlgebraError::DimensionMismatch {
                expected: b.rows(),
                found: b.cols(),
            });
        }
        if !(&b + &b.transpose()).is_zero(0.0) {
            return Err(AlgebraError::NotAntisymmetric);
        }
        Ok(Arc::new(LatticeAlgebra { b, cap }))
    }

    pub fn untwisted(d: usize) -> Arc<Self> {
        Arc::new(LatticeAlgebra {
            b: Matrix::zeros(d, d),
            cap: DEFAULT_SUPPORT_CAP,
        })
    }

    /// The noncommutative torus: `B = [[0, −ℏ], [ℏ, 0]]`, so that
    /// `δ_{(1,0)} * δ_{(0,1)} = e^{−iπℏ} δ_{(1,1)}`.
    pub fn torus(hbar: S) -> Arc<Self> {
        let mut b = Matrix::zeros(2, 2);
        b[(0, 1)] = -hbar.clone();
        b[(1, 0)] = hbar;
        Arc::new(LatticeAlgebra {
            b,
            cap: DEFAULT_SUPPORT_CAP,
        })
    }

    /// From an antisymmetric bicharacter in turn units (`B = 2Φ`), or in
    /// radians for inexact scalars (`B = Φ/π`).
    pub fn from_bicharacter(sigma: &Bicharacter<S>) -> Result<Arc<Self>, AlgebraError> {
        if !sigma.is_antisymmetric() {
            return Err(AlgebraError::NotAntisymmetric);
        }
        match (sigma.half_turn_matrix(), S::EXACT) {
            (Some(b), _) => Self::new(b),
            (None, false) => Self::new(sigma.phi.map(|x| S::from_f64(x.approx() / PI).expect("finite"))),
            (None, true) => Err(AlgebraError::Unsupported(
                "an exact bicharacter in radians has no exact half-turn matrix".into(),
            )),
        }
    }

    pub fn dim(&self) -> usize {
        self.b.rows()
    }

    pub fn b(&self) -> &Matrix<S> {
        &self.b
    }

    pub fn cap(&self) -> i64 {
        self.cap
    }

    /// `mᵀBn mod 2`.
    pub fn exponent(&self, m: &[i64], n: &[i64]) -> S {
        bilinear(&self.b, m, n).rem_euclid_int(2)
    }

    pub fn sigma(&self, m: &[i64], n: &[i64]) -> Complex64 {
        let e = self.exponent(m, n);
        if e.is_zero() {
            return Complex64::new(1.0, 0.0);
        }
        Complex64::from_polar(1.0, PI * e.approx())
    }

    /// Exponent `t` (mod 1) with `δ_m δ_n = e^{2πit} δ_n δ_m`.
    pub fn commutator_turns(&self, m: &[i64], n: &[i64]) -> S {
        ((bilinear(&self.b, m, n) - bilinear(&self.b, n, m)) * S::half()).rem_euclid_int(1)
    }

    pub fn delta(self: &Arc<Self>, m: Vec<i64>) -> LatticeElement<S> {
        LatticeElement::from_terms(self, [(m, Complex64::new(1.0, 0.0))])
    }

    pub fn unit(self: &Arc<Self>) -> LatticeElement<S> {
        self.delta(vec![0; self.dim()])
    }
}

/// Finitely supported function on `ℤ^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeElement<S: Scalar> {
    algebra: Arc<LatticeAlgebra<S>>,
    coeffs: BTreeMap<Vec<i64>, Complex64>,
}

impl<S: Scalar> LatticeElement<S> {
    pub fn zero(algebra: &Arc<LatticeAlgebra<S>>) -> Self {
        LatticeElement {
            algebra: Arc::clone(algebra),
            coeffs: BTreeMap::new(),
        }
    }

    pub fn from_terms(algebra: &Arc<LatticeAlgebra<S>>, terms: impl IntoIterator<Item = (Vec<i64>, Complex64)>) -> Self {
        let mut e = Self::zero(algebra);
        for (m, c) in terms {
            assert_eq!(m.len(), algebra.dim(), "lattice point dimension");
            *e.coeffs.entry(m).or_insert(Complex64::new(0.0, 0.0)) += c;
        }
        e
    }

    pub fn algebra(&self) -> &Arc<LatticeAlgebra<S>> {
        &self.algebra
    }

    pub fn coefficient(&self, m: &[i64]) -> Complex64 {
        self.coeffs.get(m).copied().unwrap_or_default()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<i64>, &Complex64)> {
        self.coeffs.iter()
    }

    pub fn support_radius(&self) -> i64 {
        self.coeffs
            .iter()
            .filter(|(_, c)| **c != Complex64::new(0.0, 0.0))
            .flat_map(|(m, _)| m.iter().map(|v| v.abs()))
            .max()
            .unwrap_or(0)
    }

    fn same_algebra(&self, other: &Self) -> Result<(), AlgebraError> {
        if Arc::ptr_eq(&self.algebra, &other.algebra) || self.algebra.b == other.algebra.b {
            Ok(())
        } else {
            Err(AlgebraError::MismatchedAlgebra)
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self, AlgebraError> {
        self.same_algebra(other)?;
        Ok(Self::from_terms(
            &self.algebra,
            self.coeffs.iter().chain(&other.coeffs).map(|(m, c)| (m.clone(), *c)),
        ))
    }

    pub fn sub(&self, other: &Self) -> Result<Self, AlgebraError> {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    pub fn scale(&self, k: Complex64) -> Self {
        Self::from_terms(&self.algebra, self.coeffs.iter().map(|(m, c)| (m.clone(), c * k)))
    }

    /// `max_m |a(m) − b(m)|`.
    pub fn distance(&self, other: &Self) -> f64 {
        self.coeffs
            .keys()
            .chain(other.coeffs.keys())
            .map(|m| (self.coefficient(m) - other.coefficient(m)).norm())
            .fold(0.0, f64::max)
    }

    /// `ℓ¹` norm of the coefficients, an upper bound for every C*-norm.
    pub fn l1_norm(&self) -> f64 {
        self.coeffs.values().map(|c| c.norm()).sum()
    }

    /// `(a*b)(m) = Σ_n σ(n, m − n) a(n) b(m − n)`.
    pub fn convolve(&self, other: &Self) -> Result<Self, AlgebraError> {
        self.same_algebra(other)?;
        let mut out: BTreeMap<Vec<i64>, Complex64> = BTreeMap::new();
        for (n, x) in &self.coeffs {
            for (k, y) in &other.coeffs {
                let m: Vec<i64> = n.iter().zip(k).map(|(a, b)| a + b).collect();
                *out.entry(m).or_insert(Complex64::new(0.0, 0.0)) += self.algebra.sigma(n, k) * x * y;
            }
        }
        let e = LatticeElement {
            algebra: Arc::clone(&self.algebra),
            coeffs: out,
        };
        let r = e.support_radius();
        if r > self.algebra.cap {
            return Err(AlgebraError::SupportCapExceeded {
                radius: r,
                cap: self.algebra.cap,
            });
        }
        Ok(e)
    }

    pub fn commutator(&self, other: &Self) -> Result<Self, AlgebraError> {
        self.convolve(other)?.sub(&other.convolve(self)?)
    }

    /// `a*(m) = conj(a(−m))`: `σ(m, −m) = 1` for antisymmetric `B`, so each
    /// `δ_m` is unitary with inverse `δ_{−m}`.
    pub fn adjoint(&self) -> Self {
        Self::from_terms(
            &self.algebra,
            self.coeffs.iter().map(|(m, c)| (m.iter().map(|v| -v).collect(), c.conj())),
        )
    }

    pub fn to_json(&self) -> Value {
        let b: Vec<Vec<Value>> = (0..self.algebra.dim())
            .map(|i| (0..self.algebra.dim()).map(|j| scalar_to_json(&self.algebra.b[(i, j)])).collect())
            .collect();
        let support: Vec<Value> = self
            .coeffs
            .iter()
            .map(|(m, c)| {
                let [re, im] = json_complex(*c);
                json!([m, re, im])
            })
            .collect();
        json!({"kind": "lattice", "B": b, "support": support})
    }
}

impl<S: Scalar> StarAlgebra for LatticeElement<S> {
    fn mul(&self, other: &Self) -> Result<Self, AlgebraError> {
        self.convolve(other)
    }

    fn star(&self) -> Self {
        self.adjoint()
    }

    fn is_zero(&self) -> bool {
        self.coeffs.values().all(|c| *c == Complex64::new(0.0, 0.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prequant::PhaseScale;
    use crate::scalar::Rational;

    #[test]
    fn torus_relation_is_exact() {
        for (p, q) in [(1, 2), (1, 3), (2, 5), (3, 7)] {
            let alg = LatticeAlgebra::torus(Rational::from_ratio(p, q));
            let uv = alg.delta(vec![1, 0]).convolve(&alg.delta(vec![0, 1])).unwrap();
            let vu = alg.delta(vec![0, 1]).convolve(&alg.delta(vec![1, 0])).unwrap();
            let hbar = p as f64 / q as f64;
            let c1 = uv.coefficient(&[1, 1]);
            let c2 = vu.coefficient(&[1, 1]);
            assert!((c1 - Complex64::from_polar(1.0, -PI * hbar)).norm() < 1e-15);
            assert!((c2 - Complex64::from_polar(1.0, PI * hbar)).norm() < 1e-15);
            assert_eq!(
                alg.commutator_turns(&[1, 0], &[0, 1]),
                (-Rational::from_ratio(p, q)).rem_euclid_int(1)
            );
        }
    }

    #[test]
    fn untwisted_deltas_add() {
        let alg = LatticeAlgebra::<Rational>::untwisted(3);
        let p = alg.delta(vec![1, -2, 0]).convolve(&alg.delta(vec![4, 1, 1])).unwrap();
        assert_eq!(p, alg.delta(vec![5, -1, 1]));
    }

    #[test]
    fn deltas_are_unitary() {
        let alg = LatticeAlgebra::torus(0.377_f64);
        let a = alg.delta(vec![3, -2]);
        assert!(a.adjoint().convolve(&a).unwrap().distance(&alg.unit()) < 1e-15);
    }

    #[test]
    fn symmetric_matrix_is_rejected() {
        let b = Matrix::from_rows(vec![vec![0.0, 1.0], vec![1.0, 0.0]]);
        assert_eq!(LatticeAlgebra::new(b), Err(AlgebraError::NotAntisymmetric));
    }

    #[test]
    fn cap_is_a_hard_error() {
        let b = Matrix::<f64>::zeros(1, 1);
        let alg = LatticeAlgebra::with_cap(b, 4).unwrap();
        let a = alg.delta(vec![3]);
        assert!(matches!(a.convolve(&a), Err(AlgebraError::SupportCapExceeded { radius: 6, cap: 4 })));
    }

    #[test]
    fn from_torus_bicharacter() {
        let mut phi = Matrix::zeros(2, 2);
        phi[(0, 1)] = Rational::from_ratio(-1, 6);
        phi[(1, 0)] = Rational::from_ratio(1, 6);
        let alg = LatticeAlgebra::from_bicharacter(&Bicharacter::new(phi, PhaseScale::Turns)).unwrap();
        assert_eq!(alg.b()[(1, 0)], Rational::from_ratio(1, 3));
        let v = alg.unit().to_json();
        assert_eq!(v["B"][0][1], "-1/3");
    }
}
