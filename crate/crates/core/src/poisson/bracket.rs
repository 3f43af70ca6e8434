use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;

use super::{PoissonError, PoissonStructure, PolynomialPoisson};
use crate::poly::Polynomial;
use crate::scalar::Scalar;

/// `{f, g} = Σ_{ij} π^{ij} ∂_i f ∂_j g` with exact coefficient arithmetic.
pub fn bracket<S: Scalar>(p: &PolynomialPoisson<S>, f: &Polynomial<S>, g: &Polynomial<S>) -> Polynomial<S> {
    let d = p.dim();
    let mut out = Polynomial::zero(d);
    for (&(i, j), pij) in p.components() {
        let a = &f.derivative(i) * &g.derivative(j);
        let b = &f.derivative(j) * &g.derivative(i);
        out = &out + &(pij * &(&a - &b));
    }
    out
}

/// Trigonometric polynomial `f = Σ f̂(m) e^{2πi m·x}` on `ℝ^d/ℤ^d`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrigPolynomial {
    dim: usize,
    coeffs: BTreeMap<Vec<i64>, Complex64>,
}

impl TrigPolynomial {
    pub fn zero(dim: usize) -> Self {
        TrigPolynomial {
            dim,
            coeffs: BTreeMap::new(),
        }
    }

    pub fn monomial(m: Vec<i64>, c: Complex64) -> Self {
        let mut f = Self::zero(m.len());
        f.add_term(m, c);
        f
    }

    pub fn from_terms(dim: usize, terms: impl IntoIterator<Item = (Vec<i64>, Complex64)>) -> Self {
        let mut f = Self::zero(dim);
        for (m, c) in terms {
            f.add_term(m, c);
        }
        f
    }

    /// `cos(2π m·x)`.
    pub fn cosine(m: Vec<i64>) -> Self {
        let neg = m.iter().map(|v| -v).collect();
        let h = Complex64::new(0.5, 0.0);
        Self::from_terms(m.len(), [(m, h), (neg, h)])
    }

    pub fn add_term(&mut self, m: Vec<i64>, c: Complex64) {
        assert_eq!(m.len(), self.dim, "wave vector dimension");
        let v = self.coeffs.entry(m.clone()).or_insert(Complex64::new(0.0, 0.0));
        *v += c;
        if *v == Complex64::new(0.0, 0.0) {
            self.coeffs.remove(&m);
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<i64>, &Complex64)> {
        self.coeffs.iter()
    }

    pub fn coefficient(&self, m: &[i64]) -> Complex64 {
        self.coeffs.get(m).copied().unwrap_or_default()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Largest `|m_i|` in the support.
    pub fn support_radius(&self) -> i64 {
        self.coeffs.keys().flatten().map(|v| v.abs()).max().unwrap_or(0)
    }

    pub fn l1_norm(&self) -> f64 {
        self.coeffs.values().map(|c| c.norm()).sum()
    }

    pub fn scale(&self, k: Complex64) -> Self {
        Self::from_terms(self.dim, self.coeffs.iter().map(|(m, c)| (m.clone(), c * k)))
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (m, c) in &other.coeffs {
            out.add_term(m.clone(), *c);
        }
        out
    }

    /// Pointwise complex conjugate: `f̂(m) ↦ conj f̂(−m)`.
    pub fn conj(&self) -> Self {
        Self::from_terms(
            self.dim,
            self.coeffs.iter().map(|(m, c)| (m.iter().map(|v| -v).collect(), c.conj())),
        )
    }

    pub fn is_real(&self, tol: f64) -> bool {
        let c = self.conj();
        self.coeffs.keys().chain(c.coeffs.keys()).all(|m| (self.coefficient(m) - c.coefficient(m)).norm() <= tol)
    }

    pub fn eval(&self, x: &[f64]) -> Complex64 {
        self.coeffs
            .iter()
            .map(|(m, c)| {
                let phase: f64 = m.iter().zip(x).map(|(&mi, xi)| mi as f64 * xi).sum();
                c * Complex64::from_polar(1.0, 2.0 * PI * phase)
            })
            .sum()
    }

    /// Bracket for a constant bivector: `{e_m, e_n} = −4π² (mᵀπn) e_{m+n}`.
    pub fn bracket(&self, other: &Self, pi: &[Vec<f64>]) -> Self {
        let mut out = Self::zero(self.dim);
        for (m, a) in &self.coeffs {
            for (n, b) in &other.coeffs {
                let mut mpn = 0.0;
                for (i, row) in pi.iter().enumerate() {
                    for (j, pij) in row.iter().enumerate() {
                        mpn += m[i] as f64 * pij * n[j] as f64;
                    }
                }
                if mpn != 0.0 {
                    let sum = m.iter().zip(n).map(|(x, y)| x + y).collect();
                    out.add_term(sum, a * b * (-4.0 * PI * PI * mpn));
                }
            }
        }
        out
    }
}

/// A function in one of the supported classes.
#[derive(Debug, Clone, PartialEq)]
pub enum Observable<S: Scalar> {
    Polynomial(Polynomial<S>),
    Trig(TrigPolynomial),
}

impl<S: Scalar> Observable<S> {
    fn class(&self) -> &'static str {
        match self {
            Observable::Polynomial(_) => "polynomial",
            Observable::Trig(_) => "trigonometric polynomial",
        }
    }
}

/// Bracket of two functions of the same class. Trigonometric polynomials
/// require a constant bivector so the result stays trigonometric.
pub fn poisson_bracket<S: Scalar>(
    p: &PoissonStructure<S>,
    f: &Observable<S>,
    g: &Observable<S>,
) -> Result<Observable<S>, PoissonError> {
    match (f, g) {
        (Observable::Polynomial(f), Observable::Polynomial(g)) => {
            if f.nvars() != p.dim() || g.nvars() != p.dim() {
                return Err(PoissonError::DimensionMismatch("function variables vs bivector".into()));
            }
            Ok(Observable::Polynomial(bracket(&p.to_polynomial(), f, g)))
        }
        (Observable::Trig(f), Observable::Trig(g)) => {
            if f.dim() != p.dim() || g.dim() != p.dim() {
                return Err(PoissonError::DimensionMismatch("wave vectors vs bivector".into()));
            }
            let c = p
                .as_constant()
                .ok_or_else(|| PoissonError::Unsupported("trigonometric bracket needs a constant bivector".into()))?;
            let m = c.matrix();
            let pi: Vec<Vec<f64>> = (0..m.rows()).map(|i| m.row(i).iter().map(Scalar::approx).collect()).collect();
            Ok(Observable::Trig(f.bracket(g, &pi)))
        }
        (f, g) => Err(PoissonError::MixedClasses(f.class(), g.class())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poisson::{ConstantPoisson, LinearPoisson};
    use crate::scalar::Rational;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    fn q(n: i64) -> Rational {
        Rational::from_int(n)
    }

    #[test]
    fn coordinate_bracket_is_pi() {
        let p = ConstantPoisson::planar(q(1)).to_polynomial();
        let b = bracket(&p, &Polynomial::var(2, 0), &Polynomial::var(2, 1));
        assert_eq!(b, Polynomial::constant(2, q(1)));
    }

    #[test]
    fn closure_on_linear_functions() {
        let su2 = LinearPoisson::su2(q(1)).to_polynomial();
        for i in 0..3 {
            for j in 0..3 {
                let b = bracket(&su2, &Polynomial::var(3, i), &Polynomial::var(3, j));
                assert!(b.degree().map_or(true, |d| d == 1));
                assert!(b.terms().all(|(e, _)| e.iter().sum::<u32>() == 1));
            }
        }
        let c = ConstantPoisson::planar(q(3)).to_polynomial();
        let lin = &Polynomial::var(2, 0).scale(&q(2)) + &Polynomial::var(2, 1);
        let lin2 = &Polynomial::var(2, 0) - &Polynomial::var(2, 1);
        assert_eq!(bracket(&c, &lin, &lin2).degree(), Some(0));
    }

    #[test]
    fn torus_monomials_closed_form() {
        let p = ConstantPoisson::planar(1.0 / (2.0 * PI));
        let ps = PoissonStructure::Constant(p);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..10 {
            let m = vec![rng.gen_range(-3..=3), rng.gen_range(-3..=3)];
            let n = vec![rng.gen_range(-3..=3), rng.gen_range(-3..=3)];
            let kappa = (m[0] * n[1] - m[1] * n[0]) as f64;
            let f = TrigPolynomial::monomial(m.clone(), Complex64::new(1.0, 0.0));
            let g = TrigPolynomial::monomial(n.clone(), Complex64::new(1.0, 0.0));
            let Observable::Trig(b) = poisson_bracket(&ps, &Observable::Trig(f.clone()), &Observable::Trig(g.clone())).unwrap() else {
                panic!("trig result expected");
            };
            let sum: Vec<i64> = m.iter().zip(&n).map(|(a, b)| a + b).collect();
            assert!((b.coefficient(&sum) - Complex64::new(-2.0 * PI * kappa, 0.0)).norm() < 1e-12);
            // finite-difference oracle at random points
            let h = 1e-5;
            let pij = 1.0 / (2.0 * PI);
            for _ in 0..10 {
                let x = [rng.gen::<f64>(), rng.gen::<f64>()];
                let grad = |u: &TrigPolynomial, i: usize| {
                    let mut xp = x;
                    let mut xm = x;
                    xp[i] += h;
                    xm[i] -= h;
                    (u.eval(&xp) - u.eval(&xm)) / (2.0 * h)
                };
                let fd = (grad(&f, 0) * grad(&g, 1) - grad(&f, 1) * grad(&g, 0)) * pij;
                assert!((fd - b.eval(&x)).norm() < 1e-6 * (1.0 + fd.norm()), "{fd} vs {}", b.eval(&x));
            }
        }
    }

    #[test]
    fn mixed_classes_are_rejected() {
        let ps = PoissonStructure::Constant(ConstantPoisson::planar(1.0));
        let r = poisson_bracket(
            &ps,
            &Observable::Polynomial(Polynomial::var(2, 0)),
            &Observable::Trig(TrigPolynomial::zero(2)),
        );
        assert!(matches!(r, Err(PoissonError::MixedClasses(..))));
        let lin = PoissonStructure::Linear(LinearPoisson::su2(1.0));
        let t = Observable::Trig(TrigPolynomial::zero(3));
        assert!(matches!(poisson_bracket(&lin, &t, &t), Err(PoissonError::Unsupported(_))));
    }

    fn arb_poly() -> impl Strategy<Value = Polynomial<Rational>> {
        prop::collection::vec((prop::collection::vec(0u32..3, 3), -5i64..=5), 1..5).prop_map(|terms| {
            Polynomial::from_terms(3, terms.into_iter().map(|(e, c)| (e, Rational::from_int(c))))
        })
    }

    proptest! {
        #[test]
        fn antisymmetry_and_leibniz(f in arb_poly(), g in arb_poly(), h in arb_poly()) {
            let p = LinearPoisson::su2(q(1)).to_polynomial();
            prop_assert!(bracket(&p, &f, &f).is_zero());
            prop_assert_eq!(bracket(&p, &f, &g), -&bracket(&p, &g, &f));
            let lhs = bracket(&p, &f, &(&g * &h));
            let rhs = &(&bracket(&p, &f, &g) * &h) + &(&g * &bracket(&p, &f, &h));
            prop_assert_eq!(lhs, rhs);
        }
    }
}
