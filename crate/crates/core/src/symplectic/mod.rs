//! Explicit symplectic groupoids: the linear groupoid of a constant Poisson
//! structure, abelian action groupoids on grid tori, and constant
//! polarizations on linear groupoids.

mod action;
mod polarization;

use thiserror::Error;

use crate::linalg::Matrix;
use crate::poisson::{bracket, ConstantPoisson};
use crate::poly::Polynomial;
use crate::scalar::Scalar;

pub use action::{AbelianActionGroupoid, ActionArrow, BaseGrid};
pub use polarization::{check_polarization, derive_de, DeReport, PolarizationKind, PolarizationReport, PolarizationSpec};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SymplecticError {
    #[error("arrows are not composable: s(first) = {src:?} but t(second) = {tgt:?}")]
    NotComposable { src: Vec<i64>, tgt: Vec<i64> },
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("invalid data: {0}")]
    Invalid(String),
}

/// `v ↦ A v + b`.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineMap<S: Scalar> {
    pub matrix: Matrix<S>,
    pub offset: Vec<S>,
}

impl<S: Scalar> AffineMap<S> {
    pub fn linear(matrix: Matrix<S>) -> Self {
        let offset = vec![S::zero(); matrix.rows()];
        AffineMap { matrix, offset }
    }

    pub fn apply(&self, v: &[S]) -> Vec<S> {
        self.matrix
            .apply(v)
            .into_iter()
            .zip(&self.offset)
            .map(|(a, b)| a + b.clone())
            .collect()
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &AffineMap<S>) -> AffineMap<S> {
        let matrix = &self.matrix * &other.matrix;
        let offset = self.apply(&other.offset);
        AffineMap { matrix, offset }
    }

    /// `v ↦ (self(v), other(v))`.
    pub fn pair(&self, other: &AffineMap<S>) -> AffineMap<S> {
        let mut offset = self.offset.clone();
        offset.extend(other.offset.iter().cloned());
        AffineMap {
            matrix: self.matrix.vstack(&other.matrix),
            offset,
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::linear(Matrix::identity(n))
    }

    /// Max-abs difference of matrices and offsets.
    pub fn distance(&self, other: &AffineMap<S>) -> f64 {
        let m = (&self.matrix - &other.matrix).max_magnitude();
        let o = self
            .offset
            .iter()
            .zip(&other.offset)
            .map(|(a, b)| (a.clone() - b.clone()).magnitude())
            .fold(0.0, f64::max);
        m.max(o)
    }
}

/// Which deliberate error to inject into the projections `pr₁, pr₂`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Corruption {
    None,
    /// Both projections use `π` instead of `½π`. This is a different but
    /// still multiplicative structure, so `∂*ω` stays zero.
    DropBothHalves,
    /// Only `pr₁` drops the `½`; `∂*ω` no longer vanishes when `π ≠ 0`.
    InconsistentHalf,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IdentityCheck {
    pub name: &'static str,
    pub residual: f64,
}

/// `Σ = V ⊕ V*` with coordinates `(x¹..x^d, y₁..y_d)` for a constant `π`.
///
/// `s(x,y) = x − ½πᵀy`, `t(x,y) = x + ½πᵀy` where `(πᵀy)^i = Σ_j π^{ji} y_j`.
/// Composable pairs are charted by `(x, y, y')`, with
/// `pr₁ = (x + ½πᵀy', y)`, `pr₂ = (x − ½πᵀy, y')` and `m = (x, y + y')`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearSymplecticGroupoid<S: Scalar> {
    pi: ConstantPoisson<S>,
    pub s: AffineMap<S>,
    pub t: AffineMap<S>,
    pub inv: AffineMap<S>,
    pub unit: AffineMap<S>,
    pub pr1: AffineMap<S>,
    pub pr2: AffineMap<S>,
    pub m: AffineMap<S>,
    /// Matrix of `ω = Σ dx^i ∧ dy_i`: `ω(u, v) = uᵀ Ω v`.
    pub omega: Matrix<S>,
}

fn blocks<S: Scalar>(rows: usize, cols: usize, d: usize, f: impl Fn(usize, usize, usize, usize) -> S) -> Matrix<S> {
    Matrix::from_fn(rows * d, cols * d, |i, j| f(i / d, j / d, i % d, j % d))
}

impl<S: Scalar> LinearSymplecticGroupoid<S> {
    pub fn build_constant(pi: ConstantPoisson<S>) -> Self {
        Self::build_with(pi, Corruption::None)
    }

    /// Build with an optional corruption of the projections (for negative controls).
    pub fn build_with(pi: ConstantPoisson<S>, corruption: Corruption) -> Self {
        let d = pi.dim();
        let p = pi.matrix().clone();
        let id = |a: usize, b: usize| if a == b { S::one() } else { S::zero() };
        // ½πᵀ as a map on y: (½πᵀ)_{ij} = ½ π^{ji}
        let half_t = |a: usize, b: usize| S::half() * p[(b, a)].clone();
        let full_t = |a: usize, b: usize| p[(b, a)].clone();
        let (c1, c2): (Box<dyn Fn(usize, usize) -> S + '_>, Box<dyn Fn(usize, usize) -> S + '_>) = match corruption {
            Corruption::None => (Box::new(half_t), Box::new(half_t)),
            Corruption::DropBothHalves => (Box::new(full_t), Box::new(full_t)),
            Corruption::InconsistentHalf => (Box::new(full_t), Box::new(half_t)),
        };
        let s = blocks(1, 2, d, |_, bj, a, b| if bj == 0 { id(a, b) } else { -half_t(a, b) });
        let t = blocks(1, 2, d, |_, bj, a, b| if bj == 0 { id(a, b) } else { half_t(a, b) });
        let inv = blocks(2, 2, d, |bi, bj, a, b| match (bi, bj) {
            (0, 0) => id(a, b),
            (1, 1) => -id(a, b),
            _ => S::zero(),
        });
        let unit = blocks(2, 1, d, |bi, _, a, b| if bi == 0 { id(a, b) } else { S::zero() });
        let pr1 = blocks(2, 3, d, |bi, bj, a, b| match (bi, bj) {
            (0, 0) | (1, 1) => id(a, b),
            (0, 2) => c1(a, b),
            _ => S::zero(),
        });
        let pr2 = blocks(2, 3, d, |bi, bj, a, b| match (bi, bj) {
            (0, 0) | (1, 2) => id(a, b),
            (0, 1) => -c2(a, b),
            _ => S::zero(),
        });
        let m = blocks(2, 3, d, |bi, bj, a, b| match (bi, bj) {
            (0, 0) | (1, 1) | (1, 2) => id(a, b),
            _ => S::zero(),
        });
        let omega = blocks(2, 2, d, |bi, bj, a, b| match (bi, bj) {
            (0, 1) => id(a, b),
            (1, 0) => -id(a, b),
            _ => S::zero(),
        });
        LinearSymplecticGroupoid {
            pi,
            s: AffineMap::linear(s),
            t: AffineMap::linear(t),
            inv: AffineMap::linear(inv),
            unit: AffineMap::linear(unit),
            pr1: AffineMap::linear(pr1),
            pr2: AffineMap::linear(pr2),
            m: AffineMap::linear(m),
            omega,
        }
    }

    pub fn dim(&self) -> usize {
        self.pi.dim()
    }

    pub fn poisson(&self) -> &ConstantPoisson<S> {
        &self.pi
    }

    /// Chart of a composable pair `(γ, η)`: `(x_γ − ½πᵀy_η, y_γ, y_η)`, as a map `ℝ^{4d} → ℝ^{3d}`.
    pub fn pair_chart(&self) -> AffineMap<S> {
        let d = self.dim();
        let p = self.pi.matrix();
        let id = |a: usize, b: usize| if a == b { S::one() } else { S::zero() };
        AffineMap::linear(blocks(3, 4, d, |bi, bj, a, b| match (bi, bj) {
            (0, 0) | (1, 1) | (2, 3) => id(a, b),
            (0, 3) => -(S::half() * p[(b, a)].clone()),
            _ => S::zero(),
        }))
    }

    /// Every structural identity as an affine-map equation, with its residual.
    pub fn check_axioms(&self) -> Vec<IdentityCheck> {
        let d = self.dim();
        let id_v = AffineMap::identity(d);
        let id_sigma = AffineMap::identity(2 * d);
        let chart = self.pair_chart();
        let mul = |pair: &AffineMap<S>| self.m.compose(&chart.compose(pair));
        let mut out = Vec::new();
        let mut push = |name, a: AffineMap<S>, b: AffineMap<S>| out.push(IdentityCheck { name, residual: a.distance(&b) });
        push("s∘unit = id", self.s.compose(&self.unit), id_v.clone());
        push("t∘unit = id", self.t.compose(&self.unit), id_v.clone());
        push("s∘inv = t", self.s.compose(&self.inv), self.t.clone());
        push("t∘inv = s", self.t.compose(&self.inv), self.s.clone());
        push("inv∘inv = id", self.inv.compose(&self.inv), id_sigma.clone());
        push("s∘pr₁ = t∘pr₂", self.s.compose(&self.pr1), self.t.compose(&self.pr2));
        push("s∘m = s∘pr₂", self.s.compose(&self.m), self.s.compose(&self.pr2));
        push("t∘m = t∘pr₁", self.t.compose(&self.m), self.t.compose(&self.pr1));
        push("chart∘(pr₁, pr₂) = id", chart.compose(&self.pr1.pair(&self.pr2)), AffineMap::identity(3 * d));
        push("unit(t(γ))·γ = γ", mul(&self.unit.compose(&self.t).pair(&id_sigma)), id_sigma.clone());
        push("γ·unit(s(γ)) = γ", mul(&id_sigma.pair(&self.unit.compose(&self.s))), id_sigma.clone());
        push("γ·γ⁻¹ = unit(t(γ))", mul(&id_sigma.pair(&self.inv)), self.unit.compose(&self.t));
        push("γ⁻¹·γ = unit(s(γ))", mul(&self.inv.pair(&id_sigma)), self.unit.compose(&self.s));
        let (g1, g2, g3) = self.triple_parametrization();
        push("s(γ₁) = t(γ₂) on triples", self.s.compose(&g1), self.t.compose(&g2));
        push("s(γ₂) = t(γ₃) on triples", self.s.compose(&g2), self.t.compose(&g3));
        let left = mul(&mul(&g1.pair(&g2)).pair(&g3));
        let right = mul(&g1.pair(&mul(&g2.pair(&g3))));
        push("associativity", left, right);
        out
    }

    /// Composable triples charted by `(x, y, y', y'')`, where `x` is the
    /// base coordinate of the full product.
    pub fn triple_parametrization(&self) -> (AffineMap<S>, AffineMap<S>, AffineMap<S>) {
        let d = self.dim();
        let p = self.pi.matrix();
        let id = |a: usize, b: usize| if a == b { S::one() } else { S::zero() };
        let h = |a: usize, b: usize| S::half() * p[(b, a)].clone();
        // γ₁ = (x + ½πᵀ(y'+y''), y), γ₂ = (x − ½πᵀy + ½πᵀy'', y'), γ₃ = (x − ½πᵀ(y+y'), y'')
        let g = |which: usize| {
            AffineMap::linear(blocks(2, 4, d, |bi, bj, a, b| match (bi, bj) {
                (0, 0) => id(a, b),
                (0, 1) if which > 0 => -h(a, b),
                (0, 2) if which == 0 => h(a, b),
                (0, 2) if which == 2 => -h(a, b),
                (0, 3) if which < 2 => h(a, b),
                (1, k) if k == which + 1 => id(a, b),
                _ => S::zero(),
            }))
        };
        (g(0), g(1), g(2))
    }

    /// `pr₁*ω − m*ω + pr₂*ω` as a matrix on the `(x, y, y')` chart of `Σ₂`.
    pub fn coboundary_omega(&self) -> Matrix<S> {
        let pull = |a: &AffineMap<S>| &(&a.matrix.transpose() * &self.omega) * &a.matrix;
        &(&pull(&self.pr1) - &pull(&self.m)) + &pull(&self.pr2)
    }

    /// Max-abs entry of `∂*ω`.
    pub fn check_multiplicative_symplectic(&self) -> f64 {
        self.coboundary_omega().max_magnitude()
    }

    /// Max residual of `{t*x^i, t*x^j}_Σ − t*π^{ij}` with `{x^i, y_j}_Σ = δ^i_j`.
    /// Returns the residuals for `t` (Poisson) and for `s` (anti-Poisson).
    pub fn check_target_poisson(&self) -> (f64, f64) {
        let d = self.dim();
        let sigma_bracket = ConstantPoisson::new(self.omega.clone())
            .expect("Ω is antisymmetric")
            .to_polynomial();
        let coord = |map: &AffineMap<S>, i: usize| {
            let mut p = Polynomial::constant(2 * d, map.offset[i].clone());
            for j in 0..2 * d {
                p = &p + &Polynomial::var(2 * d, j).scale(&map.matrix[(i, j)]);
            }
            p
        };
        let residual = |map: &AffineMap<S>, sign: S| {
            let mut worst: f64 = 0.0;
            for i in 0..d {
                for j in 0..d {
                    let lhs = bracket(&sigma_bracket, &coord(map, i), &coord(map, j));
                    let rhs = Polynomial::constant(2 * d, sign.clone() * self.pi.matrix()[(i, j)].clone());
                    worst = worst.max((&lhs - &rhs).max_abs_coefficient());
                }
            }
            worst
        };
        (residual(&self.t, S::one()), residual(&self.s, -S::one()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;
    use rand::{Rng, SeedableRng};

    fn q(n: i64, d: i64) -> Rational {
        Rational::from_ratio(n, d)
    }

    pub(crate) fn random_pi(rng: &mut impl Rng, d: usize) -> ConstantPoisson<Rational> {
        let mut m = Matrix::zeros(d, d);
        for i in 0..d {
            for j in i + 1..d {
                let v = q(rng.gen_range(-9..=9), rng.gen_range(1..=7));
                m[(i, j)] = v.clone();
                m[(j, i)] = -v;
            }
        }
        ConstantPoisson::new(m).unwrap()
    }

    #[test]
    fn worked_example_source_and_target() {
        let g = LinearSymplecticGroupoid::build_constant(ConstantPoisson::planar(q(1, 1)));
        let pt = vec![q(0, 1), q(0, 1), q(1, 1), q(0, 1)];
        assert_eq!(g.s.apply(&pt), vec![q(0, 1), q(-1, 2)]);
        assert_eq!(g.t.apply(&pt), vec![q(0, 1), q(1, 2)]);
    }

    #[test]
    fn zero_pi_is_a_bundle_of_groups() {
        let g = LinearSymplecticGroupoid::build_constant(ConstantPoisson::<Rational>::zero(2));
        assert_eq!(g.s, g.t);
        assert_eq!(g.check_multiplicative_symplectic(), 0.0);
        let pair = vec![q(1, 1), q(2, 1), q(3, 1), q(4, 1), q(5, 1), q(6, 1)];
        assert_eq!(g.m.apply(&pair), vec![q(1, 1), q(2, 1), q(8, 1), q(10, 1)]);
    }

    #[test]
    fn random_rational_structures_satisfy_every_identity() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let d = rng.gen_range(1..=5);
            let g = LinearSymplecticGroupoid::build_constant(random_pi(&mut rng, d));
            for c in g.check_axioms() {
                assert_eq!(c.residual, 0.0, "{} fails", c.name);
            }
            assert_eq!(g.check_multiplicative_symplectic(), 0.0);
            assert_eq!(g.check_target_poisson(), (0.0, 0.0));
        }
    }

    #[test]
    fn corruption_controls() {
        let pi = ConstantPoisson::planar(q(1, 1));
        let both = LinearSymplecticGroupoid::build_with(pi.clone(), Corruption::DropBothHalves);
        assert_eq!(both.check_multiplicative_symplectic(), 0.0);
        let bad = LinearSymplecticGroupoid::build_with(pi, Corruption::InconsistentHalf);
        assert!(bad.check_multiplicative_symplectic() > 0.0);
    }

    /// Oracle for the target map: `T Π_Σ Tᵀ` by plain matrix arithmetic.
    #[test]
    fn target_poisson_matches_matrix_oracle() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for d in 1..=4 {
            let g = LinearSymplecticGroupoid::build_constant(random_pi(&mut rng, d));
            let t = &g.t.matrix;
            let induced = &(t * &g.omega) * &t.transpose();
            assert_eq!(&induced, g.poisson().matrix());
            let s = &g.s.matrix;
            assert_eq!((&(s * &g.omega) * &s.transpose()), -g.poisson().matrix().clone());
        }
    }
}
