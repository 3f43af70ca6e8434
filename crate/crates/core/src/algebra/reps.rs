use std::collections::HashMap;
use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use num_integer::Integer;

use super::norm::{operator_norm, NormEstimate, SparseOperator, DENSE_LIMIT};
use super::{AlgebraError, FiniteAlgebra, FiniteElement, LatticeElement, MatrixRep, RepKind, Representation};
use crate::scalar::Scalar;

/// The rational noncommutative torus at `ℏ = p/q` on `ℂ^q`:
/// `U = diag(e^{−2πipj/q})`, `V e_j = e_{j+1}`, so `UV = e^{−2πiℏ} VU`, and
/// `δ_m ↦ e^{iπℏ m₁m₂} U^{m₁} V^{m₂}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ClockShift {
    pub p: i64,
    pub q: i64,
    /// `e^{iπk/q}` for `k = 0..2q`.
    roots: Vec<Complex64>,
    pub rep: MatrixRep,
}

pub fn clock_shift_rep(p: i64, q: i64) -> Result<ClockShift, AlgebraError> {
    if q <= 0 {
        return Err(AlgebraError::ClockShift(format!("q must be positive, got {q}")));
    }
    if p.gcd(&q) != 1 {
        return Err(AlgebraError::ClockShift(format!("gcd({p}, {q}) ≠ 1")));
    }
    let roots = (0..2 * q)
        .map(|k| {
            if k == 0 {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::from_polar(1.0, PI * k as f64 / q as f64)
            }
        })
        .collect();
    let mut cs = ClockShift {
        p,
        q,
        roots,
        rep: MatrixRep {
            dim: q as usize,
            generators: Vec::new(),
            kind: RepKind::ClockShift,
            unitary: true,
        },
    };
    cs.rep.generators = vec![("U".into(), cs.delta(&[1, 0])), ("V".into(), cs.delta(&[0, 1]))];
    Ok(cs)
}

impl ClockShift {
    /// Image of `δ_m`. Entry `(k + m₂, k)` is `exp(iπ p m₁ (m₂ − 2j) / q)`
    /// with `j = k + m₂ mod q`, the exponent reduced exactly mod `2q`.
    pub fn delta(&self, m: &[i64]) -> DMatrix<Complex64> {
        let q = self.q as i128;
        let (m1, m2) = (m[0] as i128, m[1] as i128);
        let mut out = DMatrix::zeros(self.q as usize, self.q as usize);
        for k in 0..q {
            let j = (k + m2).rem_euclid(q);
            let e = (self.p as i128 * m1 * (m2 - 2 * j)).rem_euclid(2 * q);
            out[(j as usize, k as usize)] = self.roots[e as usize];
        }
        out
    }

    fn check_twist<S: Scalar>(&self, a: &LatticeElement<S>) -> Result<(), AlgebraError> {
        let alg = a.algebra();
        if alg.dim() != 2 {
            return Err(AlgebraError::WrongTwist(format!("expected rank 2, found {}", alg.dim())));
        }
        let b10 = &alg.b()[(1, 0)];
        let hbar = S::from_ratio(self.p, self.q);
        let ok = if S::EXACT {
            *b10 == hbar
        } else {
            (b10.approx() - hbar.approx()).abs() <= 1e-14
        };
        if !ok {
            return Err(AlgebraError::WrongTwist(format!("ℏ = {b10}, representation has {}/{}", self.p, self.q)));
        }
        Ok(())
    }

    pub fn represent<S: Scalar>(&self, a: &LatticeElement<S>) -> Result<DMatrix<Complex64>, AlgebraError> {
        self.check_twist(a)?;
        let mut out = DMatrix::zeros(self.q as usize, self.q as usize);
        for (m, c) in a.terms() {
            out += self.delta(m) * *c;
        }
        Ok(out)
    }
}

impl<S: Scalar> Representation<LatticeElement<S>> for ClockShift {
    fn norm(&self, a: &LatticeElement<S>) -> Result<f64, AlgebraError> {
        Ok(operator_norm(&self.represent(a)?))
    }
}

/// Left twisted convolution restricted to the window `[−R, R]^d` of `ℓ²(ℤ^d)`:
/// `M[x, y] = σ(x − y, y) a(x − y)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedRep {
    pub radius: i64,
    pub operator: SparseOperator,
}

impl TruncatedRep {
    pub fn dim(&self) -> usize {
        self.operator.rows
    }

    pub fn norm(&self) -> NormEstimate {
        NormEstimate {
            radius: Some(self.radius),
            ..self.operator.norm()
        }
    }

    /// Dense export, only for windows small enough for dense linear algebra.
    pub fn to_matrix_rep(&self) -> Option<MatrixRep> {
        (self.dim() <= DENSE_LIMIT).then(|| MatrixRep {
            dim: self.dim(),
            generators: vec![("a".into(), self.operator.to_dense())],
            kind: RepKind::TruncatedRegular,
            unitary: false,
        })
    }
}

fn window(d: usize, r: i64) -> Vec<Vec<i64>> {
    let side = (2 * r + 1) as usize;
    (0..side.pow(d as u32))
        .map(|mut k| {
            let mut p = vec![0; d];
            for slot in p.iter_mut().rev() {
                *slot = (k % side) as i64 - r;
                k /= side;
            }
            p
        })
        .collect()
}

pub fn truncated_regular_rep<S: Scalar>(a: &LatticeElement<S>, radius: i64) -> Result<TruncatedRep, AlgebraError> {
    let support = a.support_radius();
    if radius < support || radius < 0 {
        return Err(AlgebraError::WindowTooSmall { window: radius, support });
    }
    let alg = a.algebra();
    let points = window(alg.dim(), radius);
    let index: HashMap<&[i64], usize> = points.iter().enumerate().map(|(i, p)| (p.as_slice(), i)).collect();
    let columns = points
        .iter()
        .map(|y| {
            a.terms()
                .filter_map(|(n, c)| {
                    let x: Vec<i64> = n.iter().zip(y).map(|(u, v)| u + v).collect();
                    index.get(x.as_slice()).map(|&i| (i, alg.sigma(n, y) * c))
                })
                .collect()
        })
        .collect();
    Ok(TruncatedRep {
        radius,
        operator: SparseOperator {
            rows: points.len(),
            columns,
        },
    })
}

/// Norms in the truncated regular representation of a fixed radius.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TruncatedWindow(pub i64);

impl<S: Scalar> Representation<LatticeElement<S>> for TruncatedWindow {
    fn norm(&self, a: &LatticeElement<S>) -> Result<f64, AlgebraError> {
        Ok(truncated_regular_rep(a, self.0.max(a.support_radius()))?.norm().value)
    }
}

/// The left regular representation on `ℓ²(G)`:
/// `(a·ξ)(γ) = Σ_{ηζ=γ} σ(η, ζ) a(η) ξ(ζ)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct FiniteRegular;

impl FiniteRegular {
    pub fn represent(&self, a: &FiniteElement) -> DMatrix<Complex64> {
        let alg = a.algebra();
        let g = alg.groupoid();
        let n = g.n_arrows();
        let mut out = DMatrix::zeros(n, n);
        for (eta, c) in a.terms() {
            for zeta in 0..n {
                if let Some(gamma) = g.mult(eta, zeta) {
                    out[(gamma, zeta)] += alg.sigma(eta, zeta) * c;
                }
            }
        }
        out
    }
}

impl Representation<FiniteElement> for FiniteRegular {
    fn norm(&self, a: &FiniteElement) -> Result<f64, AlgebraError> {
        Ok(operator_norm(&self.represent(a)))
    }
}

/// Regular representation with every `δ_γ` as a designated generator.
pub fn finite_regular_rep(alg: &std::sync::Arc<FiniteAlgebra>) -> MatrixRep {
    let n = alg.groupoid().n_arrows();
    MatrixRep {
        dim: n,
        generators: (0..n)
            .map(|a| (format!("delta_{a}"), FiniteRegular.represent(&alg.delta(a))))
            .collect(),
        kind: RepKind::FiniteGroupoidRegular,
        unitary: alg.groupoid().n_objects() == 1,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{cstar_identity_check, LatticeAlgebra, StarAlgebra};
    use crate::groupoid::{group_groupoid, pair_groupoid, GroupTable};
    use crate::scalar::Rational;
    use rand::{Rng, SeedableRng};

    fn max_abs(m: &DMatrix<Complex64>) -> f64 {
        m.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    fn random_element(
        alg: &std::sync::Arc<LatticeAlgebra<Rational>>,
        r: i64,
        rng: &mut impl Rng,
    ) -> LatticeElement<Rational> {
        LatticeElement::from_terms(
            alg,
            (0..6).map(|_| {
                (
                    vec![rng.gen_range(-r..=r), rng.gen_range(-r..=r)],
                    Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
                )
            }),
        )
    }

    #[test]
    fn half_turn_anticommutes() {
        let cs = clock_shift_rep(1, 2).unwrap();
        let (u, v) = (cs.rep.generator("U").unwrap(), cs.rep.generator("V").unwrap());
        assert!((u * v + v * u).iter().all(|z| z.norm() < 1e-15));
        assert!(cs.rep.unitarity_residual() < 1e-15);
    }

    #[test]
    fn trivial_rep() {
        let cs = clock_shift_rep(0, 1).unwrap();
        assert_eq!(cs.rep.dim, 1);
        assert_eq!(cs.delta(&[5, -3])[(0, 0)], Complex64::new(1.0, 0.0));
    }

    #[test]
    fn invalid_data_is_rejected() {
        assert!(clock_shift_rep(1, 0).is_err());
        assert!(clock_shift_rep(2, 4).is_err());
    }

    #[test]
    fn clock_shift_is_a_star_homomorphism() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for (p, q) in [(1, 3), (2, 5), (-3, 7)] {
            let alg = LatticeAlgebra::torus(Rational::from_ratio(p, q));
            let cs = clock_shift_rep(p, q).unwrap();
            for _ in 0..10 {
                let (a, b) = (random_element(&alg, 3, &mut rng), random_element(&alg, 3, &mut rng));
                let lhs = cs.represent(&a.convolve(&b).unwrap()).unwrap();
                let rhs = cs.represent(&a).unwrap() * cs.represent(&b).unwrap();
                assert!(max_abs(&(lhs - rhs)) < 1e-12);
                let adj = cs.represent(&a.adjoint()).unwrap() - cs.represent(&a).unwrap().adjoint();
                assert!(max_abs(&adj) < 1e-12);
                assert!(cstar_identity_check(&a, &cs).unwrap() < 1e-10);
            }
        }
    }

    #[test]
    fn wrong_twist_is_rejected() {
        let alg = LatticeAlgebra::torus(Rational::from_ratio(1, 3));
        let cs = clock_shift_rep(1, 5).unwrap();
        assert!(matches!(cs.represent(&alg.unit()), Err(AlgebraError::WrongTwist(_))));
    }

    #[test]
    fn truncated_deltas() {
        let alg = LatticeAlgebra::torus(0.377_f64);
        let unit = truncated_regular_rep(&alg.unit(), 5).unwrap();
        assert!(max_abs(&(unit.operator.to_dense() - DMatrix::identity(121, 121))) == 0.0);
        for m in [vec![1, 0], vec![2, -3]] {
            let n = truncated_regular_rep(&alg.delta(m), 8).unwrap().norm().value;
            assert!((n - 1.0).abs() < 1.0 / 8.0);
        }
        assert!(matches!(
            truncated_regular_rep(&alg.delta(vec![4, 0]), 3),
            Err(AlgebraError::WindowTooSmall { .. })
        ));
    }

    #[test]
    fn cosine_norm_approaches_two() {
        let alg = LatticeAlgebra::<f64>::untwisted(1);
        let a = alg.delta(vec![1]).add(&alg.delta(vec![-1])).unwrap();
        let mut prev = 0.0;
        for r in [16, 64, 256] {
            let n = truncated_regular_rep(&a, r).unwrap().norm().value;
            assert!(n >= prev - 1e-12);
            prev = n;
        }
        assert!((prev - 2.0).abs() < 1e-3);
    }

    #[test]
    fn regular_rep_of_finite_algebras() {
        let alg = FiniteAlgebra::untwisted(pair_groupoid(3));
        let rep = finite_regular_rep(&alg);
        assert_eq!(rep.dim, 9);
        let a = FiniteElement::from_terms(&alg, (0..9).map(|k| (k, Complex64::new(k as f64, 1.0))));
        let lhs = FiniteRegular.represent(&a.convolve(&a.star()).unwrap());
        let rhs = FiniteRegular.represent(&a) * FiniteRegular.represent(&a).adjoint();
        assert!(max_abs(&(lhs - rhs)) < 1e-12);
        assert!(cstar_identity_check(&a, &FiniteRegular).unwrap() < 1e-10);
        let grp = FiniteAlgebra::untwisted(group_groupoid(&GroupTable::cyclic(4)));
        let rep = finite_regular_rep(&grp);
        assert!(rep.unitary && rep.unitarity_residual() < 1e-15);
        let mut csv = Vec::new();
        rep.write_csv(&mut csv).unwrap();
        let text = String::from_utf8(csv).unwrap();
        assert!(text.starts_with("generator,row,re_0,im_0"));
        assert_eq!(text.lines().count(), 1 + 4 * 4);
    }
}
