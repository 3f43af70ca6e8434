use std::collections::BTreeMap;
use std::sync::Arc;

use num_complex::Complex64;
use serde_json::{json, Value};

use super::{json_complex, AlgebraError, StarAlgebra};
use crate::groupoid::{ArrowId, FiniteGroupoid, PhaseCochain};

/// A finite groupoid with a 2-cochain twist, used as the structure constants
/// of the twisted convolution product (counting measure on `t`-fibers).
///
/// The twist need not be a cocycle; the product is then non-associative,
/// which is exactly what the associativity scans detect.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteAlgebra {
    groupoid: FiniteGroupoid,
    twist: PhaseCochain,
}

impl FiniteAlgebra {
    pub fn new(groupoid: FiniteGroupoid, twist: PhaseCochain) -> Result<Arc<Self>, AlgebraError> {
        if twist.degree() != 2 {
            return Err(AlgebraError::TwistDegree(twist.degree()));
        }
        for (a, b, _) in groupoid.products() {
            if twist.get(&[a, b]).is_none() {
                return Err(AlgebraError::MissingTwist(a, b));
            }
        }
        Ok(Arc::new(FiniteAlgebra { groupoid, twist }))
    }

    pub fn untwisted(groupoid: FiniteGroupoid) -> Arc<Self> {
        let twist = PhaseCochain::trivial(&groupoid, 2);
        Arc::new(FiniteAlgebra { groupoid, twist })
    }

    pub fn groupoid(&self) -> &FiniteGroupoid {
        &self.groupoid
    }

    pub fn twist(&self) -> &PhaseCochain {
        &self.twist
    }

    pub(crate) fn sigma(&self, a: ArrowId, b: ArrowId) -> Complex64 {
        self.twist.get(&[a, b]).expect("twist is total on composable pairs")
    }

    pub fn delta(self: &Arc<Self>, a: ArrowId) -> FiniteElement {
        FiniteElement::from_terms(self, [(a, Complex64::new(1.0, 0.0))])
    }
}

/// Finitely supported function on the arrows.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteElement {
    algebra: Arc<FiniteAlgebra>,
    coeffs: BTreeMap<ArrowId, Complex64>,
}

impl FiniteElement {
    pub fn zero(algebra: &Arc<FiniteAlgebra>) -> Self {
        FiniteElement {
            algebra: Arc::clone(algebra),
            coeffs: BTreeMap::new(),
        }
    }

    pub fn from_terms(algebra: &Arc<FiniteAlgebra>, terms: impl IntoIterator<Item = (ArrowId, Complex64)>) -> Self {
        let mut e = Self::zero(algebra);
        for (a, c) in terms {
            assert!(a < algebra.groupoid.n_arrows(), "arrow {a} out of range");
            *e.coeffs.entry(a).or_insert(Complex64::new(0.0, 0.0)) += c;
        }
        e
    }

    pub fn algebra(&self) -> &Arc<FiniteAlgebra> {
        &self.algebra
    }

    pub fn coefficient(&self, a: ArrowId) -> Complex64 {
        self.coeffs.get(&a).copied().unwrap_or_default()
    }

    pub fn terms(&self) -> impl Iterator<Item = (ArrowId, Complex64)> + '_ {
        self.coeffs.iter().map(|(&a, &c)| (a, c))
    }

    fn same_algebra(&self, other: &Self) -> Result<(), AlgebraError> {
        if Arc::ptr_eq(&self.algebra, &other.algebra) || self.algebra == other.algebra {
            Ok(())
        } else {
            Err(AlgebraError::MismatchedAlgebra)
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self, AlgebraError> {
        self.same_algebra(other)?;
        Ok(Self::from_terms(&self.algebra, self.terms().chain(other.terms())))
    }

    pub fn scale(&self, k: Complex64) -> Self {
        Self::from_terms(&self.algebra, self.terms().map(|(a, c)| (a, c * k)))
    }

    /// `max |a(γ) − b(γ)|`.
    pub fn distance(&self, other: &Self) -> f64 {
        self.coeffs
            .keys()
            .chain(other.coeffs.keys())
            .map(|&a| (self.coefficient(a) - other.coefficient(a)).norm())
            .fold(0.0, f64::max)
    }

    /// `(a*b)(γ) = Σ_{ηζ=γ} σ(η, ζ) a(η) b(ζ)`.
    pub fn convolve(&self, other: &Self) -> Result<Self, AlgebraError> {
        self.same_algebra(other)?;
        let g = &self.algebra.groupoid;
        let mut out = BTreeMap::new();
        for (&eta, &x) in &self.coeffs {
            for (&zeta, &y) in &other.coeffs {
                if let Some(gamma) = g.mult(eta, zeta) {
                    *out.entry(gamma).or_insert(Complex64::new(0.0, 0.0)) += self.algebra.sigma(eta, zeta) * x * y;
                }
            }
        }
        Ok(FiniteElement {
            algebra: Arc::clone(&self.algebra),
            coeffs: out,
        })
    }

    /// `a*(γ) = conj(σ(γ⁻¹, γ)) · conj(a(γ⁻¹))`; an involutive
    /// anti-automorphism when the twist is a normalized cocycle.
    pub fn adjoint(&self) -> Self {
        let g = &self.algebra.groupoid;
        let terms = self.coeffs.iter().map(|(&eta, &c)| {
            let inv = g.inv(eta);
            (inv, (self.algebra.sigma(eta, inv) * c).conj())
        });
        Self::from_terms(&self.algebra, terms)
    }

    pub fn to_json(&self) -> Value {
        let twist: Vec<Value> = self
            .algebra
            .twist
            .values()
            .iter()
            .map(|(chain, v)| {
                let [re, im] = json_complex(*v);
                json!([chain, re, im])
            })
            .collect();
        let support: Vec<Value> = self
            .terms()
            .map(|(a, c)| {
                let [re, im] = json_complex(c);
                json!([[a], re, im])
            })
            .collect();
        json!({"kind": "finite", "twist": twist, "support": support})
    }
}

impl StarAlgebra for FiniteElement {
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
    use crate::groupoid::{coboundary, pair_groupoid};
    use rand::{Rng, SeedableRng};

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn matrix_unit_identity() {
        // Arrow (i, j) has id i·n + j.
        let alg = FiniteAlgebra::untwisted(pair_groupoid(2));
        let p = alg.delta(1).convolve(&alg.delta(2)).unwrap();
        assert_eq!(p, alg.delta(0));
        assert!(alg.delta(1).convolve(&alg.delta(1)).unwrap().is_zero());
    }

    #[test]
    fn star_fixes_real_units_and_is_involutive() {
        let g = pair_groupoid(3);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let c1 = PhaseCochain::from_fn(&g, 1, |a| {
            if g.is_unit(a[0]) {
                c(1.0)
            } else {
                Complex64::from_polar(1.0, rng.gen_range(0.0..6.3))
            }
        })
        .unwrap();
        let alg = FiniteAlgebra::new(g.clone(), coboundary(&g, &c1).unwrap()).unwrap();
        let u = alg.delta(g.unit(1)).scale(c(2.5));
        assert_eq!(u.adjoint(), u);
        for _ in 0..20 {
            let mk = |rng: &mut rand_chacha::ChaCha8Rng| {
                FiniteElement::from_terms(
                    &alg,
                    (0..9).map(|k| (k, Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))),
                )
            };
            let (a, b) = (mk(&mut rng), mk(&mut rng));
            assert!(a.adjoint().adjoint().distance(&a) < 1e-14);
            let lhs = a.convolve(&b).unwrap().adjoint();
            let rhs = b.adjoint().convolve(&a.adjoint()).unwrap();
            assert!(lhs.distance(&rhs) < 1e-13);
        }
    }

    #[test]
    fn mismatched_algebras_are_rejected() {
        let a = FiniteAlgebra::untwisted(pair_groupoid(2));
        let b = FiniteAlgebra::untwisted(pair_groupoid(3));
        assert_eq!(a.delta(0).convolve(&b.delta(0)), Err(AlgebraError::MismatchedAlgebra));
    }

    #[test]
    fn json_shape() {
        let alg = FiniteAlgebra::untwisted(pair_groupoid(1));
        let v = alg.delta(0).to_json();
        assert_eq!(v["kind"], "finite");
        assert_eq!(v["support"][0][0], json!([0]));
    }
}
