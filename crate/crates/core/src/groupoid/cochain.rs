use std::collections::BTreeMap;

use num_complex::Complex64;

use super::{ArrowId, FiniteGroupoid, GroupoidError};

/// Allowed deviation of `|c(γ)|` from 1 when building a cochain.
pub const PHASE_MODULUS_TOL: f64 = 1e-12;

/// A `U(1)`-valued function on composable `k`-chains.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseCochain {
    degree: usize,
    values: BTreeMap<Vec<ArrowId>, Complex64>,
}

impl PhaseCochain {
    pub fn new(degree: usize, values: BTreeMap<Vec<ArrowId>, Complex64>) -> Result<Self, GroupoidError> {
        for (chain, v) in &values {
            let modulus = v.norm();
            if chain.len() != degree {
                return Err(GroupoidError::WrongChainLength {
                    chain: chain.clone(),
                    degree,
                });
            }
            if (modulus - 1.0).abs() > PHASE_MODULUS_TOL || !modulus.is_finite() {
                return Err(GroupoidError::NotUnitModulus {
                    chain: chain.clone(),
                    modulus,
                });
            }
        }
        Ok(PhaseCochain { degree, values })
    }

    /// Tabulate `f` on every composable `degree`-chain.
    pub fn from_fn(
        g: &FiniteGroupoid,
        degree: usize,
        mut f: impl FnMut(&[ArrowId]) -> Complex64,
    ) -> Result<Self, GroupoidError> {
        let values = g.nerve(degree).into_iter().map(|c| {
            let v = f(&c);
            (c, v)
        });
        Self::new(degree, values.collect())
    }

    pub fn trivial(g: &FiniteGroupoid, degree: usize) -> Self {
        Self::from_fn(g, degree, |_| Complex64::new(1.0, 0.0)).expect("unit values")
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn get(&self, chain: &[ArrowId]) -> Option<Complex64> {
        self.values.get(chain).copied()
    }

    pub fn values(&self) -> &BTreeMap<Vec<ArrowId>, Complex64> {
        &self.values
    }

    /// Replace one value (bypasses nothing: the modulus is still checked).
    pub fn with_value(mut self, chain: Vec<ArrowId>, value: Complex64) -> Result<Self, GroupoidError> {
        let modulus = value.norm();
        if (modulus - 1.0).abs() > PHASE_MODULUS_TOL {
            return Err(GroupoidError::NotUnitModulus { chain, modulus });
        }
        self.values.insert(chain, value);
        Ok(self)
    }

    fn at(&self, chain: &[ArrowId]) -> Result<Complex64, GroupoidError> {
        self.get(chain).ok_or_else(|| GroupoidError::MissingValue(chain.to_vec()))
    }

    /// A 2-cochain is normalized when it is 1 whenever either argument is a unit.
    pub fn is_normalized(&self, g: &FiniteGroupoid, tol: f64) -> bool {
        self.degree == 2
            && self.values.iter().all(|(c, v)| {
                !(g.is_unit(c[0]) || g.is_unit(c[1])) || (v - Complex64::new(1.0, 0.0)).norm() <= tol
            })
    }
}

/// Multiplicative simplicial coboundary.
///
/// Degree 1: `(δc)(γ,η) = c(η) c(γη)⁻¹ c(γ)`.
/// Degree 2: `(δσ)(γ,η,ζ) = σ(η,ζ) σ(γη,ζ)⁻¹ σ(γ,ηζ) σ(γ,η)⁻¹`.
pub fn coboundary(g: &FiniteGroupoid, c: &PhaseCochain) -> Result<PhaseCochain, GroupoidError> {
    let compose = |a, b| g.mult(a, b).ok_or(GroupoidError::MissingValue(vec![a, b]));
    let mut out = BTreeMap::new();
    match c.degree {
        1 => {
            for chain in g.nerve(2) {
                let (a, b) = (chain[0], chain[1]);
                let ab = compose(a, b)?;
                let v = c.at(&[b])? * c.at(&[ab])?.conj() * c.at(&[a])?;
                out.insert(chain, v / v.norm());
            }
        }
        2 => {
            for chain in g.nerve(3) {
                let v = face_product(g, c, &chain)?;
                out.insert(chain, v / v.norm());
            }
        }
        d => return Err(GroupoidError::UnsupportedDegree(d)),
    }
    PhaseCochain::new(c.degree + 1, out)
}

fn face_product(g: &FiniteGroupoid, s: &PhaseCochain, chain: &[ArrowId]) -> Result<Complex64, GroupoidError> {
    let (a, b, c) = (chain[0], chain[1], chain[2]);
    let ab = g.mult(a, b).ok_or(GroupoidError::MissingValue(vec![a, b]))?;
    let bc = g.mult(b, c).ok_or(GroupoidError::MissingValue(vec![b, c]))?;
    Ok(s.at(&[b, c])? * s.at(&[ab, c])?.conj() * s.at(&[a, bc])? * s.at(&[a, b])?.conj())
}

#[derive(Debug, Clone, PartialEq)]
pub struct CocycleCheck {
    pub holds: bool,
    pub max_residual: f64,
    /// The composable triple attaining the largest residual.
    pub worst: Option<[ArrowId; 3]>,
}

/// Check `δσ = 1` on every composable triple, reporting `max |δσ − 1|`.
pub fn is_cocycle(g: &FiniteGroupoid, sigma: &PhaseCochain, tol: f64) -> Result<CocycleCheck, GroupoidError> {
    if sigma.degree != 2 {
        return Err(GroupoidError::UnsupportedDegree(sigma.degree));
    }
    let mut max_residual = 0.0;
    let mut worst = None;
    for chain in g.nerve(3) {
        let r = (face_product(g, sigma, &chain)? - 1.0).norm();
        if r > max_residual {
            max_residual = r;
            worst = Some([chain[0], chain[1], chain[2]]);
        }
    }
    Ok(CocycleCheck {
        holds: max_residual <= tol,
        max_residual,
        worst,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groupoid::{group_groupoid, pair_groupoid, GroupTable};

    fn phase(t: f64) -> Complex64 {
        Complex64::from_polar(1.0, t)
    }

    #[test]
    fn coboundary_of_one_cochain_is_a_cocycle() {
        let g = pair_groupoid(3);
        let c = PhaseCochain::from_fn(&g, 1, |a| phase(0.37 * a[0] as f64 + 0.1)).unwrap();
        let dc = coboundary(&g, &c).unwrap();
        let check = is_cocycle(&g, &dc, 1e-12).unwrap();
        assert!(check.holds, "{check:?}");
        let ddc = coboundary(&g, &dc).unwrap();
        for v in ddc.values().values() {
            assert!((v - 1.0).norm() < 1e-12);
        }
    }

    #[test]
    fn perturbed_cocycle_is_detected() {
        let g = group_groupoid(&GroupTable::cyclic(3));
        let s = PhaseCochain::trivial(&g, 2).with_value(vec![1, 1], phase(0.5)).unwrap();
        let check = is_cocycle(&g, &s, 1e-10).unwrap();
        assert!(!check.holds);
        assert!(check.max_residual > 0.1);
    }

    #[test]
    fn degree_three_coboundary_is_rejected() {
        let g = pair_groupoid(2);
        let c = PhaseCochain::trivial(&g, 3);
        assert_eq!(coboundary(&g, &c), Err(GroupoidError::UnsupportedDegree(3)));
    }

    #[test]
    fn missing_values_are_errors_not_failures() {
        let g = pair_groupoid(2);
        let mut partial = PhaseCochain::trivial(&g, 2).values().clone();
        let first = partial.keys().next().unwrap().clone();
        partial.remove(&first);
        let s = PhaseCochain::new(2, partial).unwrap();
        assert!(matches!(is_cocycle(&g, &s, 1e-10), Err(GroupoidError::MissingValue(_))));
    }

    #[test]
    fn non_unit_values_are_rejected() {
        let g = pair_groupoid(1);
        let r = PhaseCochain::from_fn(&g, 1, |_| Complex64::new(2.0, 0.0));
        assert!(matches!(r, Err(GroupoidError::NotUnitModulus { .. })));
    }
}
