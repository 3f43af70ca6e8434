use num_complex::Complex;

use super::{LinearSymplecticGroupoid, SymplecticError};
use crate::linalg::{intersect_spans, same_span, sum_spans, Matrix};
use crate::scalar::{complexify, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PolarizationKind {
    /// `span{∂/∂x^i}`: the kernel of the fibration `Σ → V*`, `(x, y) ↦ y`.
    Horizontal,
    /// `span{∂/∂y_i}`: tangent to the fibers of `Σ → V`.
    Vertical,
    ConstantSubspace,
    /// Subspace data on `t*_ℂ ⊕ t_ℂ` for action groupoids; not a distribution
    /// on a linear groupoid, so the linear checks reject it.
    LieSubspace,
}

/// A constant complex subspace `P ⊂ ℂ^{2d}` given by basis columns.
#[derive(Debug, Clone, PartialEq)]
pub struct PolarizationSpec<S: Scalar> {
    pub kind: PolarizationKind,
    pub basis: Vec<Vec<Complex<S>>>,
}

impl<S: Scalar> PolarizationSpec<S> {
    fn unit_vectors(d: usize, offset: usize) -> Vec<Vec<Complex<S>>> {
        (0..d)
            .map(|i| {
                let mut v = vec![complexify(S::zero()); 2 * d];
                v[offset + i] = complexify(S::one());
                v
            })
            .collect()
    }

    pub fn horizontal(d: usize) -> Self {
        PolarizationSpec {
            kind: PolarizationKind::Horizontal,
            basis: Self::unit_vectors(d, 0),
        }
    }

    pub fn vertical(d: usize) -> Self {
        PolarizationSpec {
            kind: PolarizationKind::Vertical,
            basis: Self::unit_vectors(d, d),
        }
    }

    /// Basis vectors must be independent and of equal length.
    pub fn constant(basis: Vec<Vec<Complex<S>>>, tol: f64) -> Result<Self, SymplecticError> {
        let n = basis.first().map_or(0, Vec::len);
        if basis.iter().any(|v| v.len() != n) {
            return Err(SymplecticError::Invalid("basis vectors of different lengths".into()));
        }
        if Matrix::from_columns(n, &basis).rank(tol) != basis.len() {
            return Err(SymplecticError::Invalid("polarization basis is linearly dependent".into()));
        }
        Ok(PolarizationSpec {
            kind: PolarizationKind::ConstantSubspace,
            basis,
        })
    }

    pub fn lie(basis: Vec<Vec<Complex<S>>>) -> Self {
        PolarizationSpec {
            kind: PolarizationKind::LieSubspace,
            basis,
        }
    }

    pub fn ambient_dim(&self) -> usize {
        self.basis.first().map_or(0, Vec::len)
    }

    pub fn matrix(&self) -> Matrix<Complex<S>> {
        Matrix::from_columns(self.ambient_dim(), &self.basis)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolarizationReport {
    /// Constant distributions are involutive automatically.
    pub involutive: bool,
    pub lagrangian: bool,
    pub hermitian: bool,
    pub multiplicative: bool,
    pub rank_p: usize,
    pub rank_d: usize,
    pub rank_e: usize,
    /// Max-abs entry of `ω` restricted to `P`.
    pub isotropy_residual: f64,
}

impl PolarizationReport {
    pub fn passed(&self) -> bool {
        self.involutive && self.lagrangian && self.hermitian && self.multiplicative
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeReport<S: Scalar> {
    pub d_basis: Vec<Vec<Complex<S>>>,
    pub e_basis: Vec<Vec<Complex<S>>>,
    pub rank_d: usize,
    pub rank_e: usize,
}

/// `D = P ∩ P̄` and `E = P + P̄`.
pub fn derive_de<S: Scalar>(p: &PolarizationSpec<S>, tol: f64) -> DeReport<S> {
    let b = p.matrix();
    let d_basis = intersect_spans(&b, &b.conj(), tol);
    let e_basis = sum_spans(&b, &b.conj(), tol);
    DeReport {
        rank_d: d_basis.len(),
        rank_e: e_basis.len(),
        d_basis,
        e_basis,
    }
}

fn complexified<S: Scalar>(m: &Matrix<S>) -> Matrix<Complex<S>> {
    m.map(|x| complexify(x.clone()))
}

/// Lagrangian, Hermitian (`T inv(P) = P̄`) and multiplicative
/// (`Tm(P₂) = P` with `P₂ = (P × P) ∩ TΣ₂`) checks by exact linear algebra.
pub fn check_polarization<S: Scalar>(
    g: &LinearSymplecticGroupoid<S>,
    p: &PolarizationSpec<S>,
    tol: f64,
) -> Result<PolarizationReport, SymplecticError> {
    if p.kind == PolarizationKind::LieSubspace {
        return Err(SymplecticError::Unsupported(
            "Lie-subspace data is not a constant distribution on a linear groupoid".into(),
        ));
    }
    let d = g.dim();
    if p.ambient_dim() != 2 * d {
        return Err(SymplecticError::Invalid(format!(
            "polarization lives in dimension {}, groupoid in {}",
            p.ambient_dim(),
            2 * d
        )));
    }
    let b = p.matrix();
    let rank_p = b.rank(tol);
    let omega = complexified(&g.omega);
    let restricted = &(&b.transpose() * &omega) * &b;
    let isotropy_residual = restricted.max_magnitude();
    let lagrangian = restricted.is_zero(tol) && rank_p == d;

    let inv = complexified(&g.inv.matrix);
    let hermitian = same_span(&(&inv * &b), &b.conj(), tol);

    // annihilator rows: α with αᵀ b = 0
    let annihilator = b.transpose().kernel(tol);
    let multiplicative = if annihilator.is_empty() {
        true
    } else {
        let q = Matrix::from_rows(annihilator);
        let pr1 = complexified(&g.pr1.matrix);
        let pr2 = complexified(&g.pr2.matrix);
        let constraints = (&q * &pr1).vstack(&(&q * &pr2));
        let p2 = constraints.kernel(tol);
        if p2.is_empty() {
            rank_p == 0
        } else {
            let image = &complexified(&g.m.matrix) * &Matrix::from_columns(3 * d, &p2);
            same_span(&image, &b, tol)
        }
    };
    let de = derive_de(p, tol);
    Ok(PolarizationReport {
        involutive: true,
        lagrangian,
        hermitian,
        multiplicative,
        rank_p,
        rank_d: de.rank_d,
        rank_e: de.rank_e,
        isotropy_residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poisson::ConstantPoisson;
    use crate::scalar::Rational;
    use rand::{Rng, SeedableRng};

    fn c(re: i64, im: i64) -> Complex<Rational> {
        Complex::new(Rational::from_int(re), Rational::from_int(im))
    }

    fn random_pi(rng: &mut impl Rng, d: usize) -> ConstantPoisson<Rational> {
        let mut m = Matrix::zeros(d, d);
        for i in 0..d {
            for j in i + 1..d {
                let v = Rational::from_ratio(rng.gen_range(-5..=5), rng.gen_range(1..=4));
                m[(i, j)] = v.clone();
                m[(j, i)] = -v;
            }
        }
        ConstantPoisson::new(m).unwrap()
    }

    #[test]
    fn fibration_kernel_is_a_polarization_for_every_pi() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        for d in 1..=4 {
            let g = LinearSymplecticGroupoid::build_constant(random_pi(&mut rng, d));
            let r = check_polarization(&g, &PolarizationSpec::horizontal(d), 0.0).unwrap();
            assert!(r.passed(), "{r:?}");
            assert_eq!((r.rank_d, r.rank_e), (d, d));
        }
    }

    #[test]
    fn fiber_direction_is_multiplicative_only_for_zero_pi() {
        let zero = LinearSymplecticGroupoid::build_constant(ConstantPoisson::<Rational>::zero(2));
        assert!(check_polarization(&zero, &PolarizationSpec::vertical(2), 0.0).unwrap().passed());
        let g = LinearSymplecticGroupoid::build_constant(ConstantPoisson::planar(Rational::from_int(1)));
        let r = check_polarization(&g, &PolarizationSpec::vertical(2), 0.0).unwrap();
        assert!(r.lagrangian && r.hermitian);
        assert!(!r.multiplicative);
    }

    #[test]
    fn basis_change_does_not_matter() {
        let g = LinearSymplecticGroupoid::build_constant(ConstantPoisson::planar(Rational::from_ratio(2, 3)));
        let h = PolarizationSpec::<Rational>::horizontal(2);
        let mixed: Vec<Vec<Complex<Rational>>> = vec![
            h.basis[0].iter().zip(&h.basis[1]).map(|(a, b)| a + b * c(3, 0)).collect(),
            h.basis[1].iter().map(|a| a * c(-2, 0)).collect(),
        ];
        let p = PolarizationSpec::constant(mixed, 0.0).unwrap();
        assert!(check_polarization(&g, &p, 0.0).unwrap().passed());
    }

    #[test]
    fn non_lagrangian_plane_fails() {
        let g = LinearSymplecticGroupoid::build_constant(ConstantPoisson::<Rational>::zero(2));
        // span{∂x¹, ∂y₁} carries ω(∂x¹, ∂y₁) = 1
        let p = PolarizationSpec::constant(vec![vec![c(1, 0), c(0, 0), c(0, 0), c(0, 0)], vec![c(0, 0), c(0, 0), c(1, 0), c(0, 0)]], 0.0).unwrap();
        let r = check_polarization(&g, &p, 0.0).unwrap();
        assert!(!r.lagrangian);
        assert_eq!(r.isotropy_residual, 1.0);
    }

    #[test]
    fn d_and_e_ranks() {
        // real
        let r = derive_de(&PolarizationSpec::<Rational>::vertical(2), 0.0);
        assert_eq!((r.rank_d, r.rank_e), (2, 2));
        // totally complex on ℝ²
        let k = PolarizationSpec::constant(vec![vec![c(1, 0), c(0, 1)]], 0.0).unwrap();
        let r = derive_de(&k, 0.0);
        assert_eq!((r.rank_d, r.rank_e), (0, 2));
        // span{∂y₁, ∂x² + i∂y₂}
        let mixed = PolarizationSpec::constant(
            vec![vec![c(0, 0), c(0, 0), c(1, 0), c(0, 0)], vec![c(0, 0), c(1, 0), c(0, 0), c(0, 1)]],
            0.0,
        )
        .unwrap();
        let r = derive_de(&mixed, 0.0);
        assert_eq!((r.rank_d, r.rank_e), (1, 3));
    }

    #[test]
    fn lie_data_is_rejected() {
        let g = LinearSymplecticGroupoid::build_constant(ConstantPoisson::<Rational>::zero(1));
        let p = PolarizationSpec::lie(vec![vec![c(1, 0), c(0, 0)]]);
        assert!(matches!(check_polarization(&g, &p, 0.0), Err(SymplecticError::Unsupported(_))));
    }
}
