//! Prequantization data on explicit symplectic groupoids: symplectic
//! potentials, the coboundary `∂*θ` and the reduced cocycle it induces,
//! holonomy along polarization leaves, and Bohr–Sommerfeld reduction.

mod cocycle;
mod holonomy;
mod reduction;

use num_complex::Complex;
use thiserror::Error;

use crate::groupoid::GroupoidError;
use crate::linalg::Matrix;
use crate::poly::{OneForm, Polynomial, TwoForm};
use crate::scalar::Scalar;
use crate::symplectic::{AffineMap, LinearSymplecticGroupoid, PolarizationKind, PolarizationSpec};

pub use cocycle::{
    reduced_cocycle_from_phi, Bicharacter, LatticeCocycleCheck, PhaseScale, ReducedCocycle, LATTICE_WINDOW_RADIUS,
};
pub use holonomy::{bs_levels, holonomy, holonomy_forced_quadrature, Holonomy, HolonomyMethod, Loop, DEFAULT_NODES};
pub use reduction::{bs_reduce, BsCase, BsReduction, ReducedGroupoid, Twist};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PrequantError {
    #[error("potential lives on {found} variables, groupoid chart has {expected}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("φ is not bilinear in (y, y'): offending monomial {0}")]
    NotBilinear(String),
    #[error("loop is not closed: endpoint gap {gap:.3e}")]
    OpenPath { gap: f64 },
    #[error("non-polynomial coefficient: {0}")]
    NonPolynomial(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error(transparent)]
    Groupoid(#[from] GroupoidError),
}

/// A 1-form on `Σ` in `(x¹..x^d, y₁..y_d)` coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticPotential<S: Scalar> {
    pub form: OneForm<S>,
}

impl<S: Scalar> SymplecticPotential<S> {
    pub fn new(form: OneForm<S>) -> Self {
        SymplecticPotential { form }
    }

    pub fn zero(d: usize) -> Self {
        Self::new(OneForm::zero(2 * d))
    }

    /// `θ = −x^i dy_i`, adapted to the horizontal polarization.
    pub fn minus_x_dy(d: usize) -> Self {
        let mut form = OneForm::zero(2 * d);
        for i in 0..d {
            form.coeffs[d + i] = -&Polynomial::var(2 * d, i);
        }
        Self::new(form)
    }

    /// `θ = y_i dx^i`.
    pub fn y_dx(d: usize) -> Self {
        let mut form = OneForm::zero(2 * d);
        for i in 0..d {
            form.coeffs[i] = Polynomial::var(2 * d, d + i);
        }
        Self::new(form)
    }

    /// `θ + df`.
    pub fn gauge_shift(&self, f: &Polynomial<S>) -> Self {
        Self::new(&self.form + &OneForm::exact(f))
    }

    pub fn nvars(&self) -> usize {
        self.form.nvars()
    }
}

fn ensure_dims<S: Scalar>(theta: &SymplecticPotential<S>, g: &LinearSymplecticGroupoid<S>) -> Result<(), PrequantError> {
    if theta.nvars() != 2 * g.dim() {
        return Err(PrequantError::DimensionMismatch {
            expected: 2 * g.dim(),
            found: theta.nvars(),
        });
    }
    Ok(())
}

/// Residuals of the two defining conditions `dθ = −ω` and `1*θ = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialCheck<S: Scalar> {
    /// `dθ + ω`.
    pub exterior: TwoForm<S>,
    /// Pullback of `θ` to the unit section.
    pub unit: OneForm<S>,
}

impl<S: Scalar> PotentialCheck<S> {
    pub fn passed(&self, tol: f64) -> bool {
        self.exterior.is_negligible(tol) && self.unit.is_negligible(tol)
    }

    pub fn max_residual(&self) -> f64 {
        self.exterior.max_abs_coefficient().max(self.unit.max_abs_coefficient())
    }
}

pub fn check_potential<S: Scalar>(
    theta: &SymplecticPotential<S>,
    g: &LinearSymplecticGroupoid<S>,
) -> Result<PotentialCheck<S>, PrequantError> {
    ensure_dims(theta, g)?;
    let omega = TwoForm::from_matrix(&g.omega);
    Ok(PotentialCheck {
        exterior: &theta.form.d() + &omega,
        unit: pull_one(&theta.form, &g.unit),
    })
}

/// `θ` vanishes on the real and imaginary parts of every basis vector of `P`.
pub fn is_adapted<S: Scalar>(theta: &SymplecticPotential<S>, p: &PolarizationSpec<S>) -> Result<bool, PrequantError> {
    if p.kind == PolarizationKind::LieSubspace {
        return Err(PrequantError::Unsupported(
            "adaptedness is only checked against constant subspaces".into(),
        ));
    }
    if p.ambient_dim() != theta.nvars() {
        return Err(PrequantError::DimensionMismatch {
            expected: p.ambient_dim(),
            found: theta.nvars(),
        });
    }
    Ok(p.basis.iter().all(|v| {
        let re: Vec<S> = v.iter().map(|z: &Complex<S>| z.re.clone()).collect();
        let im: Vec<S> = v.iter().map(|z| z.im.clone()).collect();
        theta.form.contract(&re).is_zero() && theta.form.contract(&im).is_zero()
    }))
}

fn pull_one<S: Scalar>(form: &OneForm<S>, map: &AffineMap<S>) -> OneForm<S> {
    // structure maps of linear groupoids have no offsets
    debug_assert!(map.offset.iter().all(|c| c.is_zero()));
    form.pullback_linear(&map.matrix)
}

fn pull_two<S: Scalar>(form: &TwoForm<S>, map: &AffineMap<S>) -> TwoForm<S> {
    debug_assert!(map.offset.iter().all(|c| c.is_zero()));
    form.pullback_linear(&map.matrix)
}

/// `pr₁*β − m*β + pr₂*β` for a 2-form on `Σ`.
pub fn coboundary_two_form<S: Scalar>(beta: &TwoForm<S>, g: &LinearSymplecticGroupoid<S>) -> TwoForm<S> {
    &(&pull_two(beta, &g.pr1) - &pull_two(beta, &g.m)) + &pull_two(beta, &g.pr2)
}

#[derive(Debug, Clone, PartialEq)]
pub enum CoboundaryStatus<S: Scalar> {
    /// `∂*θ = dφ` with `φ` vanishing at the origin of `Σ₂`.
    Exact(Polynomial<S>),
    /// Closed, but the primitive failed verification (only possible in
    /// floating point).
    ClosedNotIntegrated { residual: f64 },
    NotClosed { residual: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoboundaryPotential<S: Scalar> {
    /// `∂*θ` on the `(x, y, y')` chart of `Σ₂`.
    pub form: OneForm<S>,
    pub status: CoboundaryStatus<S>,
}

impl<S: Scalar> CoboundaryPotential<S> {
    pub fn phi(&self) -> Option<&Polynomial<S>> {
        match &self.status {
            CoboundaryStatus::Exact(phi) => Some(phi),
            _ => None,
        }
    }
}

pub fn coboundary_potential<S: Scalar>(
    theta: &SymplecticPotential<S>,
    g: &LinearSymplecticGroupoid<S>,
    tol: f64,
) -> Result<CoboundaryPotential<S>, PrequantError> {
    ensure_dims(theta, g)?;
    let form = &(&pull_one(&theta.form, &g.pr1) - &pull_one(&theta.form, &g.m)) + &pull_one(&theta.form, &g.pr2);
    let curvature = form.d();
    let status = if !curvature.is_negligible(tol) {
        CoboundaryStatus::NotClosed {
            residual: curvature.max_abs_coefficient(),
        }
    } else {
        let phi = form.radial_primitive();
        let check = &OneForm::exact(&phi) - &form;
        if check.is_negligible(tol) {
            CoboundaryStatus::Exact(phi)
        } else {
            CoboundaryStatus::ClosedNotIntegrated {
                residual: check.max_abs_coefficient(),
            }
        }
    };
    Ok(CoboundaryPotential { form, status })
}

/// `Σ_{ij} Φ_ij y_i y'_j` on the `(x, y, y')` chart; used as an oracle.
pub fn bilinear_phi<S: Scalar>(phi: &Matrix<S>) -> Polynomial<S> {
    let d = phi.rows();
    let n = 3 * d;
    let mut out = Polynomial::zero(n);
    for i in 0..d {
        for j in 0..d {
            let mut e = vec![0; n];
            e[d + i] += 1;
            e[2 * d + j] += 1;
            out.add_term(e, phi[(i, j)].clone());
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poisson::ConstantPoisson;
    use crate::scalar::Rational;
    use rand::{Rng, SeedableRng};

    fn q(n: i64) -> Rational {
        Rational::from_int(n)
    }

    fn random_pi(rng: &mut impl Rng, d: usize) -> ConstantPoisson<Rational> {
        let mut m = Matrix::zeros(d, d);
        for i in 0..d {
            for j in i + 1..d {
                let v = Rational::from_ratio(rng.gen_range(-9..=9), rng.gen_range(1..=7));
                m[(i, j)] = v.clone();
                m[(j, i)] = -v;
            }
        }
        ConstantPoisson::new(m).unwrap()
    }

    #[test]
    fn standard_potentials_pass_and_zero_fails() {
        let g = LinearSymplecticGroupoid::build_constant(ConstantPoisson::planar(q(1)));
        assert!(check_potential(&SymplecticPotential::minus_x_dy(2), &g).unwrap().passed(0.0));
        assert!(check_potential(&SymplecticPotential::y_dx(2), &g).unwrap().passed(0.0));
        let zero = check_potential(&SymplecticPotential::zero(2), &g).unwrap();
        assert!(!zero.passed(0.0));
        assert_eq!(zero.exterior, TwoForm::from_matrix(&g.omega));
    }

    #[test]
    fn adaptedness_by_pairing() {
        let h = PolarizationSpec::<Rational>::horizontal(2);
        let v = PolarizationSpec::<Rational>::vertical(2);
        assert!(is_adapted(&SymplecticPotential::minus_x_dy(2), &h).unwrap());
        assert!(is_adapted(&SymplecticPotential::y_dx(2), &v).unwrap());
        assert!(!is_adapted(&SymplecticPotential::y_dx(2), &h).unwrap());
        assert!(!is_adapted(&SymplecticPotential::minus_x_dy(2), &v).unwrap());
    }

    #[test]
    fn coboundary_of_standard_potentials_is_bilinear() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for d in 1..=4 {
            let pi = random_pi(&mut rng, d);
            let g = LinearSymplecticGroupoid::build_constant(pi.clone());
            let half = pi.matrix().scale(&Rational::from_ratio(1, 2));
            let a = coboundary_potential(&SymplecticPotential::minus_x_dy(d), &g, 0.0).unwrap();
            assert_eq!(a.phi(), Some(&bilinear_phi(&half)));
            let b = coboundary_potential(&SymplecticPotential::y_dx(d), &g, 0.0).unwrap();
            assert_eq!(b.phi(), Some(&bilinear_phi(&-half)));
        }
    }

    #[test]
    fn trivial_poisson_gives_zero_coboundary() {
        let g = LinearSymplecticGroupoid::build_constant(ConstantPoisson::<Rational>::zero(3));
        let c = coboundary_potential(&SymplecticPotential::minus_x_dy(3), &g, 0.0).unwrap();
        assert!(c.form.is_negligible(0.0));
        assert_eq!(c.phi(), Some(&Polynomial::zero(9)));
    }

    #[test]
    fn coboundary_commutes_with_d() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let g = LinearSymplecticGroupoid::build_constant(random_pi(&mut rng, 2));
        let f = Polynomial::from_terms(4, [(vec![2, 0, 1, 0], q(3)), (vec![0, 1, 1, 1], q(-2))]);
        let theta = SymplecticPotential::minus_x_dy(2).gauge_shift(&f);
        let lhs = coboundary_potential(&theta, &g, 0.0).unwrap().form.d();
        let rhs = coboundary_two_form(&theta.form.d(), &g);
        assert!((&lhs - &rhs).is_negligible(0.0));
        assert!(rhs.is_negligible(0.0));
    }

    #[test]
    fn non_closed_coboundary_is_reported() {
        let g = LinearSymplecticGroupoid::build_constant(ConstantPoisson::planar(q(1)));
        let mut form = OneForm::zero(4);
        form.coeffs[0] = &Polynomial::var(4, 0) * &Polynomial::var(4, 2);
        let c = coboundary_potential(&SymplecticPotential::new(form), &g, 0.0).unwrap();
        assert!(matches!(c.status, CoboundaryStatus::NotClosed { .. }));
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let g = LinearSymplecticGroupoid::build_constant(ConstantPoisson::planar(q(1)));
        assert!(check_potential(&SymplecticPotential::minus_x_dy(1), &g).is_err());
    }
}
