use num_complex::Complex64;
use rand::{Rng, SeedableRng};

use super::PrequantError;
use crate::groupoid::{is_cocycle, FiniteGroupoid, PhaseCochain};
use crate::linalg::Matrix;
use crate::poly::Polynomial;
use crate::scalar::Scalar;

/// Radius of the lattice window `[−r, r]^d` used to verify bicharacters.
pub const LATTICE_WINDOW_RADIUS: i64 = 6;

/// Above this many triples the window check samples instead of enumerating.
const EXHAUSTIVE_LIMIT: usize = 6_000_000;

/// Unit in which `mᵀΦn` is measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhaseScale {
    /// `σ(m, n) = exp(i mᵀΦn)`.
    Radians,
    /// `σ(m, n) = exp(2πi mᵀΦn)`; keeps rational data exact.
    Turns,
}

/// `σ(m, n) = exp(i·scale·mᵀΦn)` on `ℤ^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct Bicharacter<S: Scalar> {
    pub phi: Matrix<S>,
    pub scale: PhaseScale,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LatticeCocycleCheck {
    pub radius: i64,
    pub triples: usize,
    pub exhaustive: bool,
    pub max_residual: f64,
}

impl LatticeCocycleCheck {
    pub fn holds(&self, tol: f64) -> bool {
        self.max_residual <= tol
    }
}

fn dot<S: Scalar>(phi: &Matrix<S>, m: &[i64], n: &[i64]) -> S {
    let mut acc = S::zero();
    for (i, &mi) in m.iter().enumerate() {
        if mi == 0 {
            continue;
        }
        for (j, &nj) in n.iter().enumerate() {
            if nj != 0 {
                acc = acc + phi[(i, j)].clone() * S::from_int(mi * nj);
            }
        }
    }
    acc
}

impl<S: Scalar> Bicharacter<S> {
    pub fn new(phi: Matrix<S>, scale: PhaseScale) -> Self {
        assert_eq!(phi.rows(), phi.cols(), "bicharacter matrix must be square");
        Bicharacter { phi, scale }
    }

    pub fn trivial(d: usize) -> Self {
        Self::new(Matrix::zeros(d, d), PhaseScale::Turns)
    }

    pub fn rank(&self) -> usize {
        self.phi.rows()
    }

    pub fn is_trivial(&self) -> bool {
        self.phi.is_zero(0.0)
    }

    pub fn is_antisymmetric(&self) -> bool {
        (&self.phi + &self.phi.transpose()).is_zero(0.0)
    }

    /// `mᵀΦn` in the native scale.
    pub fn exponent(&self, m: &[i64], n: &[i64]) -> S {
        dot(&self.phi, m, n)
    }

    /// Phase angle in radians, reduced exactly modulo a full turn when the
    /// scale is [`PhaseScale::Turns`].
    pub fn angle(&self, m: &[i64], n: &[i64]) -> f64 {
        let e = self.exponent(m, n);
        match self.scale {
            PhaseScale::Radians => e.approx(),
            PhaseScale::Turns => std::f64::consts::TAU * e.rem_euclid_int(1).approx(),
        }
    }

    pub fn phase(&self, m: &[i64], n: &[i64]) -> Complex64 {
        Complex64::from_polar(1.0, self.angle(m, n))
    }

    /// `σ(m, n) / σ(n, m)`.
    pub fn commutator_phase(&self, m: &[i64], n: &[i64]) -> Complex64 {
        self.phase(m, n) / self.phase(n, m)
    }

    /// The matrix `B` with `σ(m, n) = exp(iπ mᵀBn)`, exactly; only available
    /// in turn units (in radians `B = Φ/π` is not in the scalar field).
    pub fn half_turn_matrix(&self) -> Option<Matrix<S>> {
        match self.scale {
            PhaseScale::Turns => Some(self.phi.scale(&S::from_int(2))),
            PhaseScale::Radians => None,
        }
    }

    pub fn half_turn_matrix_f64(&self) -> Matrix<f64> {
        match self.scale {
            PhaseScale::Turns => self.phi.map(|x| 2.0 * x.approx()),
            PhaseScale::Radians => self.phi.map(|x| x.approx() / std::f64::consts::PI),
        }
    }

    /// `|δσ − 1|` over triples in `[−r, r]^d`, exhaustive when small enough.
    pub fn check_on_window(&self, radius: i64) -> LatticeCocycleCheck {
        let d = self.rank();
        let side = (2 * radius + 1) as usize;
        let points: Vec<Vec<i64>> = (0..side.pow(d as u32))
            .map(|mut k| {
                (0..d)
                    .map(|_| {
                        let c = (k % side) as i64 - radius;
                        k /= side;
                        c
                    })
                    .collect()
            })
            .collect();
        let phi = self.phi.map(|x| x.approx());
        let factor = match self.scale {
            PhaseScale::Radians => 1.0,
            PhaseScale::Turns => std::f64::consts::TAU,
        };
        let sigma = |m: &[i64], n: &[i64]| Complex64::from_polar(1.0, factor * dot(&phi, m, n));
        let add = |a: &[i64], b: &[i64]| -> Vec<i64> { a.iter().zip(b).map(|(x, y)| x + y).collect() };
        let residual = |m: &[i64], n: &[i64], p: &[i64]| {
            let v = sigma(n, p) / sigma(&add(m, n), p) * sigma(m, &add(n, p)) / sigma(m, n);
            (v - 1.0).norm()
        };
        let total = points.len().pow(3);
        if total <= EXHAUSTIVE_LIMIT {
            let mut worst: f64 = 0.0;
            for m in &points {
                for n in &points {
                    for p in &points {
                        worst = worst.max(residual(m, n, p));
                    }
                }
            }
            LatticeCocycleCheck {
                radius,
                triples: total,
                exhaustive: true,
                max_residual: worst,
            }
        } else {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x5eed);
            let samples = 200_000;
            let mut worst: f64 = 0.0;
            for _ in 0..samples {
                let pick = |rng: &mut rand_chacha::ChaCha8Rng| &points[rng.gen_range(0..points.len())];
                let (m, n, p) = (pick(&mut rng), pick(&mut rng), pick(&mut rng));
                worst = worst.max(residual(m, n, p));
            }
            LatticeCocycleCheck {
                radius,
                triples: samples,
                exhaustive: false,
                max_residual: worst,
            }
        }
    }
}

/// A reduced cocycle: a lattice bicharacter or a tabulated cochain on a
/// finite reduced groupoid.
#[derive(Debug, Clone, PartialEq)]
pub enum ReducedCocycle<S: Scalar> {
    Bicharacter(Bicharacter<S>),
    Table { groupoid: FiniteGroupoid, cochain: PhaseCochain },
}

impl<S: Scalar> ReducedCocycle<S> {
    /// Worst cocycle residual: on the standard window for bicharacters,
    /// over the whole nerve for tables.
    pub fn max_residual(&self) -> Result<f64, PrequantError> {
        match self {
            ReducedCocycle::Bicharacter(b) => Ok(b.check_on_window(LATTICE_WINDOW_RADIUS).max_residual),
            ReducedCocycle::Table { groupoid, cochain } => {
                Ok(is_cocycle(groupoid, cochain, f64::INFINITY)?.max_residual)
            }
        }
    }
}

/// Read `Φ` off `φ = Σ Φ_ij y_i y'_j` on the `(x, y, y')` chart of a rank-`d`
/// linear groupoid.
pub fn reduced_cocycle_from_phi<S: Scalar>(
    phi: &Polynomial<S>,
    d: usize,
    scale: PhaseScale,
) -> Result<Bicharacter<S>, PrequantError> {
    if phi.nvars() != 3 * d {
        return Err(PrequantError::DimensionMismatch {
            expected: 3 * d,
            found: phi.nvars(),
        });
    }
    let mut m = Matrix::zeros(d, d);
    for (e, c) in phi.terms() {
        let x: u32 = e[..d].iter().sum();
        let y: u32 = e[d..2 * d].iter().sum();
        let y2: u32 = e[2 * d..].iter().sum();
        if x != 0 || y != 1 || y2 != 1 {
            return Err(PrequantError::NotBilinear(format!("{e:?}")));
        }
        let i = e[d..2 * d].iter().position(|&k| k == 1).expect("degree one in y");
        let j = e[2 * d..].iter().position(|&k| k == 1).expect("degree one in y'");
        m[(i, j)] = c.clone();
    }
    Ok(Bicharacter::new(m, scale))
}
