//! Constant, linear and polynomial Poisson bivectors: Jacobi residuals,
//! brackets, the real-polarization normal form and su(2)* leaf periods.

mod bracket;
mod json;
mod leaf;
mod normal_form;

use std::collections::BTreeMap;

use thiserror::Error;

use crate::linalg::Matrix;
use crate::poly::Polynomial;
use crate::scalar::Scalar;

pub use bracket::{bracket, poisson_bracket, Observable, TrigPolynomial};
pub use json::{parse_poisson_spec, poisson_spec_json};
pub use leaf::{is_prequantizable, leaf_period, LeafPeriod, LEAF_PERIOD_TOL};
pub use normal_form::{check_real_polarization_normal_form, Condition, NormalFormReport, Offense, RealPolarizationChart};

/// Default cap on the polynomial degree of `π^{ij}` for symbolic checks.
pub const DEFAULT_DEGREE_CAP: u32 = 4;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PoissonError {
    #[error("bivector is not antisymmetric at ({0}, {1})")]
    NotAntisymmetric(usize, usize),
    #[error("index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },
    #[error("polynomial degree {degree} exceeds the cap {cap}")]
    DegreeCapExceeded { degree: u32, cap: u32 },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("cannot bracket a {0} with a {1}")]
    MixedClasses(&'static str, &'static str),
    #[error("unsupported input: {0}")]
    Unsupported(String),
    #[error("invalid chart: {0}")]
    InvalidChart(String),
    #[error("malformed poisson spec: {0}")]
    Spec(String),
}

/// Constant bivector `π^{ij}` on `ℝ^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstantPoisson<S: Scalar> {
    pi: Matrix<S>,
}

impl<S: Scalar> ConstantPoisson<S> {
    /// Antisymmetry is checked exactly, also for floats.
    pub fn new(pi: Matrix<S>) -> Result<Self, PoissonError> {
        if pi.rows() != pi.cols() {
            return Err(PoissonError::DimensionMismatch(format!("{}×{} matrix", pi.rows(), pi.cols())));
        }
        for i in 0..pi.rows() {
            for j in i..pi.cols() {
                if pi[(i, j)] != -pi[(j, i)].clone() {
                    return Err(PoissonError::NotAntisymmetric(i, j));
                }
            }
        }
        Ok(ConstantPoisson { pi })
    }

    pub fn zero(d: usize) -> Self {
        ConstantPoisson { pi: Matrix::zeros(d, d) }
    }

    /// `d = 2` structure with `π^{12} = c`.
    pub fn planar(c: S) -> Self {
        let mut pi = Matrix::zeros(2, 2);
        pi[(0, 1)] = c.clone();
        pi[(1, 0)] = -c;
        ConstantPoisson { pi }
    }

    pub fn dim(&self) -> usize {
        self.pi.rows()
    }

    pub fn matrix(&self) -> &Matrix<S> {
        &self.pi
    }

    pub fn is_zero(&self) -> bool {
        self.pi.is_zero(0.0)
    }

    pub fn to_polynomial(&self) -> PolynomialPoisson<S> {
        let d = self.dim();
        let comps = (0..d)
            .flat_map(|i| (i + 1..d).map(move |j| (i, j)))
            .map(|(i, j)| ((i, j), Polynomial::constant(d, self.pi[(i, j)].clone())));
        PolynomialPoisson::new(d, comps).expect("constant bivector is antisymmetric")
    }
}

/// Lie–Poisson structure `{x_i, x_j} = Σ_k c_{ij}^k x_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearPoisson<S: Scalar> {
    dim: usize,
    /// Keys `(i, j, k)` with `i < j`; zero entries are not stored.
    c: BTreeMap<(usize, usize, usize), S>,
}

impl<S: Scalar> LinearPoisson<S> {
    /// Entries may be given for `(i, j)` or `(j, i)`; both given must be antisymmetric.
    pub fn new(dim: usize, entries: &[(usize, usize, usize, S)]) -> Result<Self, PoissonError> {
        let mut c: BTreeMap<(usize, usize, usize), S> = BTreeMap::new();
        let mut seen = BTreeMap::new();
        for (i, j, k, v) in entries.iter().cloned() {
            for index in [i, j, k] {
                if index >= dim {
                    return Err(PoissonError::IndexOutOfRange { index, dim });
                }
            }
            if i == j {
                if !v.is_zero() {
                    return Err(PoissonError::NotAntisymmetric(i, j));
                }
                continue;
            }
            let (key, val) = if i < j { ((i, j, k), v) } else { ((j, i, k), -v) };
            if let Some(prev) = seen.insert(key, val.clone()) {
                if prev != val {
                    return Err(PoissonError::NotAntisymmetric(i, j));
                }
            }
            if !val.is_zero() {
                c.insert(key, val);
            }
        }
        Ok(LinearPoisson { dim, c })
    }

    /// `su(2)*` with `c_{ij}^k = λ ε_{ijk}`.
    pub fn su2(lambda: S) -> Self {
        let e = [(0, 1, 2), (1, 2, 0), (2, 0, 1)];
        let entries: Vec<_> = e.iter().map(|&(i, j, k)| (i, j, k, lambda.clone())).collect();
        Self::new(3, &entries).expect("su(2) constants")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `c_{ij}^k`, antisymmetric in `(i, j)`.
    pub fn constant(&self, i: usize, j: usize, k: usize) -> S {
        use std::cmp::Ordering::*;
        match i.cmp(&j) {
            Equal => S::zero(),
            Less => self.c.get(&(i, j, k)).cloned().unwrap_or_else(S::zero),
            Greater => -self.c.get(&(j, i, k)).cloned().unwrap_or_else(S::zero),
        }
    }

    /// Replace `c_{ij}^k` (and with it `c_{ji}^k`).
    pub fn with_constant(&self, i: usize, j: usize, k: usize, v: S) -> Result<Self, PoissonError> {
        let mut entries: Vec<_> = self
            .c
            .iter()
            .filter(|(&key, _)| key != (i.min(j), i.max(j), k))
            .map(|(&(a, b, c), v)| (a, b, c, v.clone()))
            .collect();
        entries.push((i, j, k, v));
        Self::new(self.dim, &entries)
    }

    pub fn to_polynomial(&self) -> PolynomialPoisson<S> {
        let d = self.dim;
        let mut comps: BTreeMap<(usize, usize), Polynomial<S>> = BTreeMap::new();
        for (&(i, j, k), v) in &self.c {
            let entry = comps.entry((i, j)).or_insert_with(|| Polynomial::zero(d));
            *entry = &*entry + &Polynomial::var(d, k).scale(v);
        }
        PolynomialPoisson::new(d, comps).expect("i < j keys")
    }
}

/// Bivector with polynomial components; only `i < j` is stored.
#[derive(Debug, Clone, PartialEq)]
pub struct PolynomialPoisson<S: Scalar> {
    dim: usize,
    comps: BTreeMap<(usize, usize), Polynomial<S>>,
}

impl<S: Scalar> PolynomialPoisson<S> {
    /// Components given for `(j, i)` with `j > i` are stored negated.
    pub fn new(
        dim: usize,
        comps: impl IntoIterator<Item = ((usize, usize), Polynomial<S>)>,
    ) -> Result<Self, PoissonError> {
        let mut out: BTreeMap<(usize, usize), Polynomial<S>> = BTreeMap::new();
        for ((i, j), p) in comps {
            for index in [i, j] {
                if index >= dim {
                    return Err(PoissonError::IndexOutOfRange { index, dim });
                }
            }
            if p.nvars() != dim {
                return Err(PoissonError::DimensionMismatch(format!(
                    "component ({i}, {j}) has {} variables, expected {dim}",
                    p.nvars()
                )));
            }
            if i == j {
                if !p.is_zero() {
                    return Err(PoissonError::NotAntisymmetric(i, j));
                }
                continue;
            }
            let (key, p) = if i < j { ((i, j), p) } else { ((j, i), -&p) };
            let entry = out.entry(key).or_insert_with(|| Polynomial::zero(dim));
            *entry = &*entry + &p;
        }
        out.retain(|_, p| !p.is_zero());
        Ok(PolynomialPoisson { dim, comps: out })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> Polynomial<S> {
        use std::cmp::Ordering::*;
        match i.cmp(&j) {
            Equal => Polynomial::zero(self.dim),
            Less => self.comps.get(&(i, j)).cloned().unwrap_or_else(|| Polynomial::zero(self.dim)),
            Greater => self.comps.get(&(j, i)).map(|p| -p).unwrap_or_else(|| Polynomial::zero(self.dim)),
        }
    }

    pub fn components(&self) -> impl Iterator<Item = (&(usize, usize), &Polynomial<S>)> {
        self.comps.iter()
    }

    pub fn degree(&self) -> u32 {
        self.comps.values().filter_map(Polynomial::degree).max().unwrap_or(0)
    }

    /// The constant matrix when every component is constant.
    pub fn as_constant(&self) -> Option<ConstantPoisson<S>> {
        if self.degree() > 0 {
            return None;
        }
        let d = self.dim;
        let m = Matrix::from_fn(d, d, |i, j| self.get(i, j).coefficient(&vec![0; d]));
        ConstantPoisson::new(m).ok()
    }
}

/// Any of the three supported bivector classes.
#[derive(Debug, Clone, PartialEq)]
pub enum PoissonStructure<S: Scalar> {
    Constant(ConstantPoisson<S>),
    Linear(LinearPoisson<S>),
    Polynomial(PolynomialPoisson<S>),
}

impl<S: Scalar> PoissonStructure<S> {
    pub fn dim(&self) -> usize {
        match self {
            PoissonStructure::Constant(p) => p.dim(),
            PoissonStructure::Linear(p) => p.dim(),
            PoissonStructure::Polynomial(p) => p.dim(),
        }
    }

    pub fn to_polynomial(&self) -> PolynomialPoisson<S> {
        match self {
            PoissonStructure::Constant(p) => p.to_polynomial(),
            PoissonStructure::Linear(p) => p.to_polynomial(),
            PoissonStructure::Polynomial(p) => p.clone(),
        }
    }

    pub fn as_constant(&self) -> Option<ConstantPoisson<S>> {
        match self {
            PoissonStructure::Constant(p) => Some(p.clone()),
            other => other.to_polynomial().as_constant(),
        }
    }
}

/// Symbolic residual of the Jacobi identity, `J^{ijk} = Σ_l (π^{il}∂_lπ^{jk} + cyclic)`.
#[derive(Debug, Clone, PartialEq)]
pub struct JacobiResidual<S: Scalar> {
    /// Components for `i < j < k`; the tensor is totally antisymmetric.
    pub components: BTreeMap<(usize, usize, usize), Polynomial<S>>,
    pub max_abs: f64,
}

impl<S: Scalar> JacobiResidual<S> {
    pub fn is_zero(&self, tol: f64) -> bool {
        self.components.values().all(|p| p.is_negligible(tol))
    }
}

/// One component of the Jacobiator, for arbitrary index order.
pub fn jacobi_component<S: Scalar>(p: &PolynomialPoisson<S>, i: usize, j: usize, k: usize) -> Polynomial<S> {
    let mut out = Polynomial::zero(p.dim());
    for (a, b, c) in [(i, j, k), (j, k, i), (k, i, j)] {
        for l in 0..p.dim() {
            let term = &p.get(a, l) * &p.get(b, c).derivative(l);
            out = &out + &term;
        }
    }
    out
}

pub fn jacobi_residual<S: Scalar>(p: &PolynomialPoisson<S>) -> Result<JacobiResidual<S>, PoissonError> {
    jacobi_residual_capped(p, DEFAULT_DEGREE_CAP)
}

pub fn jacobi_residual_capped<S: Scalar>(p: &PolynomialPoisson<S>, cap: u32) -> Result<JacobiResidual<S>, PoissonError> {
    let degree = p.degree();
    if degree > cap {
        return Err(PoissonError::DegreeCapExceeded { degree, cap });
    }
    let d = p.dim();
    let mut components = BTreeMap::new();
    let mut max_abs: f64 = 0.0;
    for i in 0..d {
        for j in i + 1..d {
            for k in j + 1..d {
                let c = jacobi_component(p, i, j, k);
                max_abs = max_abs.max(c.max_abs_coefficient());
                components.insert((i, j, k), c);
            }
        }
    }
    Ok(JacobiResidual { components, max_abs })
}
