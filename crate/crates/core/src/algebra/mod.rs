//! Twisted convolution algebras and their finite-dimensional shadows:
//! finite groupoid algebras, twisted lattice algebras `C*(ℤ^d, σ)`,
//! crossed products `ℤ^k ⋉ C(T^m)` on sampled grids, and operator norms.
//!
//! All norms are reduced-type: computed in a regular representation,
//! truncated to a finite window where the group is infinite.

mod crossed;
mod finite;
mod lattice;
mod norm;
mod reps;

use std::io::Write;

use nalgebra::DMatrix;
use num_complex::Complex64;
use thiserror::Error;

use crate::groupoid::{ArrowId, GroupoidError};
use crate::numfmt::sci;

pub use crossed::{
    section_conjugation_check, CrossedAction, CrossedElement, CrossedTwist, RelationCheck, SectionCheck,
};
pub use finite::{FiniteAlgebra, FiniteElement};
pub use lattice::{LatticeAlgebra, LatticeElement, DEFAULT_SUPPORT_CAP};
pub use norm::{lanczos_norm, operator_norm, NormEstimate, NormMethod, SparseOperator, DENSE_LIMIT};
pub use reps::{
    clock_shift_rep, finite_regular_rep, truncated_regular_rep, ClockShift, FiniteRegular, TruncatedRep, TruncatedWindow,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AlgebraError {
    #[error("elements belong to different algebras")]
    MismatchedAlgebra,
    #[error("twist has no value on the composable pair ({0}, {1})")]
    MissingTwist(ArrowId, ArrowId),
    #[error("twist must be a 2-cochain, got degree {0}")]
    TwistDegree(usize),
    #[error("twist matrix is not antisymmetric")]
    NotAntisymmetric,
    #[error("expected dimension {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("support radius {radius} exceeds the cap {cap}")]
    SupportCapExceeded { radius: i64, cap: i64 },
    #[error("window radius {window} is smaller than the support radius {support}")]
    WindowTooSmall { window: i64, support: i64 },
    #[error("invalid clock-shift data: {0}")]
    ClockShift(String),
    #[error("the element's twist does not match the representation: {0}")]
    WrongTwist(String),
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("csv export failed: {0}")]
    Csv(String),
    #[error(transparent)]
    Groupoid(#[from] GroupoidError),
}

/// Operations shared by all the convolution algebras.
pub trait StarAlgebra: Sized + Clone {
    fn mul(&self, other: &Self) -> Result<Self, AlgebraError>;
    fn star(&self) -> Self;
    fn is_zero(&self) -> bool;
}

/// A representation that can report operator norms of represented elements.
pub trait Representation<E> {
    fn norm(&self, a: &E) -> Result<f64, AlgebraError>;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RepKind {
    ClockShift,
    TruncatedRegular,
    FiniteGroupoidRegular,
}

impl RepKind {
    pub fn tag(self) -> &'static str {
        match self {
            RepKind::ClockShift => "clock-shift",
            RepKind::TruncatedRegular => "truncated-regular",
            RepKind::FiniteGroupoidRegular => "finite-groupoid-regular",
        }
    }
}

/// Dense matrices for a few designated generators.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixRep {
    pub dim: usize,
    pub generators: Vec<(String, DMatrix<Complex64>)>,
    pub kind: RepKind,
    pub unitary: bool,
}

impl MatrixRep {
    /// `max ‖g*g − 1‖` over generators (entrywise max).
    pub fn unitarity_residual(&self) -> f64 {
        let id = DMatrix::<Complex64>::identity(self.dim, self.dim);
        self.generators
            .iter()
            .map(|(_, g)| (g.adjoint() * g - &id).iter().map(|z| z.norm()).fold(0.0, f64::max))
            .fold(0.0, f64::max)
    }

    pub fn generator(&self, name: &str) -> Option<&DMatrix<Complex64>> {
        self.generators.iter().find(|(n, _)| n == name).map(|(_, g)| g)
    }

    /// One record per matrix row: `generator, row, re_0, im_0, re_1, im_1, …`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), AlgebraError> {
        let err = |e: csv::Error| AlgebraError::Csv(e.to_string());
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["generator".to_string(), "row".to_string()];
        for j in 0..self.dim {
            header.push(format!("re_{j}"));
            header.push(format!("im_{j}"));
        }
        w.write_record(&header).map_err(err)?;
        for (name, g) in &self.generators {
            for i in 0..self.dim {
                let mut rec = vec![name.clone(), i.to_string()];
                for j in 0..self.dim {
                    rec.push(sci(g[(i, j)].re));
                    rec.push(sci(g[(i, j)].im));
                }
                w.write_record(&rec).map_err(err)?;
            }
        }
        w.flush().map_err(|e| AlgebraError::Csv(e.to_string()))
    }
}

/// `|‖ρ(a*a)‖ − ‖ρ(a)‖²| / ‖ρ(a)‖²`, zero for the zero element.
pub fn cstar_identity_check<E: StarAlgebra, R: Representation<E>>(a: &E, rep: &R) -> Result<f64, AlgebraError> {
    if a.is_zero() {
        return Ok(0.0);
    }
    let n = rep.norm(a)?;
    if n == 0.0 {
        return Ok(0.0);
    }
    let nn = rep.norm(&a.star().mul(a)?)?;
    Ok((nn - n * n).abs() / (n * n))
}

fn json_complex(z: Complex64) -> [serde_json::Value; 2] {
    [crate::numfmt::json_float(z.re), crate::numfmt::json_float(z.im)]
}
