//! Finite and linear models of symplectic groupoid quantization: groupoids
//! and cochains, Poisson structures, twists, Bohr–Sommerfeld reduction and
//! the resulting twisted convolution algebras.

pub mod algebra;
pub mod deformation;
pub mod groupoid;
pub mod linalg;
pub mod numfmt;
pub mod pipeline;
pub mod poisson;
pub mod poly;
pub mod prequant;
pub mod scalar;
pub mod symplectic;

pub use scalar::{Field, Rational, Scalar};

pub type PolynomialQ = poly::Polynomial<Rational>;
pub type PolynomialF = poly::Polynomial<f64>;
pub type LatticeAlgebraQ = algebra::LatticeAlgebra<Rational>;
pub type LatticeAlgebraF = algebra::LatticeAlgebra<f64>;
pub type LatticeElementQ = algebra::LatticeElement<Rational>;
pub type LatticeElementF = algebra::LatticeElement<f64>;
pub type CrossedActionQ = algebra::CrossedAction<Rational>;
pub type CrossedActionF = algebra::CrossedAction<f64>;
