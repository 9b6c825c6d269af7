//! Hermite-type matrix weights `W(t) = T(t)T*(t)` with `T(t) = e^{𝒜t}e^{𝒟t²}`,
//! their symmetric second-order differential operators, and the matrix
//! orthogonal polynomials they generate.
//!
//! - [`family`]: parameters, structure matrices, the weight and its exact moments.
//! - [`operator`]: the operator `∂²F₂ + ∂F₁ + F₀` and symmetry verification.
//! - [`orthogonalize`]: monic/orthonormal sequences from moments, recurrences.
//! - [`quadrature`]: Gauss–Hermite rules used as an independent oracle.
//! - [`hermite2x2`]: closed forms for the 2×2 family.

pub mod error;
pub mod family;
pub mod hermite2x2;
pub mod linalg;
pub mod operator;
pub mod orthogonalize;
pub mod quadrature;
pub mod scalar;

pub use error::{Error, Result};
pub use family::{StructureMatrices, WeightParams};
pub use linalg::{ComplexMatrix, GaussErfFunctionMatrix, Matrix, MatrixPolynomial};
pub use scalar::{DoubleDouble, ExtendedComplex, Scalar};
