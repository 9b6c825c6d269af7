//! Dense complex matrices, matrix polynomials, nilpotent exponentials and
//! the Gaussian–Erf function algebra.

mod expm;
mod gauss_erf;
mod matrix;
mod poly;

pub use expm::{ad_power, nilpotent_exp};
pub use gauss_erf::{AtomKind, GaussErfAtom, GaussErfFunction, GaussErfFunctionMatrix};
pub use matrix::{ComplexMatrix, Matrix};
pub use poly::MatrixPolynomial;
