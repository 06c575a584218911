//! Orthogonal polynomials of singular measures, Fourier-Bessel functions and
//! the scaling exponents of the quantum evolution they generate.

pub mod dimensions;
pub mod error;
pub mod evolution;
pub mod jacobi;
pub mod measures;
pub mod scaling;

pub use error::{Error, Result};
