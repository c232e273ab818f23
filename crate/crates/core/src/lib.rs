//! Kahan discretization of quadratic ODEs, discrete Darboux polynomials and
//! the first integrals, exponential relations and preserved measures they
//! induce in the continuum limit.

pub mod darboux;
pub mod error;
pub mod factor;
pub mod kahan;
pub mod ode;
pub mod poly;
pub mod report;
pub mod structure;
pub mod verify;

pub use error::{Error, Result};
