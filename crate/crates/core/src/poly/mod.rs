//! Exact polynomial arithmetic over the rationals.

pub mod gcd;
pub mod lattice;
pub mod linalg;
mod monomial;
mod multipoly;
mod ratfunc;
mod text;
pub mod upoly;

pub use gcd::{content_in, poly_gcd};
pub use linalg::{nullspace_over_qh, solve_rational, LinearSystem, SolutionSet};
pub use monomial::Monomial;
pub use multipoly::{poly_arith, rational_to_f64, MultiPoly, PolyOp};
pub use ratfunc::{substitute, RationalFunction};
pub use text::{canonical_names, parse_expression, parse_poly, to_canonical_text, to_text_with_names};
pub use upoly::{QPoly, ZPoly};

pub type Rational = num_rational::BigRational;

/// Integer as a rational.
pub fn q(n: i64) -> Rational {
    Rational::from_integer(n.into())
}

/// `n / d` as a rational.
pub fn qr(n: i64, d: i64) -> Rational {
    Rational::new(n.into(), d.into())
}
