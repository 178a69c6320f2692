//! Exact arithmetic substrate: rationals, sparse polynomials, integer
//! normal forms, rational row reduction and graded quotient rings.

pub mod graded;
pub mod intmat;
pub mod linalg;
pub mod poly;
pub mod rational;

pub use graded::{GradedError, GradedPiece, GradedQuotient};
pub use intmat::IntMatrix;
pub use linalg::{rref, solve_linear, LinearSolution, Rref};
pub use poly::{Monomial, PolyError, Polynomial};
pub use rational::{format_rational, parse_rational, Rational};
