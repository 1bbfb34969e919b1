//! Exact arithmetic in the free bigraded-commutative algebra on fields,
//! antifields, ghosts, antighosts and base coordinates.
//!
//! Parity is the total degree `p - q` mod 2; even generators commute, odd ones
//! anticommute and square to zero.

mod generator;
mod poly;
pub mod random;

pub use generator::{Bidegree, Generator, GeneratorKind, MultiIndex};
pub use poly::{
    antifield_decompose, bidegree_decompose, format_rational, graded_partial, multiply, normalize, substitute,
    EvalError, Factors, LocalFunction, Monomial, Side,
};

pub type Rational = num_rational::BigRational;

/// Integer as a rational.
pub fn q(n: i64) -> Rational {
    Rational::from_integer(n.into())
}

/// `n / d` as a rational.
pub fn qq(n: i64, d: i64) -> Rational {
    Rational::new(n.into(), d.into())
}
