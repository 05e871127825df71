//! Exact arithmetic: scalars, polynomials, gcds and linear solving.

pub mod gcd;
pub mod linsolve;
pub mod poly;
pub mod scalar;

pub use gcd::{content_in, div_exact, gcd, prem, primitive_part_in, sqrt_poly};
pub use linsolve::{FieldOps, LinSystem, SolutionSpace};
pub use poly::{Monomial, Naming, Poly, Var};
pub use scalar::{Field, Scalar};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AlgebraError {
    #[error("{0} is not a supported prime characteristic")]
    NotPrime(u64),
    #[error("division by zero")]
    DivisionByZero,
    #[error("characteristic mismatch: {0} vs {1}")]
    CharacteristicMismatch(u64, u64),
    #[error("division is not exact")]
    NotExact,
    #[error("expression too large: {terms} terms exceeds the limit of {limit}")]
    SizeGuard { terms: usize, limit: usize },
    #[error("linear system shape mismatch: {0}")]
    Shape(String),
}
