use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("{0} is not an odd prime")]
    NotOddPrime(u64),
    #[error("modulus {0} exceeds the supported maximum 2^31")]
    ModulusTooLarge(u64),
    #[error("mixed moduli: {left} and {right}")]
    ModulusMismatch { left: u32, right: u32 },
    #[error("division by zero")]
    DivisionByZero,
    #[error("expected {expected} values, got {actual}")]
    WrongLength { expected: usize, actual: usize },
    #[error("coordinate {value} out of range for p = {p}")]
    OutOfRange { value: u64, p: u32 },
    #[error("identical points have no direction")]
    SamePoint,
    #[error("need at least {needed} points, got {actual}")]
    TooFewPoints { needed: usize, actual: usize },
    #[error("expected a set of {expected} points, got {actual}")]
    WrongCardinality { expected: usize, actual: usize },
    #[error("singular affine map (determinant 0)")]
    SingularTransform,
    #[error("substitution x -> a*x + b requires a != 0")]
    ZeroScale,
    #[error("empty factor set")]
    EmptyFactor,
    #[error("guard: {0}")]
    Guard(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
