use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("residues belong to different moduli ({0} vs {1})")]
    ModulusMismatch(u64, u64),

    #[error("{value} has no inverse modulo {modulus}")]
    NotInvertible { value: u64, modulus: u64 },

    #[error("modulus {0} must be odd and at least 3")]
    InvalidModulus(u64),

    #[error("{0} is not prime")]
    NotPrime(u64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("n = {n} exceeds the dense ceiling of {ceiling}")]
    TooLarge { n: u64, ceiling: u64 },

    #[error("no collision within {budget} steps")]
    NoCollision { budget: u64 },

    #[error("degenerate collision: exponents of h agree, restart with a fresh start point")]
    DegenerateCollision,

    #[error("dlog still degenerate after {restarts} restarts")]
    RestartsExhausted { restarts: u32 },

    #[error("power iteration did not converge in {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("certificate parameter d = {d} drives a ladder value t_{depth} to {value}")]
    LadderNotPositive { d: f64, depth: u32, value: f64 },

    #[error("path-count bound violated at start {start}, subset {subset}: ratio {ratio}")]
    MixingBoundViolated {
        start: u64,
        subset: usize,
        ratio: f64,
    },
}
