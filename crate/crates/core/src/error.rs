use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid domain: {0}")]
    InvalidDomain(String),
    #[error("invalid exponents: {0}")]
    InvalidExponents(String),
    #[error("kappa is singular at theta = {0}")]
    SingularAngle(f64),
    #[error("field shape mismatch: expected {expected} values, got {got}")]
    ShapeMismatch { expected: usize, got: usize },
    #[error("fields live on incompatible grids")]
    IncompatibleGrids,
    #[error("{solver} did not converge after {iterations} iterations (residual {residual:e})")]
    NonConvergence {
        solver: &'static str,
        iterations: usize,
        residual: f64,
    },
    #[error("degenerate direction: {0}")]
    DegenerateDirection(String),
    #[error("eigenproblem undefined: {0}")]
    UndefinedEigenproblem(String),
    #[error("radiality measure undefined for the zero field")]
    ZeroField,
    #[error("no solution found: {0}")]
    NoSolution(String),
    #[error("continuation step underflow; last converged exponents p = {p}, q = {q}")]
    StepUnderflow { p: f64, q: f64 },
    #[error("refinement stalled at relative residual {residual:e}; best iterate attached")]
    Unconverged {
        residual: f64,
        best: Box<crate::solver::SolutionPair>,
    },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
