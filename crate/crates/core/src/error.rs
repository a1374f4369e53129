use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("mixed alignment: {0}")]
    MixedAlignment(String),

    #[error("grid index ({i}, {j}) outside 0..={n1} x 0..={n2}")]
    IndexOutOfRange { i: usize, j: usize, n1: usize, n2: usize },

    #[error("coefficient must be positive, got {0}")]
    NonPositiveCoefficient(f64),

    #[error("offset w = {0} outside the admissible range")]
    DegenerateOffset(f64),

    #[error("rho = {rho} outside the sign-feasible interval [{lo}, {hi}]")]
    RhoOutOfRange { rho: f64, lo: f64, hi: f64 },

    #[error("consistency system has no nontrivial solution (singular values {singular_values:?})")]
    NoSolution { singular_values: Vec<f64> },

    #[error("consistency system has a null space of dimension > 1 (singular values {singular_values:?})")]
    DegenerateStencil { singular_values: Vec<f64> },

    #[error("derivative table of order {have} is below the required order {need}")]
    TableUnderfilled { have: usize, need: usize },

    #[error("scheme {scheme} cannot be used on a {mode} grid")]
    SchemeMismatch { scheme: String, mode: String },

    #[error("matrix is singular (zero pivot in column {0})")]
    SingularMatrix(usize),

    #[error("iterative solver stopped after {iterations} iterations with backward error {residual:e}")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("inconsistent problem data: {0}")]
    InconsistentSpec(String),

    #[error("unknown problem `{0}`")]
    UnknownProblem(String),

    #[error("invalid option: {0}")]
    InvalidOption(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
