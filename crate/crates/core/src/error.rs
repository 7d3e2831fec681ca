use thiserror::Error;

/// Errors raised by the solvers and checks.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain of a function or formula.
    #[error("domain error: {0}")]
    Domain(String),
    /// Invalid configuration or malformed input.
    #[error("invalid input: {0}")]
    Invalid(String),
    /// A required positivity condition (weight, mass, ground state) fails.
    #[error("positivity violated: {0}")]
    Positivity(String),
    /// Value or log-derivative mismatch when gluing profiles.
    #[error("matching failed: {0}")]
    Mismatch(String),
    /// An integral that should be finite diverges on the grid.
    #[error("divergent integral: {0}")]
    Divergent(String),
    /// A numerical lower bound that must hold is violated.
    #[error("bound violated: {0}")]
    BoundViolated(String),
    /// A bracketing search did not find a sign change.
    #[error("bracket not found: {0}")]
    BracketNotFound(String),
    /// An iterative solver or integrator failed to converge.
    #[error("no convergence: {0}")]
    NoConvergence(String),
    /// The discretization cannot resolve the requested quantity.
    #[error("under-resolved: {0}")]
    UnderResolved(String),
    /// A requested combination is not supported.
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("io error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
