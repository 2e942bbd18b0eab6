use thiserror::Error;

/// Everything that can go wrong across the crate, from quadrature stalls to
/// Newton blow-ups. Numerical failures carry enough state to be diagnosable:
/// a non-converged integral still reports its best estimate and error bound.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// An adaptive rule hit its subdivision or level budget before meeting
    /// tolerance. `estimate` is the best value found, `bound` the estimated
    /// absolute error at the point of giving up.
    #[error("quadrature failed to converge: estimate {estimate:e}, error bound {bound:e}")]
    NonConvergence { estimate: f64, bound: f64 },

    /// Parameters outside the range a routine can handle (α outside (0,1),
    /// N < 2, non-finite inputs, malformed profile data, ...).
    #[error("domain error: {0}")]
    DomainError(String),

    /// A radius profile dipped to zero or below somewhere on its period;
    /// the geometry (and every kernel built from it) is meaningless there.
    #[error("profile positivity violated: min radius {min:e} at s = {at:e}")]
    PositivityViolation { min: f64, at: f64 },

    /// A root-finding bracket could not be established within the allowed
    /// expansion range.
    #[error("failed to bracket root of {what}: searched up to {limit:e}")]
    BracketFailure { what: String, limit: f64 },

    /// The eigenvalue crossing at µ* is degenerate: h'(µ*) is not strictly
    /// positive, so the branch direction is not determined.
    #[error("transversality failure at mu = {mu:e}: h'(mu) = {hprime:e}")]
    TransversalityFailure { mu: f64, hprime: f64 },

    /// Newton iteration on the branch system failed to reach tolerance.
    #[error("Newton did not converge at a = {a:e}: residual {residual:e} after {iters} iterations")]
    NewtonDivergence { a: f64, residual: f64, iters: usize },

    /// I/O and JSON problems from the CLI layer.
    #[error("io error: {0}")]
    Io(String),

    /// Input files that parse but do not describe a valid problem.
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code for the CLI: usage errors are handled by clap (2);
    /// these are runtime failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::NonConvergence { .. }
            | Error::BracketFailure { .. }
            | Error::TransversalityFailure { .. } => 3,
            Error::DomainError(_) | Error::InvalidInput(_) => 2,
            Error::PositivityViolation { .. } => 2,
            Error::NewtonDivergence { .. } => 4,
            Error::Io(_) => 2,
        }
    }
}
