use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid torus (d={d}, N={n}): {reason}")]
    InvalidSpec { d: usize, n: usize, reason: &'static str },

    #[error("expected {expected} coordinates, got {got}")]
    CoordinateCount { expected: usize, got: usize },

    #[error("vertex index {0} out of range")]
    InvalidVertex(usize),

    #[error("invalid mass profile: {0}")]
    InvalidProfile(String),

    #[error("operands live on different tori")]
    SpecMismatch,

    #[error("exponent p = {0} outside [1, 2]")]
    ExponentOutOfRange(f64),

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("vertices {0} and {1} are not nearest neighbours")]
    NotAdjacent(usize, usize),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("uniformization mean {mean:.3e} exceeds the exact-mode cap {cap:.3e}")]
    TruncationCap { mean: f64, cap: f64 },

    #[error("state space of size {size} exceeds the exact-mode cap {cap}")]
    StateSpaceTooLarge { size: u128, cap: u128 },

    #[error("trajectory exceeded the event budget of {0} updates")]
    EventBudget(u64),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("renewal solver diverged: {0}")]
    Divergence(String),

    #[error("convolution series did not reach tolerance within {0} terms")]
    SeriesCap(usize),

    #[error("quadrature did not converge: {0}")]
    Quadrature(String),

    #[error("insufficient replicas: {0}")]
    InsufficientReplicas(String),

    #[error("tail horizon insufficient: {0}")]
    TailHorizon(String),

    #[error("eigensolve failed: {0}")]
    Eigen(String),

    #[error("config line {line}: {message}")]
    Config { line: usize, message: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{context}: {source}")]
    Context {
        context: String,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn context(self, context: impl Into<String>) -> Self {
        Error::Context {
            context: context.into(),
            source: Box::new(self),
        }
    }

    /// Process exit status for the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Context { source, .. } => source.exit_code(),
            Error::TruncationCap { .. }
            | Error::StateSpaceTooLarge { .. }
            | Error::EventBudget(_)
            | Error::Divergence(_)
            | Error::SeriesCap(_)
            | Error::Quadrature(_)
            | Error::TailHorizon(_)
            | Error::Eigen(_)
            | Error::Numerical(_)
            | Error::InsufficientReplicas(_) => 3,
            _ => 2,
        }
    }
}
