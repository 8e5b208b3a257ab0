use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid grid dimension {rows}x{cols}: need at least {min} in each direction")]
    InvalidDimension { rows: usize, cols: usize, min: usize },

    #[error("invalid edge ({from}, {to}): {reason}")]
    InvalidEdge { from: usize, to: usize, reason: &'static str },

    #[error("perturbation infeasible: {0}")]
    PerturbationInfeasible(String),

    #[error("empty sample")]
    EmptySample,

    #[error("invalid value: {0}")]
    InvalidValue(String),

    #[error("size mismatch: {0}")]
    SchemeSizeMismatch(String),

    #[error("zero variance: sample is constant")]
    ZeroVariance,

    #[error("index {index} out of range for {len} values")]
    InvalidIndex { index: usize, len: usize },

    #[error("degenerate scheme: {0}")]
    DegenerateScheme(String),

    #[error("correction infeasible: scale factor {0} is not positive")]
    CorrectionInfeasible(f64),

    #[error("{states} arrangements exceed the limit of {limit}")]
    TooManyArrangements { states: u128, limit: u128 },

    #[error("degenerate distribution: {0}")]
    DegenerateDistribution(String),

    #[error("raw samples are required for this operation")]
    RawSamplesRequired,

    #[error("invalid tiling: {0}")]
    InvalidTiling(String),

    #[error("pair-count identity violated: direct {direct} vs counts {from_counts}")]
    IdentityViolation { direct: f64, from_counts: f64 },

    #[error("format error in {}: {msg}", path.display())]
    Format { path: PathBuf, msg: String },

    #[error("{0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn format(path: impl Into<PathBuf>, msg: impl Into<String>) -> Self {
        Error::Format { path: path.into(), msg: msg.into() }
    }

    /// Process exit code used by the command-line front end:
    /// 1 for I/O and format problems, 2 for degenerate input, 3 for
    /// infeasible configurations.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io(_) | Error::Csv(_) | Error::Json(_) | Error::Format { .. } | Error::Parse(_) => 1,
            Error::EmptySample
            | Error::InvalidValue(_)
            | Error::SchemeSizeMismatch(_)
            | Error::ZeroVariance
            | Error::InvalidIndex { .. }
            | Error::DegenerateScheme(_)
            | Error::DegenerateDistribution(_)
            | Error::RawSamplesRequired
            | Error::IdentityViolation { .. } => 2,
            Error::InvalidDimension { .. }
            | Error::InvalidEdge { .. }
            | Error::PerturbationInfeasible(_)
            | Error::CorrectionInfeasible(_)
            | Error::TooManyArrangements { .. }
            | Error::InvalidTiling(_) => 3,
        }
    }
}
