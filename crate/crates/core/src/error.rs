use thiserror::Error;

/// Errors raised by transforms, solvers and the experiment harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("parameter matrix has determinant {det} (expected 1 within 1e-12)")]
    Determinant { det: f64 },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("operation requires b != 0")]
    DegenerateParameter,

    #[error("b = 0 branch needs off-grid samples and interpolation is disabled")]
    DegenerateGrid,

    #[error("reference signal has zero norm")]
    ZeroSignal,

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("convolution factor is identically zero")]
    ZeroFactor,

    #[error("sampling rate {rate} is below the Nyquist rate {required}")]
    NyquistViolation { rate: f64, required: f64 },

    #[error("only {distinct} distinct a/b ratios for a support of length {needed}")]
    InsufficientDiversity { distinct: usize, needed: usize },

    #[error("window ambiguity vanishes on {fraction:.3} of the needed lattice (limit {limit})")]
    WindowVanishes { fraction: f64, limit: f64 },

    #[error("recovered energy density has negative values down to {min}")]
    NegativeEnergy { min: f64 },

    #[error("phase anchor has modulus {0:e}")]
    AnchorDegenerate(f64),

    #[error("lag row {0} is missing")]
    MissingLag(i64),

    #[error("invalid signal spec: {0}")]
    InvalidSpec(String),

    #[error("invalid config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Short stable name used in CSV failure rows.
    pub fn name(&self) -> &'static str {
        match self {
            Error::Determinant { .. } => "DeterminantError",
            Error::NonFinite(_) => "NonFinite",
            Error::DegenerateParameter => "DegenerateParameterError",
            Error::DegenerateGrid => "DegenerateGridError",
            Error::ZeroSignal => "ZeroSignal",
            Error::GridMismatch(_) => "GridMismatch",
            Error::InvalidGrid(_) => "InvalidGrid",
            Error::ZeroFactor => "ZeroFactor",
            Error::NyquistViolation { .. } => "NyquistViolation",
            Error::InsufficientDiversity { .. } => "InsufficientDiversity",
            Error::WindowVanishes { .. } => "WindowVanishes",
            Error::NegativeEnergy { .. } => "NegativeEnergy",
            Error::AnchorDegenerate(_) => "AnchorDegenerate",
            Error::MissingLag(_) => "MissingLag",
            Error::InvalidSpec(_) => "InvalidSpec",
            Error::Config(_) => "ConfigError",
            Error::Io(_) => "IoError",
            Error::Json(_) => "JsonError",
            Error::Csv(_) => "CsvError",
        }
    }

    /// True for errors caused by malformed user input rather than solver failure.
    pub fn is_config_error(&self) -> bool {
        matches!(
            self,
            Error::Config(_)
                | Error::InvalidSpec(_)
                | Error::Json(_)
                | Error::InvalidGrid(_)
                | Error::NonFinite(_)
                | Error::Determinant { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
