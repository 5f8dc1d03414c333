use lptime_core::LpError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("data error: {0}")]
    Data(String),
    #[error("parse error: {message} at row {row}")]
    Parse { row: usize, message: String },
    #[error("numeric failure: {0}")]
    Numeric(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Data(_) | CliError::Parse { .. } | CliError::Io(_) => 3,
            CliError::Numeric(_) => 4,
        }
    }
}

impl From<LpError> for CliError {
    fn from(e: LpError) -> Self {
        let msg = e.to_string();
        match e {
            LpError::InvalidProbability(_) | LpError::InvalidArgument(_) | LpError::DimensionMismatch(_) => {
                CliError::Config(msg)
            }
            LpError::InvalidSample(_)
            | LpError::DegenerateDistribution(_)
            | LpError::InsufficientData(_)
            | LpError::InsufficientOverlap { .. } => CliError::Data(msg),
            LpError::DegenerateCopula(_) | LpError::UnstableModel(_) | LpError::RankDeficient(_) => {
                CliError::Numeric(msg)
            }
        }
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Config(e.to_string())
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
