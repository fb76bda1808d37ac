use serde::Serialize;

use qimd_core::Error as CoreError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),

    #[error(transparent)]
    Core(#[from] CoreError),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(std::io::Error::other(e))
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Io(std::io::Error::other(e))
    }
}

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const CONFIG: i32 = 2;
    pub const NUMERIC: i32 = 3;
    pub const INCONCLUSIVE: i32 = 4;
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io(_) => exit::CONFIG,
            CliError::Core(e) => match e {
                CoreError::Consistency(_) | CoreError::NoFringeInformation => exit::NUMERIC,
                CoreError::RegimeViolation(_) => exit::INCONCLUSIVE,
                _ => exit::CONFIG,
            },
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config",
            CliError::Io(_) => "io",
            CliError::Core(e) => match e {
                CoreError::InvalidParameter { .. } => "invalid_parameter",
                CoreError::Degenerate(_) => "degenerate",
                CoreError::ZeroContrast => "zero_contrast",
                CoreError::NoFringeInformation => "no_fringe_information",
                CoreError::StationaryPoint(_) => "stationary_point",
                CoreError::RegimeMismatch(_) => "regime_mismatch",
                CoreError::PhotonCap { .. } => "photon_cap",
                CoreError::RegimeViolation(_) => "regime_violation",
                CoreError::Consistency(_) => "consistency",
            },
        }
    }

    /// One-line JSON object for the error stream.
    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct Report<'a> {
            error: &'a str,
            exit_code: i32,
            message: String,
        }
        serde_json::to_string(&Report {
            error: self.kind(),
            exit_code: self.exit_code(),
            message: self.to_string(),
        })
        .expect("error report serialises")
    }
}
