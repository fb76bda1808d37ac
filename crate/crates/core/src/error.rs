use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// Zero fringe amplitude; every uncertainty divides by 𝒜𝒞.
    #[error("degenerate configuration: {0}")]
    Degenerate(String),

    #[error("zero contrast: the fringe carries no phase information")]
    ZeroContrast,

    #[error("no fringe information: the weighted sums of the counts vanish")]
    NoFringeInformation,

    #[error("stationary fringe point at phase {0} rad")]
    StationaryPoint(f64),

    #[error("regime mismatch: {0}")]
    RegimeMismatch(String),

    #[error("photon number {total} exceeds the cap of {cap}")]
    PhotonCap { total: u64, cap: u64 },

    #[error("regime violation: {0}")]
    RegimeViolation(String),

    #[error("internal consistency check failed: {0}")]
    Consistency(String),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}

/// Checks `value` is finite and nonnegative.
pub(crate) fn nonnegative(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && value >= 0.0 {
        Ok(value)
    } else {
        Err(Error::invalid(
            name,
            format!("must be finite and >= 0, got {value}"),
        ))
    }
}

/// Checks `value` is a finite number in `[0, 1]`.
pub(crate) fn unit_interval(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && (0.0..=1.0).contains(&value) {
        Ok(value)
    } else {
        Err(Error::invalid(
            name,
            format!("must lie in [0, 1], got {value}"),
        ))
    }
}
