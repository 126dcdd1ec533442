//! Error type shared across the crate.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid mode set: {0}")]
    InvalidModeSet(String),
    #[error("unknown mode `{0}`")]
    UnknownMode(String),
    #[error("unphysical state: {0}")]
    UnphysicalState(String),
    #[error("mode order mismatch: {0}")]
    OrderMismatch(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("invalid mask: {0}")]
    InvalidMask(String),
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error("calibration error: {0}")]
    CalibrationError(String),
    #[error("measured variance at or below the electronic noise floor: {0}")]
    NoiseFloorError(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("config parse error: {0}")]
    ConfigParse(#[from] toml::de::Error),
    #[error("config serialize error: {0}")]
    ConfigSerialize(#[from] toml::ser::Error),
}
