use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("degenerate network: {0}")]
    DegenerateNetwork(&'static str),

    #[error("reflection coefficient pole: load impedance equals -z0")]
    ReflectionPole,

    #[error("non-physical fit: {0}")]
    NonPhysicalFit(String),

    #[error("isolation {0:.2} dB is too shallow for the series-capacitance model (needs < -6 dB)")]
    IsolationTooShallow(f64),

    #[error("resonance out of band: |S11| minimum sits at the sweep edge ({0:.6e} Hz)")]
    ResonanceOutOfBand(f64),

    #[error("bandwidth unresolved: {0}")]
    BandwidthUnresolved(String),

    #[error("trimmer value out of range: {0}")]
    TrimmerOutOfRange(String),

    #[error("measurement invalid: {0}")]
    MeasurementInvalid(String),

    #[error("thermal calibration inconsistent: {0}")]
    InconsistentCalibration(String),

    #[error("scenario {path}: {message}")]
    Scenario { path: String, message: String },

    #[error("scenario field `{field}`: {message}")]
    Validation { field: String, message: String },

    #[error("i/o error on {path}: {message}")]
    Io { path: PathBuf, message: String },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn validation(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Validation { field: field.into(), message: message.into() }
    }
}
