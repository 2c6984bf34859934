use std::path::PathBuf;

use num_complex::Complex64;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid {field}: {reason}")]
    InvalidInput { field: &'static str, reason: String },

    #[error("degenerate mode TE{mode}0 at {freq_hz} Hz: exactly at cutoff, impedance undefined")]
    DegenerateMode { mode: u32, freq_hz: f64 },

    #[error("singular junction: z_left + z_right = 0 (z_left = {z_left}, z_right = {z_right})")]
    SingularJunction { z_left: Complex64, z_right: Complex64 },

    #[error("empty cascade")]
    EmptyCascade,

    #[error("invalid matching configuration: {0}")]
    InvalidConfig(String),

    #[error("singular network: |T21*gamma + T22| = {0:e}")]
    SingularNetwork(f64),

    #[error("aperture quadrature did not converge (last estimates {previous} and {last})")]
    QuadratureFailure { previous: Complex64, last: Complex64 },

    #[error("degenerate resonance in mode coupling: Y_mm + Y_m0 = 0")]
    DegenerateResonance,

    #[error("{freq_hz} Hz is at or below the TE10 cutoff ({cutoff_hz} Hz) of the aperture guide")]
    BelowCutoff { freq_hz: f64, cutoff_hz: f64 },

    #[error("aperture reflection pole: y_ap = -1")]
    AperturePole,

    #[error("at {freq_hz} Hz: {source}")]
    AtFrequency {
        freq_hz: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("chromosome encoding: {0}")]
    Encoding(String),

    #[error("config {path}: {message}")]
    Config { path: PathBuf, message: String },

    #[error("format: {0}")]
    Format(String),

    #[error("cannot access {path}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidInput {
            field,
            reason: reason.into(),
        }
    }

    pub(crate) fn at_frequency(self, freq_hz: f64) -> Self {
        Error::AtFrequency {
            freq_hz,
            source: Box::new(self),
        }
    }
}
