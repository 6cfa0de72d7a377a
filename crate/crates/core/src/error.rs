use std::io;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("code length mismatch: {left} vs {right} bits")]
    LengthMismatch { left: u32, right: u32 },

    #[error("code length {0} outside 1..=64")]
    InvalidCodeLength(usize),

    #[error("radius {radius} exceeds code length {length}")]
    RadiusOutOfRange { length: u32, radius: u32 },

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("non-finite feature value at row {row}, column {col}")]
    NonFinite { row: usize, col: usize },

    #[error("bad magic bytes: expected {expected}")]
    BadMagic { expected: &'static str },

    #[error("malformed {format} file: {reason}")]
    Malformed {
        format: &'static str,
        reason: String,
    },

    #[error("code space smaller than class count: 2^{length} < {classes}")]
    CodeSpaceTooSmall { length: u32, classes: u64 },

    #[error("label {label} out of range for {classes} classes")]
    LabelOutOfRange { label: u32, classes: u32 },

    #[error("missing labels: {0}")]
    MissingLabels(&'static str),

    #[error(
        "degenerate covariance: rank below {wanted} (eigenvalue {value:e} vs largest {largest:e})"
    )]
    RankDeficient {
        wanted: usize,
        value: f64,
        largest: f64,
    },

    #[error("eigen-decomposition did not converge after {sweeps} sweeps")]
    NoConvergence { sweeps: usize },

    #[error("table count mismatch: index has {tables} tables, got {codes} query codes")]
    TableCountMismatch { tables: usize, codes: usize },

    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
}

impl Error {
    /// Stable short identifier, used by the command line for machine-parsable diagnostics.
    pub fn code(&self) -> &'static str {
        match self {
            Error::LengthMismatch { .. } => "length_mismatch",
            Error::InvalidCodeLength(_) => "invalid_code_length",
            Error::RadiusOutOfRange { .. } => "radius_out_of_range",
            Error::EmptyInput(_) => "empty_input",
            Error::DimensionMismatch { .. } => "dimension_mismatch",
            Error::NonFinite { .. } => "non_finite",
            Error::BadMagic { .. } => "bad_magic",
            Error::Malformed { .. } => "malformed",
            Error::CodeSpaceTooSmall { .. } => "code_space_too_small",
            Error::LabelOutOfRange { .. } => "label_out_of_range",
            Error::MissingLabels(_) => "missing_labels",
            Error::RankDeficient { .. } => "rank_deficient",
            Error::NoConvergence { .. } => "no_convergence",
            Error::TableCountMismatch { .. } => "table_count_mismatch",
            Error::InvalidParam(_) => "invalid_param",
            Error::Io(_) => "io",
        }
    }
}
