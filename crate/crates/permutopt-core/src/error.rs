//! Error type shared by every module in the crate.

use alloc::string::String;
use core::fmt;

/// Errors produced by core operations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CoreError {
    /// Operand shapes do not conform; both shapes are named.
    ShapeMismatch {
        context: &'static str,
        left: String,
        right: String,
    },
    /// A dimension argument is outside its valid range.
    InvalidDimension { context: &'static str, dim: usize },
    /// An argument failed validation.
    Parameter(String),
    /// A non-finite value appeared where a finite one is required.
    NonFinite {
        context: &'static str,
        iteration: usize,
    },
    /// Input is structurally valid but degenerate (e.g. an all-zero data matrix).
    DegenerateInput(String),
    /// Data admits no meaningful statistic (e.g. zero total variance).
    DegenerateData(String),
    /// The operation only supports dimensions up to `max`.
    UnsupportedDimension { dim: usize, max: usize },
}

impl fmt::Display for CoreError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CoreError::ShapeMismatch {
                context,
                left,
                right,
            } => write!(f, "{context}: shape mismatch between {left} and {right}"),
            CoreError::InvalidDimension { context, dim } => {
                write!(f, "{context}: invalid dimension {dim}")
            }
            CoreError::Parameter(msg) => write!(f, "invalid parameter: {msg}"),
            CoreError::NonFinite { context, iteration } => {
                write!(f, "{context}: non-finite value at iteration {iteration}")
            }
            CoreError::DegenerateInput(msg) => write!(f, "degenerate input: {msg}"),
            CoreError::DegenerateData(msg) => write!(f, "degenerate data: {msg}"),
            CoreError::UnsupportedDimension { dim, max } => {
                write!(f, "dimension {dim} unsupported (max {max})")
            }
        }
    }
}

impl core::error::Error for CoreError {}
