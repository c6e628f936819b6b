//! Error type shared by all core operations.

use core::fmt;

/// Errors reported by buffer constructors and pipeline operations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Error {
    /// Buffer length does not match `width * height * channels`.
    BadBufferLength { expected: usize, got: usize },
    /// A buffer value is NaN or infinite.
    NonFiniteValue,
    /// A mask value lies outside `[0, 1]`.
    MaskValueOutOfRange,
    /// Two buffers that must share dimensions do not.
    DimensionMismatch {
        expected: (usize, usize),
        got: (usize, usize),
    },
    /// A resize target dimension is zero.
    ZeroTargetDimension,
    /// An operation requiring a binary mask received values other than 0 or 1.
    NonBinaryMask,
    /// Shadow parameters are non-finite or a gain is below the minimum.
    InvalidParams(&'static str),
    /// A regression region holds fewer pixels than the fit needs.
    TooFewSamples { found: usize, required: usize },
    /// Eroding the shadow mask left no pixels to regress over.
    EmptyErodedRegion { radius: usize },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::BadBufferLength { expected, got } => {
                write!(
                    f,
                    "buffer length {got} does not match dimensions (expected {expected})"
                )
            }
            Error::NonFiniteValue => write!(f, "buffer contains a NaN or infinite value"),
            Error::MaskValueOutOfRange => write!(f, "mask value outside [0, 1]"),
            Error::DimensionMismatch { expected, got } => write!(
                f,
                "dimension mismatch: expected {}x{}, got {}x{}",
                expected.0, expected.1, got.0, got.1
            ),
            Error::ZeroTargetDimension => write!(f, "resize target dimension is zero"),
            Error::NonBinaryMask => write!(f, "mask is not binary (values must be exactly 0 or 1)"),
            Error::InvalidParams(reason) => write!(f, "invalid shadow parameters: {reason}"),
            Error::TooFewSamples { found, required } => {
                write!(
                    f,
                    "regression region has {found} pixels, needs at least {required}"
                )
            }
            Error::EmptyErodedRegion { radius } => write!(
                f,
                "eroded mask empty at radius {radius}; retry with a smaller erosion radius"
            ),
        }
    }
}

impl core::error::Error for Error {}

pub type Result<T> = core::result::Result<T, Error>;
