//! Companion-crate error type: core errors plus file and format failures.

use std::fmt;
use std::path::PathBuf;

#[derive(Debug)]
pub enum AppError {
    Core(shadowdecomp_core::Error),
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    Image {
        path: PathBuf,
        source: image::ImageError,
    },
    Json {
        path: PathBuf,
        source: serde_json::Error,
    },
    /// Image file decoded to something other than 8-bit RGB.
    NotRgb8 {
        path: PathBuf,
        found: &'static str,
    },
    /// A raw float sidecar whose length disagrees with the expected dimensions.
    BadSidecarLength {
        path: PathBuf,
        expected: usize,
        got: usize,
    },
    MissingSubdir {
        path: PathBuf,
    },
    /// Result files absent for these triplet ids.
    MissingResults {
        ids: Vec<String>,
    },
    /// CLI input validation (conflicting or insufficient flags).
    InvalidInput(String),
}

impl fmt::Display for AppError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AppError::Core(e) => write!(f, "{e}"),
            AppError::Io { path, source } => write!(f, "{}: {source}", path.display()),
            AppError::Image { path, source } => write!(f, "{}: {source}", path.display()),
            AppError::Json { path, source } => write!(f, "{}: {source}", path.display()),
            AppError::NotRgb8 { path, found } => {
                write!(f, "{}: expected 8-bit RGB, found {found}", path.display())
            }
            AppError::BadSidecarLength {
                path,
                expected,
                got,
            } => write!(
                f,
                "{}: sidecar holds {got} samples, expected {expected}",
                path.display()
            ),
            AppError::MissingSubdir { path } => {
                write!(f, "missing dataset subdirectory: {}", path.display())
            }
            AppError::MissingResults { ids } => {
                write!(f, "missing result images for {} triplet(s): ", ids.len())?;
                let shown: Vec<&str> = ids.iter().take(10).map(String::as_str).collect();
                write!(f, "{}", shown.join(", "))?;
                if ids.len() > 10 {
                    write!(f, ", ...")?;
                }
                Ok(())
            }
            AppError::InvalidInput(msg) => write!(f, "{msg}"),
        }
    }
}

impl std::error::Error for AppError {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            AppError::Core(e) => Some(e),
            AppError::Io { source, .. } => Some(source),
            AppError::Image { source, .. } => Some(source),
            AppError::Json { source, .. } => Some(source),
            _ => None,
        }
    }
}

impl From<shadowdecomp_core::Error> for AppError {
    fn from(e: shadowdecomp_core::Error) -> Self {
        AppError::Core(e)
    }
}

pub type Result<T> = std::result::Result<T, AppError>;
