use std::fmt;

use pss_core::catalog::CatalogError;
use pss_core::classify::ClassifyError;
use pss_core::expr::{EvalError, ParseError};
use pss_core::frames::FrameError;
use pss_core::goursat::GoursatError;
use pss_core::linear::LinearError;

/// Exit status 2 for input the program could not use, 1 for a check or
/// computation that ran and failed.
#[derive(Debug)]
pub enum CliError {
    Input(String),
    Failed(String),
}

impl CliError {
    pub fn code(&self) -> u8 {
        match self {
            CliError::Input(_) => 2,
            CliError::Failed(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Input(m) => write!(f, "{m}"),
            CliError::Failed(m) => write!(f, "{m}"),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

pub fn input(e: impl fmt::Display) -> CliError {
    CliError::Input(e.to_string())
}

fn failed(e: impl fmt::Display) -> CliError {
    CliError::Failed(e.to_string())
}

impl From<ParseError> for CliError {
    fn from(e: ParseError) -> Self {
        input(e)
    }
}

impl From<EvalError> for CliError {
    fn from(e: EvalError) -> Self {
        failed(e)
    }
}

impl From<FrameError> for CliError {
    fn from(e: FrameError) -> Self {
        match e {
            FrameError::Parse(_) | FrameError::Invalid(_) | FrameError::Param { .. } => input(e),
            FrameError::Eval(_) | FrameError::Expr(_) => failed(e),
        }
    }
}

impl From<ClassifyError> for CliError {
    fn from(e: ClassifyError) -> Self {
        match e {
            ClassifyError::Frame(e) => e.into(),
            ClassifyError::Parse(e) => e.into(),
            other => failed(other),
        }
    }
}

impl From<CatalogError> for CliError {
    fn from(e: CatalogError) -> Self {
        match e {
            CatalogError::Frame(e) => e.into(),
            CatalogError::Classify(e) => e.into(),
            CatalogError::CertificateFailure { .. } => failed(e),
            other => input(other),
        }
    }
}

impl From<GoursatError> for CliError {
    fn from(e: GoursatError) -> Self {
        match e {
            GoursatError::Frame(e) => e.into(),
            GoursatError::Data(_)
            | GoursatError::FreeParameter(_)
            | GoursatError::CornerMismatch { .. }
            | GoursatError::TooSmall(..) => input(e),
            other => failed(other),
        }
    }
}

impl From<LinearError> for CliError {
    fn from(e: LinearError) -> Self {
        match e {
            LinearError::Frame(e) => e.into(),
            LinearError::Path(_) | LinearError::FreeParameter(_) => input(e),
            other => failed(other),
        }
    }
}
