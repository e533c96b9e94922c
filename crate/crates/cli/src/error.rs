use std::path::PathBuf;

use thiserror::Error;
use toposz::codec::CodecError;
use toposz::field::FieldError;
use toposz::metrics::MetricsError;
use toposz::pipeline::PipelineError;
use toposz::validate::ValidateError;

pub const EXIT_USAGE: u8 = 2;
pub const EXIT_CAP: u8 = 3;
pub const EXIT_IO: u8 = 4;
pub const EXIT_FORMAT: u8 = 5;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Format(String),
    #[error("{cases} false cases remain after {iterations} refinement rounds; report written to {}", report.display())]
    Cap {
        iterations: usize,
        cases: usize,
        report: PathBuf,
    },
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Cap { .. } => EXIT_CAP,
            CliError::Io { .. } => EXIT_IO,
            CliError::Format(_) => EXIT_FORMAT,
        }
    }
}

impl From<FieldError> for CliError {
    fn from(e: FieldError) -> Self {
        match e {
            FieldError::Rank(_) | FieldError::Extent(_) => CliError::Usage(e.to_string()),
            FieldError::Io(source) => CliError::Io {
                path: PathBuf::new(),
                source,
            },
            _ => CliError::Format(e.to_string()),
        }
    }
}

impl From<CodecError> for CliError {
    fn from(e: CodecError) -> Self {
        match e {
            CodecError::Config(msg) => CliError::Usage(msg),
            CodecError::Field(f) => f.into(),
            _ => CliError::Format(e.to_string()),
        }
    }
}

impl From<PipelineError> for CliError {
    fn from(e: PipelineError) -> Self {
        match e {
            PipelineError::Config(msg) => CliError::Usage(msg),
            PipelineError::Codec(c) => c.into(),
            // callers intercept the cap to write the report first
            _ => CliError::Format(e.to_string()),
        }
    }
}

impl From<ValidateError> for CliError {
    fn from(e: ValidateError) -> Self {
        CliError::Format(e.to_string())
    }
}

impl From<MetricsError> for CliError {
    fn from(e: MetricsError) -> Self {
        match e {
            MetricsError::Field(f) => f.into(),
            _ => CliError::Format(e.to_string()),
        }
    }
}
