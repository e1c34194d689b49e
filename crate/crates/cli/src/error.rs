use std::fmt;
use std::path::Path;

use bnlf::pipeline::PipelineError;

/// Failure classes, each with its own exit code.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Data(String),
    Model(String),
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Data(_) => 3,
            CliError::Model(_) => 4,
            CliError::Internal(_) => 5,
        }
    }

    pub fn write(path: &Path, e: std::io::Error) -> Self {
        CliError::Internal(format!("writing {}: {e}", path.display()))
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (kind, msg) = match self {
            CliError::Usage(m) => ("usage error", m),
            CliError::Data(m) => ("data error", m),
            CliError::Model(m) => ("model error", m),
            CliError::Internal(m) => ("internal error", m),
        };
        write!(f, "{kind}: {msg}")
    }
}

impl From<PipelineError> for CliError {
    fn from(e: PipelineError) -> Self {
        match e {
            PipelineError::EmptyModelList | PipelineError::DuplicateModel(_) | PipelineError::ReservedModelName(_) => {
                CliError::Usage(e.to_string())
            }
            PipelineError::NotAFusionNetwork(_) | PipelineError::Json(_) => CliError::Model(e.to_string()),
            PipelineError::Learn(bnlf::learning::LearnError::InvalidSmoothing(_)) => CliError::Usage(e.to_string()),
            _ => CliError::Data(e.to_string()),
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
