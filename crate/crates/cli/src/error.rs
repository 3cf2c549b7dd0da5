use std::fmt;

use squareval::dataset::DatasetError;
use squareval::engine::EngineError;
use squareval::model::ModelError;
use squareval::valuation::ValuationError;

/// A command failure, classified by exit code.
#[derive(Debug)]
pub enum Failure {
    /// Bad arguments or configuration (exit 1).
    Usage(String),
    /// Unreadable or malformed input, or output that cannot be written (exit 2).
    Input(String),
    /// Engine launch, protocol or timeout failure (exit 3).
    Engine(String),
    /// Training divergence or an out-of-domain value (exit 4).
    Numeric(String),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Input(_) => 2,
            Failure::Engine(_) => 3,
            Failure::Numeric(_) => 4,
        }
    }

    pub fn io(context: impl fmt::Display, err: std::io::Error) -> Failure {
        Failure::Input(format!("{context}: {err}"))
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Usage(m) => write!(f, "usage error: {m}"),
            Failure::Input(m) => write!(f, "input error: {m}"),
            Failure::Engine(m) => write!(f, "engine error: {m}"),
            Failure::Numeric(m) => write!(f, "numeric error: {m}"),
        }
    }
}

impl std::error::Error for Failure {}

impl From<EngineError> for Failure {
    fn from(e: EngineError) -> Self {
        match e {
            EngineError::InvalidLimits(_) | EngineError::EmptyPool => Failure::Usage(e.to_string()),
            _ => Failure::Engine(e.to_string()),
        }
    }
}

impl From<DatasetError> for Failure {
    fn from(e: DatasetError) -> Self {
        match e {
            DatasetError::InvalidFraction(_) => Failure::Usage(e.to_string()),
            _ => Failure::Input(e.to_string()),
        }
    }
}

impl From<ModelError> for Failure {
    fn from(e: ModelError) -> Self {
        match e {
            ModelError::NonFiniteLoss { .. } | ModelError::NonFiniteGradient { .. } => Failure::Numeric(e.to_string()),
            ModelError::InvalidConfig(_) | ModelError::EmptyTrainingSet => Failure::Usage(e.to_string()),
            _ => Failure::Input(e.to_string()),
        }
    }
}

impl From<ValuationError> for Failure {
    fn from(e: ValuationError) -> Self {
        match e {
            ValuationError::Domain(_) => Failure::Numeric(e.to_string()),
            ValuationError::BinWidth(_) | ValuationError::ZeroK => Failure::Usage(e.to_string()),
        }
    }
}
