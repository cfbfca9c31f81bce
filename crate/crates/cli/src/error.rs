use fsindep_core::automata::AutomatonError;
use fsindep_core::compression::CompressionError;
use fsindep_core::normality::StatsError;
use fsindep_core::perfect::PerfectError;
use fsindep_core::WordError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Domain(String),
    #[error("{0}")]
    Resource(String),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Io { .. } => 2,
            CliError::Domain(_) => 3,
            CliError::Resource(_) => 4,
        }
    }

    pub fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        CliError::Io { path: path.as_ref().display().to_string(), source }
    }
}

impl From<WordError> for CliError {
    fn from(e: WordError) -> Self {
        match e {
            WordError::SourceExhausted { .. } => CliError::Domain(e.to_string()),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

impl From<StatsError> for CliError {
    fn from(e: StatsError) -> Self {
        match e {
            StatsError::TooLarge { .. } => CliError::Resource(e.to_string()),
            StatsError::Word(w) => w.into(),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

impl From<PerfectError> for CliError {
    fn from(e: PerfectError) -> Self {
        match e {
            PerfectError::BadBase(_) | PerfectError::TooFewStages { .. } => CliError::Usage(e.to_string()),
            _ => CliError::Domain(e.to_string()),
        }
    }
}

impl From<AutomatonError> for CliError {
    fn from(e: AutomatonError) -> Self {
        match e {
            AutomatonError::Parse { .. } | AutomatonError::Tapes(_) | AutomatonError::Arity { .. } | AutomatonError::BadEll { .. } => {
                CliError::Usage(e.to_string())
            }
            AutomatonError::TooLarge { .. } => CliError::Resource(e.to_string()),
            _ => CliError::Domain(e.to_string()),
        }
    }
}

impl From<CompressionError> for CliError {
    fn from(e: CompressionError) -> Self {
        match e {
            CompressionError::ZeroBlock | CompressionError::NotMultiple { .. } | CompressionError::AlphabetTooLarge(_) => {
                CliError::Usage(e.to_string())
            }
            CompressionError::TooLarge { .. } => CliError::Resource(e.to_string()),
            CompressionError::Automaton(a) => a.into(),
            _ => CliError::Domain(e.to_string()),
        }
    }
}
