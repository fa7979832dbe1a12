use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TiccError {
    #[error("item index {item} out of range for {num_items} item types")]
    ItemOutOfRange { item: usize, num_items: usize },
    #[error("episode is over (step {step} of horizon {horizon})")]
    EpisodeOver { step: u32, horizon: u32 },
    #[error("outcome {outcome} does not match action {action}")]
    OutcomeMismatch { action: String, outcome: String },
    #[error("{0} has no stochastic outcome")]
    NotApplicable(String),
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("unknown scenario `{name}` (known: {known})")]
    UnknownScenario { name: String, known: String },
    #[error("io: {0}")]
    Io(String),
}

pub type Result<T, E = TiccError> = std::result::Result<T, E>;

impl From<std::io::Error> for TiccError {
    fn from(e: std::io::Error) -> Self {
        TiccError::Io(e.to_string())
    }
}
