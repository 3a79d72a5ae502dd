use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Dimensions of two objects that must agree do not.
    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("invalid mixed strategy: {0}")]
    InvalidStrategy(String),

    #[error("player index {player} out of range for a {num_players}-player game")]
    PlayerOutOfRange { player: usize, num_players: usize },

    /// A numeric parameter outside its admissible range (rates, scales, tolerances).
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A computation produced a non-finite or otherwise unusable value.
    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("not enough data: {0}")]
    InsufficientData(String),

    #[error("game too large for support enumeration: {0}")]
    TooLarge(String),

    /// Structured input that does not decode; `field` names the offending location.
    #[error("parse error in `{field}`: {message}")]
    Parse { field: String, message: String },

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn parse(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            field: field.into(),
            message: message.into(),
        }
    }

    /// True for errors caused by reading or decoding an input file.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::Parse { .. } | Error::Io(_) | Error::Csv(_) | Error::Json(_)
        )
    }
}
