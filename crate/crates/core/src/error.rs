use thiserror::Error;

/// Errors raised by the enhancement library.
#[derive(Debug, Error)]
pub enum Error {
    /// Input samples or buffers that cannot be processed as given.
    #[error("invalid input: {0}")]
    Input(String),

    /// Two pieces of data that must agree in shape (bin counts, lengths) do not.
    #[error("config mismatch: expected {expected}, got {got} ({what})")]
    Mismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    /// A tunable outside its legal range.
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// Audio in a format the engine does not accept.
    #[error("unsupported format: {0}")]
    Format(String),

    #[error("initialization error: {0}")]
    Init(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("wav: {0}")]
    Wav(#[from] hound::Error),

    #[error("config file: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn check_len(what: &'static str, expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::Mismatch {
            what,
            expected,
            got,
        })
    }
}
