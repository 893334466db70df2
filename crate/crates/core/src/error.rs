use thiserror::Error;

pub type Result<T> = std::result::Result<T, SimError>;

#[derive(Debug, Error)]
pub enum SimError {
    /// A caller passed a value outside an operation's domain.
    #[error("invalid argument: {0}")]
    Argument(String),

    /// Configuration could not be parsed or failed validation.
    #[error("config error{}: `{key}`: {message}", line.map(|l| format!(" at line {l}")).unwrap_or_default())]
    Config {
        key: String,
        line: Option<usize>,
        message: String,
    },

    /// The effective multi-user channel was too ill-conditioned to invert.
    #[error("degenerate drop: {0}")]
    DegenerateDrop(String),

    #[error("parameter table `{table}`: {message}")]
    Table { table: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl SimError {
    pub(crate) fn arg(msg: impl Into<String>) -> Self {
        SimError::Argument(msg.into())
    }

    pub(crate) fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        SimError::Config {
            key: key.into(),
            line: None,
            message: message.into(),
        }
    }
}
