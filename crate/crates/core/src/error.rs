use std::fmt;

/// Location inside a parsed text input. Both fields are 1-based; `field` is
/// absent when the problem concerns a whole line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Position {
    pub line: usize,
    pub field: Option<usize>,
}

impl Position {
    pub fn line(line: usize) -> Self {
        Position { line, field: None }
    }

    pub fn field(line: usize, field: usize) -> Self {
        Position {
            line,
            field: Some(field),
        }
    }
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.field {
            Some(field) => write!(f, "line {}, field {}", self.line, field),
            None => write!(f, "line {}", self.line),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{position}: {message}")]
    Parse { position: Position, message: String },

    #[error("{position}: unknown {kind} name {name:?}")]
    UnknownName {
        position: Position,
        kind: &'static str,
        name: String,
    },

    #[error("invalid schema: {0}")]
    Schema(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("class {class:?} has no defined cell in any group")]
    UndefinedClass { class: String },

    #[error("confusion matrices contain no instances")]
    EmptyConfusions,

    #[error("generalized mean exponent p = 0 is not supported (geometric mean is excluded)")]
    ZeroExponent,

    #[error("ratio unit needs a positive class mean, got {0}")]
    ZeroClassMean(f64),

    #[error("infeasible selection: {0}")]
    Infeasible(String),

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn parse(position: Position, message: impl Into<String>) -> Self {
        Error::Parse {
            position,
            message: message.into(),
        }
    }

    pub(crate) fn invalid(message: impl Into<String>) -> Self {
        Error::InvalidInput(message.into())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
