use std::fmt;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Errors raised anywhere in the toolkit.
///
/// Each variant maps to a short machine-readable category via
/// [`Error::category`], which the command-line front end prints before the
/// human-readable detail.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A document failed to parse. `location` is a line number, a field path,
    /// or both.
    #[error("{what}: {location}: {message}")]
    Parse {
        what: &'static str,
        location: Location,
        message: String,
    },

    #[error("ontology: {0}")]
    Ontology(String),

    #[error("unknown entity {0}")]
    UnknownEntity(String),

    #[error("graph: {0}")]
    Graph(String),

    #[error("ingest: {0}")]
    Ingest(String),

    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    #[error("model: {0}")]
    Model(String),

    #[error("experiment: {0}")]
    Experiment(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn category(&self) -> &'static str {
        match self {
            Error::Parse { .. } => "parse",
            Error::Ontology(_) => "ontology",
            Error::UnknownEntity(_) | Error::Graph(_) => "graph",
            Error::Ingest(_) => "ingest",
            Error::InvalidParam(_) => "param",
            Error::Model(_) => "model",
            Error::Experiment(_) => "experiment",
            Error::Io(_) => "io",
        }
    }

    pub(crate) fn parse_at_line(what: &'static str, line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            what,
            location: Location::Line(line),
            message: message.into(),
        }
    }

    pub(crate) fn invalid(message: impl Into<String>) -> Self {
        Error::InvalidParam(message.into())
    }
}

/// Where in a document a parse error occurred.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Location {
    Line(usize),
    Field(String),
    LineField(usize, String),
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Location::Line(line) => write!(f, "line {line}"),
            Location::Field(path) => write!(f, "field `{path}`"),
            Location::LineField(line, path) => write!(f, "line {line}, field `{path}`"),
        }
    }
}
