use thiserror::Error;

/// Errors produced by parsing, net construction and reasoning.
#[derive(Debug, Error)]
pub enum Error {
    /// The document is not well-formed (position details come from the
    /// underlying deserializer message).
    #[error("syntax error: {0}")]
    Syntax(String),

    /// The document is well-formed but violates the model schema.
    #[error("schema violation at `{element}`: {message}")]
    Schema { element: String, message: String },

    /// A marking does not match the place count of its net.
    #[error("marking has {found} entries but the net has {expected} places")]
    MarkingMismatch { expected: usize, found: usize },

    /// A proposition was referenced that has no place in the net.
    #[error("unknown proposition `{0}`")]
    UnknownProposition(String),

    /// A rule id was referenced that does not exist in the model.
    #[error("unknown rule id `{0}`")]
    UnknownRule(String),

    /// Fixpoint iteration failed to stabilize (only possible with cycles).
    #[error("inference did not converge within {0} rounds")]
    NonConvergence(usize),
}

impl Error {
    pub fn schema(element: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Schema {
            element: element.into(),
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
