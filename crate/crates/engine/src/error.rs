use graphdyn_core::GraphError;
use graphdyn_dsl::Span;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("{span}: {message}")]
    Unsupported { span: Span, message: String },

    #[error("no function named `{0}`")]
    UnknownFunction(String),

    #[error("the program has no Static or Dynamic function to run")]
    NoEntry,

    #[error("missing input `{0}`")]
    MissingInput(String),

    #[error("input `{name}`: {message}")]
    BadInput { name: String, message: String },

    #[error("{span}: {message}")]
    Runtime { span: Span, message: String },

    #[error("{span}: fixedPoint did not converge within {cap} iterations")]
    IterationCap { span: Span, cap: u64 },

    #[error("{span}: {source}")]
    Graph {
        span: Span,
        #[source]
        source: GraphError,
    },

    #[error("unflagged contended writes at {0}")]
    Unflagged(String),

    #[error("worker pool: {0}")]
    Pool(String),
}

impl EngineError {
    pub(crate) fn runtime(span: Span, message: impl Into<String>) -> Self {
        EngineError::Runtime {
            span,
            message: message.into(),
        }
    }

    pub(crate) fn unsupported(span: Span, message: impl Into<String>) -> Self {
        EngineError::Unsupported {
            span,
            message: message.into(),
        }
    }

    /// Source location, when the error comes from a program construct.
    pub fn span(&self) -> Option<Span> {
        match self {
            EngineError::Unsupported { span, .. }
            | EngineError::Runtime { span, .. }
            | EngineError::IterationCap { span, .. }
            | EngineError::Graph { span, .. } => Some(*span),
            _ => None,
        }
    }
}
