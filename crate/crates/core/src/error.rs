use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("weight matrix is not symmetric positive definite: {0}")]
    NotPositiveDefinite(String),

    #[error("{solver} did not converge after {iterations} iterations (residual {residual:.3e}){}", context_suffix(.context))]
    NonConvergence {
        solver: &'static str,
        iterations: usize,
        residual: f64,
        context: Option<String>,
    },

    #[error("non-finite objective value encountered {0}")]
    NonFinite(String),

    #[error("every local solve failed ({starts} starts); last error: {last}")]
    AllStartsFailed { starts: usize, last: String },

    #[error("path does not cross the exceptional set: {0}")]
    NoBasinJump(String),

    #[error("{context}: {source}")]
    Context {
        context: String,
        #[source]
        source: Box<Error>,
    },

    #[error("invalid scenario: {0}")]
    Scenario(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

fn context_suffix(context: &Option<String>) -> String {
    match context {
        Some(c) => format!(" [{c}]"),
        None => String::new(),
    }
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    /// Wraps the error with a description of what was being attempted.
    pub fn context(self, context: impl Into<String>) -> Self {
        Error::Context {
            context: context.into(),
            source: Box::new(self),
        }
    }

    /// Walks through context wrappers to the underlying error.
    pub fn root(&self) -> &Error {
        match self {
            Error::Context { source, .. } => source.root(),
            other => other,
        }
    }

    /// True for solver failures (as opposed to bad input or i/o).
    pub fn is_non_convergence(&self) -> bool {
        matches!(
            self.root(),
            Error::NonConvergence { .. }
                | Error::AllStartsFailed { .. }
                | Error::NonFinite(_)
                | Error::NoBasinJump(_)
        )
    }

    /// True for errors caused by invalid user input.
    pub fn is_validation(&self) -> bool {
        matches!(
            self.root(),
            Error::DimensionMismatch { .. }
                | Error::InvalidParameter { .. }
                | Error::NotPositiveDefinite(_)
                | Error::Scenario(_)
                | Error::Json(_)
        )
    }
}

pub(crate) fn check_dim(context: &'static str, expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch {
            context,
            expected,
            found,
        });
    }
    Ok(())
}
