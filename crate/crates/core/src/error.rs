use thiserror::Error;

/// Errors raised by samplers, solvers and analyses.
#[derive(Debug, Error)]
pub enum Error {
    /// A size or step budget would be exceeded.
    #[error("resource limit exceeded: {what} needs {requested}, budget is {budget}")]
    Resource {
        what: String,
        requested: u128,
        budget: u128,
    },
    /// The request lies outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// Caller-side precondition violated (mismatched vertex sets, bad ids, ...).
    #[error("contract violation: {0}")]
    Contract(String),
    /// A rejection sampler or statistical procedure gave up.
    #[error("statistical failure after {attempts} attempts: {reason}")]
    Statistical { attempts: u64, reason: String },
    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn resource(what: impl Into<String>, requested: u128, budget: u128) -> Self {
        Error::Resource {
            what: what.into(),
            requested,
            budget,
        }
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn contract(msg: impl Into<String>) -> Self {
        Error::Contract(msg.into())
    }

    /// True for errors that a CLI should map to the "budget exceeded" exit code.
    pub fn is_resource(&self) -> bool {
        matches!(self, Error::Resource { .. })
    }
}
