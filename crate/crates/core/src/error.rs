use thiserror::Error;

use crate::instance::Violation;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed or inconsistent user input (unknown ids, bad menus, ...).
    #[error("input error: {0}")]
    Input(String),

    /// An instance failed validation.
    #[error("invalid instance: {} violation(s); first: {}", .0.len(), .0.first().map(|v| v.to_string()).unwrap_or_default())]
    Invalid(Vec<Violation>),

    /// An exhaustive scan would exceed its configured cap.
    #[error("resource limit: {what} has size {size}, cap is {cap}")]
    Resource {
        what: &'static str,
        size: usize,
        cap: usize,
    },

    /// An operation was called outside its documented domain.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// The operation is not defined for this kind of choice function.
    #[error("unsupported: {0}")]
    Unsupported(String),

    /// A result that is guaranteed to exist was not produced. Always a bug.
    #[error("internal error: {0}")]
    Internal(String),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn check_cap(what: &'static str, size: usize, cap: usize) -> Result<()> {
    if size > cap {
        Err(Error::Resource { what, size, cap })
    } else {
        Ok(())
    }
}
