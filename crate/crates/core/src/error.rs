use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("index out of range: user {user}, slot {slot} (num_users = {num_users})")]
    IndexOutOfRange { user: usize, slot: usize, num_users: usize },

    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("inconsistent power profile: P[{user}][{slot}] > 0 while slot owner power is 0")]
    InconsistentProfile { user: usize, slot: usize },

    #[error("problem is infeasible")]
    Infeasible,

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("KKT certification conflict: {certified} candidates certified\n{details}")]
    CertificationConflict { certified: usize, details: String },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for errors caused by bad input rather than by a solver.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::IndexOutOfRange { .. }
                | Error::InvalidInstance(_)
                | Error::Parse { .. }
                | Error::Config(_)
                | Error::Io(_)
        )
    }
}
