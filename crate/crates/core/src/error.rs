use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Centralized placement needs C(K, b) to divide the file size.
    #[error("file size {file_bits} is not divisible by C({users}, {b}) = {parts}")]
    Divisibility {
        file_bits: usize,
        users: usize,
        b: usize,
        parts: usize,
    },

    #[error("invalid demand: {0}")]
    Demand(String),

    /// The batch does not match the cache it is decoded against, or the
    /// reassembled file fails its digest check.
    #[error("decode verification failed for user {user}: {reason}")]
    DecodeVerification { user: usize, reason: String },

    #[error("malformed rate tuple: {0}")]
    MalformedTuple(String),

    #[error("{0}")]
    Io(String),
}

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
