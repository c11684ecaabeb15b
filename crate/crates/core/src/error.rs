use thiserror::Error;

use crate::bcp::Domain;
use crate::engine::{CiphertextId, Role};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A plaintext or signed value outside the legal range for the modulus.
    #[error("value {value} is outside the plaintext range for this modulus")]
    OutOfRange { value: String },

    /// L(u) is undefined because u is not congruent to 1 mod N (wrong key or tampered data).
    #[error("malformed ciphertext: decryption residue is not 1 mod N")]
    MalformedCiphertext,

    #[error("key-domain mismatch: expected {expected}, found {found}")]
    DomainMismatch { expected: Domain, found: Domain },

    #[error("invalid parameters: {0}")]
    InvalidParameters(String),

    #[error("{what}: gave up after {attempts} attempts")]
    AttemptsExhausted { what: &'static str, attempts: u64 },

    #[error("access denied: requester is not on the allowlist")]
    AccessDenied,

    #[error("unknown ciphertext id {0}")]
    UnknownId(CiphertextId),

    #[error("unknown request id {0}")]
    UnknownRequest(u64),

    #[error("malformed request: {0}")]
    MalformedRequest(String),

    #[error("unexpected message: {0}")]
    UnexpectedMessage(String),

    #[error("{hop} step failed: {source}")]
    Hop {
        hop: Role,
        #[source]
        source: Box<Error>,
    },

    #[error("parse error at byte {offset}: {message}")]
    Parse { offset: usize, message: String },

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("transport: {0}")]
    Transport(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn out_of_range(value: impl ToString) -> Self {
        Error::OutOfRange {
            value: value.to_string(),
        }
    }

    pub(crate) fn at_hop(self, hop: Role) -> Self {
        match self {
            e @ Error::Hop { .. } => e,
            e => Error::Hop {
                hop,
                source: Box::new(e),
            },
        }
    }

    /// The innermost error, unwrapping any hop attribution.
    pub fn root(&self) -> &Error {
        match self {
            Error::Hop { source, .. } => source.root(),
            e => e,
        }
    }
}

pub(crate) fn domain_check(expected: Domain, found: Domain) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DomainMismatch { expected, found })
    }
}

pub(crate) fn invariant(msg: impl Into<String>) -> Error {
    Error::Invariant(msg.into())
}
