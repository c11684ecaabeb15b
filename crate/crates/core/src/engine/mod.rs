//! Party roles and the outsourced addition / multiplication protocols.
//!
//! A session moves through exactly four messages:
//!
//! ```text
//! DR --ComputeRequest--> ACS --AuthorizedRequest--> CSP
//! DR <----ResultMsg----- ACS <--Add/MultPackage---- CSP
//! ```
//!
//! Data providers upload joint-key ciphertexts to the CSP beforehand.

mod message;
mod party;
mod protocol;
mod session;
mod store;
mod transport;

use std::fmt;

pub use message::{
    AddPackage, AuthorizedRequest, ComputeRequest, Envelope, Message, MultPackage, ResultMsg,
    UploadMsg,
};
pub use party::{AccessControlServer, CloudServer, DataProvider, DataRequester, Finalized};
pub use protocol::{
    acs_authorize, acs_finalize_add, acs_finalize_mult, csp_execute_add, csp_execute_mult,
    csp_ingest, dp_upload, dr_decrypt, Blinding,
};
pub use session::{run_session, Parties, SessionOutcome};
pub use store::CiphertextStore;
pub use transport::{
    read_frame, write_frame, ByteStream, InProcess, MemoryPipe, Transport, MAX_FRAME,
};

/// The four roles of the system.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Role {
    /// Data provider.
    Dp,
    /// Cloud service provider: stores ciphertexts and computes on them.
    Csp,
    /// Access control server.
    Acs,
    /// Data requester.
    Dr,
}

impl Role {
    pub const ALL: [Role; 4] = [Role::Dp, Role::Csp, Role::Acs, Role::Dr];

    pub fn as_str(self) -> &'static str {
        match self {
            Role::Dp => "dp",
            Role::Csp => "csp",
            Role::Acs => "acs",
            Role::Dr => "dr",
        }
    }

    pub fn parse(s: &str) -> Option<Role> {
        Role::ALL.into_iter().find(|r| r.as_str() == s)
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.as_str().to_ascii_uppercase())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CiphertextId(pub u64);

impl fmt::Display for CiphertextId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Correlates an authorized request with the package and result it produces.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct RequestId(pub u64);

impl fmt::Display for RequestId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:016x}", self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Op {
    Add,
    Mult,
}

impl Op {
    pub fn as_str(self) -> &'static str {
        match self {
            Op::Add => "add",
            Op::Mult => "mult",
        }
    }

    pub fn parse(s: &str) -> Option<Op> {
        match s {
            "add" => Some(Op::Add),
            "mult" => Some(Op::Mult),
            _ => None,
        }
    }

    /// Smallest number of operands a request may carry.
    pub fn min_operands(self) -> usize {
        match self {
            Op::Add => 1,
            Op::Mult => 2,
        }
    }
}

impl fmt::Display for Op {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}
