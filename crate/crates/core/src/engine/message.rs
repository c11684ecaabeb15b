use std::collections::HashSet;

use crate::bcp::{Ciphertext, Domain, PublicKey};
use crate::error::{Error, Result};

use super::{CiphertextId, Op, RequestId, Role};

/// Joint-domain ciphertexts from a data provider, one per value.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct UploadMsg {
    pub ciphertexts: Vec<Ciphertext>,
}

/// A requester's ask, addressed to its ACS.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ComputeRequest {
    op: Op,
    ids: Vec<CiphertextId>,
    requester: PublicKey,
}

impl ComputeRequest {
    /// Rejects empty or repeated ids and too few operands for `op`.
    pub fn new(op: Op, ids: Vec<CiphertextId>, requester: PublicKey) -> Result<Self> {
        check_ids(op, &ids)?;
        Ok(ComputeRequest { op, ids, requester })
    }

    pub fn op(&self) -> Op {
        self.op
    }

    pub fn ids(&self) -> &[CiphertextId] {
        &self.ids
    }

    pub fn requester(&self) -> &PublicKey {
        &self.requester
    }
}

pub(crate) fn check_ids(op: Op, ids: &[CiphertextId]) -> Result<()> {
    if ids.len() < op.min_operands() {
        return Err(Error::MalformedRequest(format!(
            "{op} needs at least {} operands, got {}",
            op.min_operands(),
            ids.len()
        )));
    }
    let mut seen = HashSet::with_capacity(ids.len());
    if let Some(dup) = ids.iter().find(|id| !seen.insert(**id)) {
        return Err(Error::MalformedRequest(format!("duplicate id {dup}")));
    }
    Ok(())
}

/// What the ACS forwards to the CSP: the request without the requester's
/// public value, plus the re-encryption key.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AuthorizedRequest {
    pub request_id: RequestId,
    pub op: Op,
    pub ids: Vec<CiphertextId>,
    pub rk: PublicKey,
}

/// `([m + δ]_ACS, [δ]_rk)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AddPackage {
    pub request_id: RequestId,
    pub blinded: Ciphertext,
    pub noise: Ciphertext,
}

/// `([m_1 r_1]_ACS, ..., [m_n r_n]_ACS, [r_3]_rk)` with `r_3 = (∏ r_i)^{-1} mod N`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MultPackage {
    pub request_id: RequestId,
    pub blinded: Vec<Ciphertext>,
    pub unblinder: Ciphertext,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ResultMsg {
    pub request_id: RequestId,
    pub result: Ciphertext,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Message {
    Upload(UploadMsg),
    Request(ComputeRequest),
    Authorized(AuthorizedRequest),
    AddPackage(AddPackage),
    MultPackage(MultPackage),
    Result(ResultMsg),
}

impl Message {
    pub fn kind(&self) -> &'static str {
        match self {
            Message::Upload(_) => "upload",
            Message::Request(_) => "compute_request",
            Message::Authorized(_) => "authorized_request",
            Message::AddPackage(_) => "add_package",
            Message::MultPackage(_) => "mult_package",
            Message::Result(_) => "result",
        }
    }

    /// Every ciphertext the message carries.
    pub fn ciphertexts(&self) -> Vec<&Ciphertext> {
        match self {
            Message::Upload(m) => m.ciphertexts.iter().collect(),
            Message::Request(_) | Message::Authorized(_) => Vec::new(),
            Message::AddPackage(p) => vec![&p.blinded, &p.noise],
            Message::MultPackage(p) => p.blinded.iter().chain([&p.unblinder]).collect(),
            Message::Result(r) => vec![&r.result],
        }
    }

    /// Ciphertexts decryptable by a requester key.
    pub fn dr_ciphertexts(&self) -> usize {
        self.ciphertexts()
            .iter()
            .filter(|c| c.domain() == Domain::Dr)
            .count()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Envelope {
    pub from: Role,
    pub to: Role,
    pub message: Message,
}

impl Envelope {
    pub fn new(from: Role, to: Role, message: Message) -> Self {
        Envelope { from, to, message }
    }
}
