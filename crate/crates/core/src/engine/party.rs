use std::collections::{HashMap, HashSet};
use std::sync::{Mutex, PoisonError};

use rand::{CryptoRng, RngCore};

use crate::access::{AcsKeyMaterial, JointPublicKey};
use crate::bcp::{KeyPair, NonceRange, Plaintext, PublicKey, PublicParams};
use crate::error::{Error, Result};

use super::protocol::{self, Blinding};
use super::{
    AuthorizedRequest, CiphertextId, CiphertextStore, ComputeRequest, Message, Op, RequestId,
    ResultMsg, UploadMsg,
};

pub struct DataProvider {
    pp: PublicParams,
    joint: JointPublicKey,
    nonce: NonceRange,
}

impl DataProvider {
    pub fn new(pp: PublicParams, joint: JointPublicKey) -> Self {
        DataProvider {
            pp,
            joint,
            nonce: NonceRange::Full,
        }
    }

    pub fn with_nonce(mut self, nonce: NonceRange) -> Self {
        self.nonce = nonce;
        self
    }

    pub fn upload<R: RngCore + CryptoRng>(
        &self,
        values: &[Plaintext],
        rng: &mut R,
    ) -> Result<UploadMsg> {
        protocol::dp_upload(&self.pp, &self.joint, values, self.nonce, rng)
    }
}

/// The CSP: holds the store and secret `a`.
///
/// Inbound messages are handled one at a time; `δ` and `r_i` live only on
/// the stack of the call that builds a package.
pub struct CloudServer {
    pp: PublicParams,
    keys: KeyPair,
    store: CiphertextStore,
    nonce: NonceRange,
    blinding: Blinding,
    inbox: Mutex<()>,
}

impl CloudServer {
    pub fn new(pp: PublicParams, keys: KeyPair, store: CiphertextStore) -> Self {
        CloudServer {
            pp,
            keys,
            store,
            nonce: NonceRange::Full,
            blinding: Blinding::Random,
            inbox: Mutex::new(()),
        }
    }

    pub fn with_nonce(mut self, nonce: NonceRange) -> Self {
        self.nonce = nonce;
        self
    }

    /// Test hook: pin `δ` and the `r_i`.
    pub fn with_blinding(mut self, blinding: Blinding) -> Self {
        self.blinding = blinding;
        self
    }

    pub fn store(&self) -> &CiphertextStore {
        &self.store
    }

    pub fn public_key(&self) -> &PublicKey {
        self.keys.pk()
    }

    pub fn ingest(&self, msg: &UploadMsg) -> Result<Vec<CiphertextId>> {
        let _turn = self.inbox.lock().unwrap_or_else(PoisonError::into_inner);
        protocol::csp_ingest(&self.store, msg)
    }

    /// Runs the requested computation and returns the package for the ACS.
    pub fn execute<R: RngCore + CryptoRng>(
        &self,
        auth: &AuthorizedRequest,
        rng: &mut R,
    ) -> Result<Message> {
        let _turn = self.inbox.lock().unwrap_or_else(PoisonError::into_inner);
        let sk = self.keys.sk();
        match auth.op {
            Op::Add => protocol::csp_execute_add(
                &self.store,
                auth,
                sk,
                &self.pp,
                &self.blinding,
                self.nonce,
                rng,
            )
            .map(Message::AddPackage),
            Op::Mult => protocol::csp_execute_mult(
                &self.store,
                auth,
                sk,
                &self.pp,
                &self.blinding,
                self.nonce,
                rng,
            )
            .map(Message::MultPackage),
        }
    }
}

#[derive(Debug)]
struct Pending {
    requester: PublicKey,
    op: Op,
    operands: usize,
}

#[derive(Debug, Default)]
struct AcsState {
    pending: HashMap<RequestId, Pending>,
    next: u64,
}

/// What the ACS hands back after finishing a request.
#[derive(Clone, Debug)]
pub struct Finalized {
    pub result: ResultMsg,
    /// Plaintexts the ACS saw while finishing: `m + δ` for addition;
    /// each `m_i r_i` then `w` for multiplication.
    pub observed: Vec<Plaintext>,
}

/// The ACS: key material, allowlist of requester keys, and in-flight requests.
///
/// A request is `authorize`d once and `finalize`d once; finalizing removes it.
pub struct AccessControlServer {
    pp: PublicParams,
    material: AcsKeyMaterial,
    allowlist: HashSet<PublicKey>,
    nonce: NonceRange,
    state: Mutex<AcsState>,
}

impl AccessControlServer {
    pub fn new(pp: PublicParams, material: AcsKeyMaterial) -> Self {
        AccessControlServer {
            pp,
            material,
            allowlist: HashSet::new(),
            nonce: NonceRange::Full,
            state: Mutex::new(AcsState::default()),
        }
    }

    pub fn with_nonce(mut self, nonce: NonceRange) -> Self {
        self.nonce = nonce;
        self
    }

    pub fn allow(&mut self, requester: PublicKey) {
        self.allowlist.insert(requester);
    }

    pub fn material(&self) -> &AcsKeyMaterial {
        &self.material
    }

    pub fn pending(&self) -> usize {
        self.state
            .lock()
            .unwrap_or_else(PoisonError::into_inner)
            .pending
            .len()
    }

    pub fn authorize(&self, req: &ComputeRequest) -> Result<AuthorizedRequest> {
        let mut state = self.state.lock().unwrap_or_else(PoisonError::into_inner);
        let request_id = RequestId(state.next);
        let auth =
            protocol::acs_authorize(&self.material, &self.allowlist, req, request_id, &self.pp)?;
        state.next += 1;
        state.pending.insert(
            request_id,
            Pending {
                requester: req.requester().clone(),
                op: req.op(),
                operands: req.ids().len(),
            },
        );
        Ok(auth)
    }

    /// Consumes a CSP package for a pending request.
    pub fn finalize<R: RngCore + CryptoRng>(
        &self,
        package: &Message,
        rng: &mut R,
    ) -> Result<Finalized> {
        let mut state = self.state.lock().unwrap_or_else(PoisonError::into_inner);
        let (request_id, op, operands) = match package {
            Message::AddPackage(p) => (p.request_id, Op::Add, 1),
            Message::MultPackage(p) => (p.request_id, Op::Mult, p.blinded.len()),
            other => {
                return Err(Error::UnexpectedMessage(format!(
                    "ACS cannot finalize a {}",
                    other.kind()
                )))
            }
        };
        let pending = state
            .pending
            .get(&request_id)
            .ok_or(Error::UnknownRequest(request_id.0))?;
        if pending.op != op || (op == Op::Mult && pending.operands != operands) {
            return Err(Error::UnexpectedMessage(format!(
                "package does not match pending {} request {request_id}",
                pending.op
            )));
        }
        let (result, observed) = match package {
            Message::AddPackage(p) => protocol::acs_finalize_add(
                &self.material,
                p,
                &pending.requester,
                &self.pp,
                self.nonce,
                rng,
            )?,
            Message::MultPackage(p) => protocol::acs_finalize_mult(&self.material, p, &self.pp)?,
            _ => unreachable!("checked above"),
        };
        state.pending.remove(&request_id);
        Ok(Finalized { result, observed })
    }
}

pub struct DataRequester {
    pp: PublicParams,
    keys: KeyPair,
}

impl DataRequester {
    pub fn new(pp: PublicParams, keys: KeyPair) -> Self {
        DataRequester { pp, keys }
    }

    pub fn public_key(&self) -> &PublicKey {
        self.keys.pk()
    }

    pub fn request(&self, op: Op, ids: Vec<CiphertextId>) -> Result<ComputeRequest> {
        ComputeRequest::new(op, ids, self.keys.pk().clone())
    }

    pub fn decrypt(&self, msg: &ResultMsg) -> Result<Plaintext> {
        protocol::dr_decrypt(self.keys.sk(), msg, &self.pp)
    }
}
