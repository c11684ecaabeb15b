use std::collections::HashMap;
use std::sync::{Arc, PoisonError, RwLock};

use crate::bcp::{Ciphertext, Domain};
use crate::error::{domain_check, Error, Result};

use super::{CiphertextId, UploadMsg};

#[derive(Debug, Default)]
struct Inner {
    entries: HashMap<CiphertextId, Ciphertext>,
    next: u64,
}

/// The CSP's joint-domain ciphertext store.
///
/// Cloning shares the underlying map. Reads run concurrently; writes are serialized.
#[derive(Clone, Debug, Default)]
pub struct CiphertextStore {
    inner: Arc<RwLock<Inner>>,
}

impl CiphertextStore {
    pub fn new() -> Self {
        Self::default()
    }

    /// Stores every ciphertext of `msg` under a fresh id; ids come back in input order.
    /// Nothing is stored if any ciphertext is outside the joint domain.
    pub fn ingest(&self, msg: &UploadMsg) -> Result<Vec<CiphertextId>> {
        for c in &msg.ciphertexts {
            domain_check(Domain::Joint, c.domain())?;
        }
        let mut inner = self.inner.write().unwrap_or_else(PoisonError::into_inner);
        let mut ids = Vec::with_capacity(msg.ciphertexts.len());
        for c in &msg.ciphertexts {
            let id = CiphertextId(inner.next);
            inner.next += 1;
            inner.entries.insert(id, c.clone());
            ids.push(id);
        }
        Ok(ids)
    }

    /// Stores under a caller-chosen id, e.g. when reloading from disk.
    pub fn insert_with_id(&self, id: CiphertextId, c: Ciphertext) -> Result<()> {
        domain_check(Domain::Joint, c.domain())?;
        let mut inner = self.inner.write().unwrap_or_else(PoisonError::into_inner);
        if inner.entries.contains_key(&id) {
            return Err(Error::Invariant(format!(
                "ciphertext id {id} already in use"
            )));
        }
        inner.entries.insert(id, c);
        inner.next = inner.next.max(id.0 + 1);
        Ok(())
    }

    pub fn get(&self, id: CiphertextId) -> Option<Ciphertext> {
        let inner = self.inner.read().unwrap_or_else(PoisonError::into_inner);
        inner.entries.get(&id).cloned()
    }

    /// Looks up every id, failing on the first unknown one.
    pub fn resolve(&self, ids: &[CiphertextId]) -> Result<Vec<Ciphertext>> {
        let inner = self.inner.read().unwrap_or_else(PoisonError::into_inner);
        ids.iter()
            .map(|id| inner.entries.get(id).cloned().ok_or(Error::UnknownId(*id)))
            .collect()
    }

    pub fn ids(&self) -> Vec<CiphertextId> {
        let inner = self.inner.read().unwrap_or_else(PoisonError::into_inner);
        let mut ids: Vec<_> = inner.entries.keys().copied().collect();
        ids.sort();
        ids
    }

    pub fn len(&self) -> usize {
        self.inner
            .read()
            .unwrap_or_else(PoisonError::into_inner)
            .entries
            .len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}
