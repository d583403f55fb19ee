//! Private data collections.
//!
//! Member peers keep `(plaintext, salt)`; the public state keeps only
//! `H(salt ‖ plaintext)`. Purging drops plaintext and salt and leaves the
//! anchor, which still proves existence to anyone who kept the originals.
//! The salt is 16 random bytes per value: names and addresses are
//! low-entropy, so an unsalted hash could be reversed by dictionary search.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::encoding::{Encode, Encoder};
use crate::hash::Digest;

use super::state::WorldState;
use super::LedgerError;

pub const SALT_LEN: usize = 16;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CollectionPolicy {
    pub name: String,
    pub member_orgs: BTreeSet<String>,
    /// Entries older than this many blocks are swept.
    pub lifetime: Option<u64>,
}

impl CollectionPolicy {
    pub fn new(
        name: impl Into<String>,
        member_orgs: impl IntoIterator<Item = impl Into<String>>,
        lifetime: Option<u64>,
    ) -> Result<Self, LedgerError> {
        let name = name.into();
        let member_orgs: BTreeSet<String> = member_orgs.into_iter().map(Into::into).collect();
        if member_orgs.is_empty() {
            return Err(LedgerError::EmptyCollection(name));
        }
        Ok(CollectionPolicy {
            name,
            member_orgs,
            lifetime,
        })
    }

    pub fn is_member(&self, org: &str) -> bool {
        self.member_orgs.contains(org)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrivateEntry {
    pub plaintext: Vec<u8>,
    pub salt: [u8; SALT_LEN],
    /// Block at which the value was committed.
    pub written_at: u64,
}

/// One member peer's copy of a collection.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrivateStore {
    collection_name: String,
    member_orgs: BTreeSet<String>,
    entries: BTreeMap<String, PrivateEntry>,
}

impl PrivateStore {
    pub fn new(policy: &CollectionPolicy) -> Self {
        PrivateStore {
            collection_name: policy.name.clone(),
            member_orgs: policy.member_orgs.clone(),
            entries: BTreeMap::new(),
        }
    }

    pub fn collection_name(&self) -> &str {
        &self.collection_name
    }

    pub fn member_orgs(&self) -> &BTreeSet<String> {
        &self.member_orgs
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    /// Stores `(plaintext, salt)` and returns the anchor to publish.
    pub fn put(
        &mut self,
        key: &str,
        plaintext: &[u8],
        salt: &[u8],
        written_at: u64,
    ) -> Result<Digest, LedgerError> {
        let salt: [u8; SALT_LEN] = salt
            .try_into()
            .map_err(|_| LedgerError::BadSaltLength(salt.len()))?;
        self.entries.insert(
            key.to_string(),
            PrivateEntry {
                plaintext: plaintext.to_vec(),
                salt,
                written_at,
            },
        );
        Ok(anchor_of(&salt, plaintext))
    }

    pub fn get(&self, key: &str) -> Option<&PrivateEntry> {
        self.entries.get(key)
    }

    /// Removes plaintext and salt. Public anchors are not touched.
    pub fn purge(&mut self, key: &str) -> Result<PrivateEntry, LedgerError> {
        self.entries
            .remove(key)
            .ok_or_else(|| LedgerError::UnknownPrivateKey(key.to_string()))
    }
}

impl Encode for PrivateStore {
    fn encode(&self, enc: &mut Encoder) {
        enc.str(&self.collection_name).len(self.member_orgs.len());
        for org in &self.member_orgs {
            enc.str(org);
        }
        enc.len(self.entries.len());
        for (k, e) in &self.entries {
            enc.str(k).bytes(&e.plaintext).raw(&e.salt).u64(e.written_at);
        }
    }
}

/// `H(salt ‖ plaintext)`
pub fn anchor_of(salt: &[u8], plaintext: &[u8]) -> Digest {
    Digest::of_parts([salt, plaintext])
}

pub fn verify_private_anchor(plaintext: &[u8], salt: &[u8], anchor: &Digest) -> bool {
    salt.len() == SALT_LEN && anchor_of(salt, plaintext) == *anchor
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PurgedEntry {
    pub collection: String,
    pub key: String,
    /// The public anchor was still present after the purge.
    pub anchor_retained: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PurgeReport {
    pub purged: Vec<PurgedEntry>,
}

/// Purges every entry whose age in blocks exceeds its collection lifetime.
/// Collections without a lifetime are never swept.
pub fn sweep_expired(
    state: &WorldState,
    stores: &mut [PrivateStore],
    policies: &[CollectionPolicy],
    current_block: u64,
) -> PurgeReport {
    let mut report = PurgeReport::default();
    for store in stores.iter_mut() {
        let Some(lifetime) = policies
            .iter()
            .find(|p| p.name == store.collection_name)
            .and_then(|p| p.lifetime)
        else {
            continue;
        };
        let expired: Vec<String> = store
            .entries
            .iter()
            .filter(|(_, e)| current_block.saturating_sub(e.written_at) > lifetime)
            .map(|(k, _)| k.clone())
            .collect();
        for key in expired {
            store.entries.remove(&key);
            report.purged.push(PurgedEntry {
                anchor_retained: state.anchor(&store.collection_name, &key).is_some(),
                collection: store.collection_name.clone(),
                key,
            });
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ledger::tx::Version;

    fn policy(lifetime: Option<u64>) -> CollectionPolicy {
        CollectionPolicy::new("org1-private", ["Healthcenter"], lifetime).unwrap()
    }

    #[test]
    fn anchor_roundtrip() {
        let mut store = PrivateStore::new(&policy(None));
        let salt = [7u8; 16];
        let anchor = store.put("P001", b"Ann Lee|1 Road", &salt, 0).unwrap();
        assert!(verify_private_anchor(b"Ann Lee|1 Road", &salt, &anchor));
        assert!(!verify_private_anchor(b"Ann Lee|1 Road", &[8u8; 16], &anchor));
    }

    #[test]
    fn distinct_salts_distinct_anchors() {
        let mut store = PrivateStore::new(&policy(None));
        let a = store.put("k", b"same", &[1u8; 16], 0).unwrap();
        let b = store.put("k", b"same", &[2u8; 16], 0).unwrap();
        assert_ne!(a, b);
    }

    #[test]
    fn bad_salt_length() {
        let mut store = PrivateStore::new(&policy(None));
        assert!(matches!(
            store.put("k", b"x", &[0u8; 15], 0),
            Err(LedgerError::BadSaltLength(15))
        ));
    }

    #[test]
    fn empty_membership_rejected() {
        assert!(CollectionPolicy::new("c", Vec::<String>::new(), None).is_err());
    }

    #[test]
    fn purge_unknown_key() {
        let mut store = PrivateStore::new(&policy(None));
        assert!(matches!(
            store.purge("nope"),
            Err(LedgerError::UnknownPrivateKey(_))
        ));
    }

    #[test]
    fn purge_keeps_anchor_verifiable() {
        let mut state = WorldState::new();
        let mut store = PrivateStore::new(&policy(None));
        let salt = [3u8; 16];
        let anchor = store.put("P001", b"secret", &salt, 0).unwrap();
        state.put_anchor("org1-private", "P001", anchor, Version::new(0, 0));
        store.purge("P001").unwrap();
        assert!(store.get("P001").is_none());
        let kept = state.anchor("org1-private", "P001").unwrap();
        assert!(verify_private_anchor(b"secret", &salt, &kept.value_hash));
    }

    #[test]
    fn purge_all_conserves_anchors() {
        let mut state = WorldState::new();
        let mut store = PrivateStore::new(&policy(None));
        for i in 0..10 {
            let key = format!("k{i}");
            let a = store.put(&key, b"v", &[i as u8; 16], 0).unwrap();
            state.put_anchor("org1-private", &key, a, Version::new(0, i));
        }
        for i in 0..10 {
            store.purge(&format!("k{i}")).unwrap();
        }
        assert!(store.is_empty());
        assert_eq!(state.anchor_count(), 10);
    }

    #[test]
    fn sweep_boundaries() {
        let state = WorldState::new();
        let policies = [policy(Some(10))];
        let mut stores = [PrivateStore::new(&policies[0])];
        stores[0].put("k", b"v", &[0u8; 16], 5).unwrap();

        let report = sweep_expired(&state, &mut stores, &policies, 15);
        assert!(report.purged.is_empty(), "age 10 is not > 10");
        let report = sweep_expired(&state, &mut stores, &policies, 16);
        assert_eq!(report.purged.len(), 1);
        assert_eq!(report.purged[0].key, "k");
        assert!(stores[0].is_empty());
    }

    #[test]
    fn no_lifetime_never_swept() {
        let state = WorldState::new();
        let policies = [policy(None)];
        let mut stores = [PrivateStore::new(&policies[0])];
        stores[0].put("k", b"v", &[0u8; 16], 0).unwrap();
        let report = sweep_expired(&state, &mut stores, &policies, u64::MAX);
        assert!(report.purged.is_empty());
        assert_eq!(stores[0].len(), 1);
    }
}
