use std::collections::BTreeMap;

use serde::Serialize;

use crate::encoding::{Encode, Encoder};
use crate::hash::Digest;

use super::tx::Version;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StateEntry {
    #[serde(with = "crate::hexser")]
    pub value: Vec<u8>,
    pub version: Version,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct AnchorEntry {
    pub value_hash: Digest,
    pub version: Version,
}

/// Versioned public key-value state plus the anchors of private data.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct WorldState {
    entries: BTreeMap<String, StateEntry>,
    private_anchors: BTreeMap<(String, String), AnchorEntry>,
    height: u64,
}

impl WorldState {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, key: &str) -> Option<&StateEntry> {
        self.entries.get(key)
    }

    pub fn value(&self, key: &str) -> Option<&[u8]> {
        self.entries.get(key).map(|e| e.value.as_slice())
    }

    pub fn version(&self, key: &str) -> Option<Version> {
        self.entries.get(key).map(|e| e.version)
    }

    pub fn anchor(&self, collection: &str, key: &str) -> Option<&AnchorEntry> {
        self.private_anchors
            .get(&(collection.to_string(), key.to_string()))
    }

    pub fn entries(&self) -> impl Iterator<Item = (&str, &StateEntry)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn anchors(&self) -> impl Iterator<Item = (&(String, String), &AnchorEntry)> {
        self.private_anchors.iter()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn anchor_count(&self) -> usize {
        self.private_anchors.len()
    }

    /// Number of blocks committed so far.
    pub fn height(&self) -> u64 {
        self.height
    }

    pub(crate) fn put(&mut self, key: &str, value: Vec<u8>, version: Version) {
        self.entries
            .insert(key.to_string(), StateEntry { value, version });
    }

    pub(crate) fn delete(&mut self, key: &str) {
        self.entries.remove(key);
    }

    pub(crate) fn put_anchor(&mut self, collection: &str, key: &str, value_hash: Digest, version: Version) {
        self.private_anchors.insert(
            (collection.to_string(), key.to_string()),
            AnchorEntry {
                value_hash,
                version,
            },
        );
    }

    pub(crate) fn set_height(&mut self, height: u64) {
        self.height = height;
    }

    /// Sorted JSON snapshot used for cross-peer equality checks.
    pub fn snapshot_json(&self) -> String {
        #[derive(Serialize)]
        #[serde(rename_all = "camelCase")]
        struct Snapshot<'a> {
            height: u64,
            entries: &'a BTreeMap<String, StateEntry>,
            private_anchors: BTreeMap<String, &'a AnchorEntry>,
        }
        let snapshot = Snapshot {
            height: self.height,
            entries: &self.entries,
            private_anchors: self
                .private_anchors
                .iter()
                .map(|((c, k), v)| (format!("{c}/{k}"), v))
                .collect(),
        };
        serde_json::to_string(&snapshot).expect("state snapshot serializes")
    }
}

impl Encode for WorldState {
    fn encode(&self, enc: &mut Encoder) {
        enc.u64(self.height).len(self.entries.len());
        for (k, e) in &self.entries {
            enc.str(k).bytes(&e.value).item(&e.version);
        }
        enc.len(self.private_anchors.len());
        for ((c, k), a) in &self.private_anchors {
            enc.str(c).str(k).digest(&a.value_hash).item(&a.version);
        }
    }
}
