//! Validation and commit.
//!
//! A transaction is valid iff its endorsements satisfy the policy and every
//! version in its read set equals the version current at its position,
//! counting writes of earlier valid transactions in the same block. Invalid
//! transactions stay in the block, flagged, and change nothing.

use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::identity::{Msp, Role};

use super::block::{Block, ValidationFlag};
use super::private::CollectionPolicy;
use super::state::WorldState;
use super::tx::{Creator, PrivateWriteKind, Transaction, Version, WriteValue};
use super::LedgerError;

/// `any-one-of(orgs)`: one valid signature from a peer of any listed org.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct EndorsementPolicy {
    pub any_one_of: BTreeSet<String>,
}

impl EndorsementPolicy {
    pub fn any_one_of(orgs: impl IntoIterator<Item = impl Into<String>>) -> Result<Self, LedgerError> {
        let any_one_of: BTreeSet<String> = orgs.into_iter().map(Into::into).collect();
        if any_one_of.is_empty() {
            return Err(LedgerError::EmptyPolicy);
        }
        Ok(EndorsementPolicy { any_one_of })
    }

    pub fn orgs(&self) -> &BTreeSet<String> {
        &self.any_one_of
    }

    /// True iff some endorsement is a valid peer signature over the tx id
    /// from a listed organization.
    pub fn is_satisfied(&self, tx: &Transaction, msp: &Msp) -> bool {
        tx.endorsements.iter().any(|e| {
            e.endorser.role == Role::Peer
                && self.any_one_of.contains(&e.endorser.org_name)
                && msp.validate(&e.endorser)
                && e.endorser.verify_signature(tx.tx_id.as_bytes(), &e.signature)
        })
    }
}

fn creator_is_valid(tx: &Transaction, msp: &Msp) -> bool {
    match &tx.body.creator {
        Creator::Member {
            identity,
            signature,
        } => {
            msp.validate(identity)
                && identity.verify_signature(tx.body.proposal_digest().as_bytes(), signature)
        }
        // Presentations are checked by the endorser against the issuer key;
        // the endorsement signature covers the presentation bytes.
        Creator::Anonymous(_) => true,
    }
}

fn endorsement_is_valid(
    tx: &Transaction,
    policy: &EndorsementPolicy,
    collections: &[CollectionPolicy],
    msp: &Msp,
) -> bool {
    tx.id_is_consistent()
        && tx
            .body
            .private_writes
            .iter()
            .all(|w| collections.iter().any(|c| c.name == w.collection))
        && creator_is_valid(tx, msp)
        && policy.is_satisfied(tx, msp)
}

/// Computes per-transaction flags for `block` against `state`.
pub fn validate_transactions(
    block: &Block,
    state: &WorldState,
    policy: &EndorsementPolicy,
    collections: &[CollectionPolicy],
    msp: &Msp,
) -> Vec<ValidationFlag> {
    let number = block.number();
    // Versions written by earlier valid transactions of this block.
    let mut overlay: HashMap<&str, Option<Version>> = HashMap::new();
    let mut flags = Vec::with_capacity(block.transactions.len());
    for (i, tx) in block.transactions.iter().enumerate() {
        if !endorsement_is_valid(tx, policy, collections, msp) {
            flags.push(ValidationFlag::InvalidEndorsement);
            continue;
        }
        let fresh = tx.body.read_set.iter().all(|r| {
            let current = match overlay.get(r.key.as_str()) {
                Some(v) => *v,
                None => state.version(&r.key),
            };
            current == r.version
        });
        if !fresh {
            flags.push(ValidationFlag::InvalidMvcc);
            continue;
        }
        let version = Version::new(number, i as u64);
        for w in &tx.body.write_set {
            let v = match w.value {
                WriteValue::Put(_) => Some(version),
                WriteValue::Delete => None,
            };
            overlay.insert(&w.key, v);
        }
        flags.push(ValidationFlag::Valid);
    }
    flags
}

/// Applies the write sets and private anchors of valid transactions in
/// order. Expects `block.validation_flags` to be set.
pub fn commit_block(state: &mut WorldState, block: &Block) {
    let number = block.number();
    for (i, (tx, flag)) in block
        .transactions
        .iter()
        .zip(&block.validation_flags)
        .enumerate()
    {
        if !flag.is_valid() {
            continue;
        }
        let version = Version::new(number, i as u64);
        for w in &tx.body.write_set {
            match &w.value {
                WriteValue::Put(v) => state.put(&w.key, v.clone(), version),
                WriteValue::Delete => state.delete(&w.key),
            }
        }
        for pw in &tx.body.private_writes {
            if let PrivateWriteKind::Anchor(h) = pw.kind {
                state.put_anchor(&pw.collection, &pw.key, h, version);
            }
        }
    }
    state.set_height(number + 1);
}
