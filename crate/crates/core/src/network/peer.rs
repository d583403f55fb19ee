use std::collections::BTreeMap;

use crate::chaincode::PrivateData;
use crate::encoding::Encoder;
use crate::hash::Digest;
use crate::identity::{Member, Msp, StandardIdentity};
use crate::ledger::{
    anchor_of, commit_block, sweep_expired, validate_transactions, Block, CollectionPolicy,
    EndorsementPolicy, LedgerChain, PrivateStore, PrivateWriteKind, PurgeReport, ValidationFlag,
    WorldState,
};

use super::NetworkError;

/// One peer's replica: chain, public state and, for collection members, the
/// private store plus plaintext received at endorsement time.
#[derive(Debug, Clone)]
pub struct Peer {
    member: Member,
    chain: LedgerChain,
    state: WorldState,
    private: Option<PrivateStore>,
    /// Plaintext keyed by transaction id, waiting for that transaction to
    /// commit.
    transient: BTreeMap<Digest, Vec<PrivateData>>,
}

/// What one peer did with one block.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PeerCommit {
    pub flags: Vec<ValidationFlag>,
    pub purged: PurgeReport,
}

impl Peer {
    pub(crate) fn new(member: Member, private: Option<PrivateStore>) -> Self {
        Peer {
            member,
            chain: LedgerChain::new(),
            state: WorldState::new(),
            private,
            transient: BTreeMap::new(),
        }
    }

    pub fn identity(&self) -> &StandardIdentity {
        self.member.identity()
    }

    pub fn name(&self) -> String {
        format!("{}/{}", self.identity().org_name, self.identity().subject)
    }

    pub fn org(&self) -> &str {
        &self.member.identity().org_name
    }

    pub(crate) fn member(&self) -> &Member {
        &self.member
    }

    pub fn chain(&self) -> &LedgerChain {
        &self.chain
    }

    pub fn state(&self) -> &WorldState {
        &self.state
    }

    pub fn private_store(&self) -> Option<&PrivateStore> {
        self.private.as_ref()
    }

    pub fn transient_len(&self) -> usize {
        self.transient.len()
    }

    pub(crate) fn receive_private(&mut self, tx_id: Digest, data: Vec<PrivateData>) {
        self.transient.insert(tx_id, data);
    }

    /// Validates `block` against local state, appends it and applies it.
    pub(crate) fn commit(
        &mut self,
        block: &Block,
        policy: &EndorsementPolicy,
        collections: &[CollectionPolicy],
        msp: &Msp,
    ) -> Result<PeerCommit, NetworkError> {
        let expected = self.chain.len() as u64;
        if block.number() != expected {
            return Err(NetworkError::ChainGap {
                peer: self.name(),
                expected,
                got: block.number(),
            });
        }
        let flags = validate_transactions(block, &self.state, policy, collections, msp);
        let mut sealed = block.clone();
        sealed.validation_flags = flags.clone();
        self.chain.append(sealed)?;
        let block = self.chain.last().expect("just appended");
        commit_block(&mut self.state, block);

        let mut purged = PurgeReport::default();
        if let Some(store) = &mut self.private {
            for (tx, flag) in block.transactions.iter().zip(&flags) {
                let data = self.transient.remove(&tx.tx_id).unwrap_or_default();
                if !flag.is_valid() {
                    continue;
                }
                for pw in &tx.body.private_writes {
                    if pw.collection != store.collection_name() {
                        continue;
                    }
                    match pw.kind {
                        PrivateWriteKind::Anchor(anchor) => {
                            // Plaintext that does not match its anchor is dropped.
                            if let Some(pd) = data.iter().find(|d| {
                                d.key == pw.key && anchor_of(&d.salt, &d.plaintext) == anchor
                            }) {
                                store.put(&pd.key, &pd.plaintext, &pd.salt, block.number())?;
                            }
                        }
                        PrivateWriteKind::Purge => {
                            if store.purge(&pw.key).is_ok() {
                                purged.purged.push(crate::ledger::PurgedEntry {
                                    collection: pw.collection.clone(),
                                    key: pw.key.clone(),
                                    anchor_retained: self
                                        .state
                                        .anchor(&pw.collection, &pw.key)
                                        .is_some(),
                                });
                            }
                        }
                    }
                }
            }
            let swept = sweep_expired(
                &self.state,
                std::slice::from_mut(store),
                collections,
                block.number(),
            );
            purged.purged.extend(swept.purged);
        }
        Ok(PeerCommit { flags, purged })
    }

    /// Everything this peer holds, serialized: chain, public state, private
    /// store and pending transient data. Used to audit where plaintext lives.
    pub fn memory_image(&self) -> Vec<u8> {
        let mut enc = Encoder::new();
        enc.item(self.identity())
            .bytes(&self.chain.export())
            .item(&self.state);
        match &self.private {
            Some(store) => enc.u8(1).item(store),
            None => enc.u8(0),
        };
        enc.len(self.transient.len());
        for (id, data) in &self.transient {
            enc.digest(id).len(data.len());
            for d in data {
                enc.str(&d.collection)
                    .str(&d.key)
                    .bytes(&d.plaintext)
                    .raw(&d.salt);
            }
        }
        enc.finish()
    }
}

