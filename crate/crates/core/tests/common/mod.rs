//! Helpers shared by the integration test targets.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use medledger::chaincode::EhrRecord;
use medledger::identity::{
    enroll_member, setup_org_ca, verify_member, verify_signature, Member, Msp, Role,
};
use medledger::ledger::{
    commit_block, validate_transactions, Block, Creator, EndorsementPolicy, Invocation,
    LedgerChain, PrivateWriteKind, ReadItem, Transaction, TxBody, ValidationFlag, Version,
    WorldState, WriteItem, WriteValue,
};
use medledger::network::WorkloadOp;
use medledger::Digest;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

pub fn contains(hay: &[u8], needle: &str) -> bool {
    let n = needle.as_bytes();
    !n.is_empty() && hay.windows(n.len()).any(|w| w == n)
}

pub fn op(kind: &str, client: &str, args: serde_json::Value) -> WorkloadOp {
    WorkloadOp::new(kind, client, args)
}

pub fn create_op(client: &str, r: &EhrRecord) -> WorkloadOp {
    op("create", client, serde_json::to_value(r).unwrap())
}

// ---------------------------------------------------------------------------
// Serial-replay oracle.
//
// Applies transactions strictly one at a time to a plain map. A transaction
// is valid iff `endorsed` says so and every read version equals the map's
// version at that moment; valid writes land immediately.
// ---------------------------------------------------------------------------

#[derive(Debug, Default, Clone, PartialEq, Eq)]
pub struct OracleState {
    pub values: BTreeMap<String, (Vec<u8>, (u64, u64))>,
    pub anchors: BTreeMap<(String, String), (Digest, (u64, u64))>,
}

impl OracleState {
    pub fn matches(&self, state: &WorldState) -> bool {
        let values: BTreeMap<String, (Vec<u8>, (u64, u64))> = state
            .entries()
            .map(|(k, e)| (k.to_string(), (e.value.clone(), (e.version.block, e.version.tx))))
            .collect();
        let anchors: BTreeMap<(String, String), (Digest, (u64, u64))> = state
            .anchors()
            .map(|(k, a)| (k.clone(), (a.value_hash, (a.version.block, a.version.tx))))
            .collect();
        values == self.values && anchors == self.anchors
    }
}

pub fn oracle_replay(
    blocks: &[&Block],
    endorsed: impl Fn(&Transaction) -> bool,
) -> (OracleState, Vec<Vec<ValidationFlag>>) {
    let mut st = OracleState::default();
    let mut flags = Vec::new();
    for block in blocks {
        let number = block.header.number;
        let mut bf = Vec::new();
        for (i, tx) in block.transactions.iter().enumerate() {
            if !endorsed(tx) {
                bf.push(ValidationFlag::InvalidEndorsement);
                continue;
            }
            let fresh = tx.body.read_set.iter().all(|r| {
                st.values.get(&r.key).map(|e| e.1) == r.version.map(|v| (v.block, v.tx))
            });
            if !fresh {
                bf.push(ValidationFlag::InvalidMvcc);
                continue;
            }
            let v = (number, i as u64);
            for w in &tx.body.write_set {
                match &w.value {
                    WriteValue::Put(bytes) => {
                        st.values.insert(w.key.clone(), (bytes.clone(), v));
                    }
                    WriteValue::Delete => {
                        st.values.remove(&w.key);
                    }
                }
            }
            for pw in &tx.body.private_writes {
                if let PrivateWriteKind::Anchor(h) = pw.kind {
                    st.anchors.insert((pw.collection.clone(), pw.key.clone()), (h, v));
                }
            }
            bf.push(ValidationFlag::Valid);
        }
        flags.push(bf);
    }
    (st, flags)
}

/// Endorsement check written against the raw primitives: some endorser is a
/// peer of a listed org, certified by that org's root, and signed the id.
pub fn oracle_endorsed(
    tx: &Transaction,
    roots: &BTreeMap<String, [u8; 32]>,
    policy_orgs: &BTreeSet<String>,
) -> bool {
    if tx.tx_id != Digest::of(&medledger::encoding::Encode::to_canonical_bytes(&tx.body)) {
        return false;
    }
    let creator_ok = match &tx.body.creator {
        Creator::Member {
            identity,
            signature,
        } => {
            roots
                .get(&identity.org_name)
                .is_some_and(|r| verify_member(identity, r))
                && verify_signature(
                    &identity.public_key,
                    tx.body.proposal_digest().as_bytes(),
                    signature,
                )
        }
        Creator::Anonymous(_) => true,
    };
    creator_ok
        && tx.endorsements.iter().any(|e| {
            e.endorser.role == Role::Peer
                && policy_orgs.contains(&e.endorser.org_name)
                && roots
                    .get(&e.endorser.org_name)
                    .is_some_and(|r| verify_member(&e.endorser, r))
                && verify_signature(&e.endorser.public_key, tx.tx_id.as_bytes(), &e.signature)
        })
}

// ---------------------------------------------------------------------------
// Ledger-level conflict workload.
// ---------------------------------------------------------------------------

pub struct LedgerFixture {
    pub msp: Msp,
    pub policy: EndorsementPolicy,
    pub peers: Vec<Member>,
    pub outsider_peer: Member,
    pub client: Member,
}

impl LedgerFixture {
    pub fn new(seed: u64) -> Self {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let orgs = ["Healthcenter", "Hospital", "PublicHealth"];
        let cas: Vec<_> = orgs.iter().map(|o| setup_org_ca(o, &mut rng).unwrap()).collect();
        let msp = Msp::new(cas.iter().map(|c| (c.org_name().to_string(), c.public_key())).collect());
        let peers = cas
            .iter()
            .take(2)
            .map(|ca| enroll_member(ca, "peer0", Role::Peer, &mut rng).unwrap())
            .collect();
        let outsider_peer = enroll_member(&cas[2], "peer0", Role::Peer, &mut rng).unwrap();
        let client = enroll_member(&cas[1], "writer", Role::Client, &mut rng).unwrap();
        LedgerFixture {
            msp,
            policy: EndorsementPolicy::any_one_of(["Healthcenter", "Hospital"]).unwrap(),
            peers,
            outsider_peer,
            client,
        }
    }
}

/// Grows a chain of roughly `n_txs` random transactions over a small key
/// space. Read versions come from the committed state (as an endorser would
/// see it), so transactions in one block race each other; a fraction carry
/// fabricated versions or broken endorsements.
pub fn conflict_chain(fx: &LedgerFixture, seed: u64, n_txs: usize) -> (LedgerChain, WorldState) {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let keys: Vec<String> = (0..8).map(|i| format!("k{i}")).collect();
    let mut chain = LedgerChain::new();
    let mut state = WorldState::new();
    let mut genesis = Block::new(0, Digest::ZERO, vec![]);
    genesis.validation_flags = vec![];
    commit_block(&mut state, &genesis);
    chain.append(genesis).unwrap();

    let mut made = 0;
    let mut seq = 0u64;
    while made < n_txs {
        let size = rng.gen_range(1..=25).min(n_txs - made);
        let mut txs = Vec::with_capacity(size);
        for _ in 0..size {
            seq += 1;
            let reads = (0..rng.gen_range(0..=3))
                .map(|_| {
                    let key = keys.choose(&mut rng).unwrap().clone();
                    let mut version = state.version(&key);
                    if rng.gen_bool(0.1) {
                        version = match rng.gen_range(0..3) {
                            0 => None,
                            1 => Some(Version::new(rng.gen_range(0..5), rng.gen_range(0..5))),
                            _ => version.map(|v| Version::new(v.block, v.tx + 1)),
                        };
                    }
                    ReadItem { key, version }
                })
                .collect();
            let writes = (0..rng.gen_range(1..=2))
                .map(|_| {
                    let key = keys.choose(&mut rng).unwrap().clone();
                    if rng.gen_bool(0.15) {
                        WriteItem::delete(key)
                    } else {
                        WriteItem::put(key, seq.to_be_bytes().to_vec())
                    }
                })
                .collect();
            let mut nonce = [0u8; 16];
            nonce[..8].copy_from_slice(&seq.to_be_bytes());
            let invocation = Invocation::new("put", vec![]);
            let signature = fx
                .client
                .sign(medledger::ledger::proposal_digest(&nonce, &invocation).as_bytes());
            let mut tx = Transaction::new(TxBody {
                nonce,
                invocation,
                read_set: reads,
                write_set: writes,
                private_writes: vec![],
                creator: Creator::Member {
                    identity: fx.client.identity().clone(),
                    signature,
                },
            });
            match rng.gen_range(0..20) {
                0 => {}
                1 => tx.endorse(&fx.outsider_peer),
                2 => {
                    tx.endorse(&fx.peers[0]);
                    tx.endorsements[0].signature[rng.gen_range(0..64)] ^= 1;
                }
                _ => tx.endorse(fx.peers.choose(&mut rng).unwrap()),
            }
            txs.push(tx);
        }
        made += size;
        let mut block = Block::new(chain.len() as u64, chain.tip_hash(), txs);
        block.validation_flags =
            validate_transactions(&block, &state, &fx.policy, &[], &fx.msp);
        commit_block(&mut state, &block);
        chain.append(block).unwrap();
    }
    (chain, state)
}
