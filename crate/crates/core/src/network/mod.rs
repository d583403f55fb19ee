//! In-process simulation of the execute-order-validate flow.
//!
//! A [`Network`] holds one CA per organization, `peers_per_org` peers per
//! organization, a single logical ordering service standing in for the
//! configured orderers, and the anonymous-credential issuer. Time is logical:
//! [`Network::tick`] advances the batch timer. Randomness comes from two
//! seeded streams, one for key material and presentations and one for
//! transaction nonces and private-data salts, so a script replayed with
//! anonymous clients draws the same salts as with standard identities.

mod ordering;
mod peer;
mod workload;

use std::collections::{BTreeMap, BTreeSet};
use std::time::Instant;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::chaincode::{self, CallerContext, ChaincodeCall, ChaincodeError, PRIVATE_COLLECTION};
use crate::hash::Digest;
use crate::identity::{
    enroll_member, issue_credential, issuer_setup, present, setup_org_ca, verify_presentation,
    AnonCredential, CredentialError, IdentityError, IssuerKey, IssuerPublic, Member, Msp, OrgCa,
    Role, StandardIdentity, DEFAULT_ATTRIBUTES, ORG_ATTRIBUTE,
};
use crate::ledger::{
    proposal_digest, Block, CollectionPolicy, Creator, EndorsementPolicy, LedgerError,
    Transaction, TxBody, ValidationFlag, SALT_LEN,
};

pub use ordering::OrderingService;
pub use peer::{Peer, PeerCommit};
pub use workload::{
    parse_script, OpOutcome, OpResult, WorkloadOp, WorkloadOptions, WorkloadReport, WorkloadStats,
};

/// Organization that issues orderer identities.
pub const ORDERER_ORG: &str = "OrdererOrg";

#[derive(Debug, Error)]
pub enum NetworkError {
    #[error("invalid network config: {0}")]
    InvalidConfig(String),
    #[error("client is not authenticated: {0}")]
    Unauthenticated(String),
    #[error("unknown client `{0}`")]
    UnknownClient(String),
    #[error(transparent)]
    Chaincode(#[from] ChaincodeError),
    #[error("block {got} does not extend {peer}'s chain (expected {expected})")]
    ChainGap {
        peer: String,
        expected: u64,
        got: u64,
    },
    #[error(transparent)]
    Ledger(#[from] LedgerError),
    #[error(transparent)]
    Identity(#[from] IdentityError),
    #[error(transparent)]
    Credential(#[from] CredentialError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct PolicyConfig {
    pub any_one_of: Vec<String>,
}

/// Network topology and batching parameters. The first organization is the
/// sole member of the private collection.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default)]
pub struct NetworkConfig {
    pub orgs: Vec<String>,
    pub peers_per_org: usize,
    pub orderers: usize,
    /// Defaults to any one of all organizations.
    pub policy: Option<PolicyConfig>,
    pub block_size: usize,
    pub batch_timeout: u64,
    pub seed: u64,
    /// Private entries older than this many blocks are purged.
    pub collection_lifetime: Option<u64>,
}

impl Default for NetworkConfig {
    fn default() -> Self {
        NetworkConfig {
            orgs: ["Healthcenter", "Hospital", "PublicHealth"]
                .map(String::from)
                .to_vec(),
            peers_per_org: 3,
            orderers: 3,
            policy: None,
            block_size: 10,
            batch_timeout: 1,
            seed: 0,
            collection_lifetime: None,
        }
    }
}

impl NetworkConfig {
    pub fn with_seed(seed: u64) -> Self {
        NetworkConfig {
            seed,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), NetworkError> {
        let bad = |m: &str| Err(NetworkError::InvalidConfig(m.to_string()));
        if self.orgs.is_empty() {
            return bad("at least one organization is required");
        }
        let unique: BTreeSet<&String> = self.orgs.iter().collect();
        if unique.len() != self.orgs.len() {
            return bad("organization names must be unique");
        }
        if self.orgs.iter().any(|o| o.is_empty() || o == ORDERER_ORG) {
            return bad("organization names must be non-empty and not reserved");
        }
        if self.peers_per_org < 1 {
            return bad("peersPerOrg must be at least 1");
        }
        if self.orderers < 1 {
            return bad("orderers must be at least 1");
        }
        if self.block_size < 1 {
            return bad("blockSize must be at least 1");
        }
        if self.batch_timeout < 1 {
            return bad("batchTimeout must be at least 1");
        }
        if let Some(p) = &self.policy {
            if p.any_one_of.is_empty() {
                return bad("policy names no organization");
            }
            if let Some(o) = p.any_one_of.iter().find(|o| !self.orgs.contains(o)) {
                return Err(NetworkError::InvalidConfig(format!(
                    "policy names unknown organization `{o}`"
                )));
            }
        }
        Ok(())
    }

    pub fn endorsement_policy(&self) -> Result<EndorsementPolicy, NetworkError> {
        let orgs = match &self.policy {
            Some(p) => p.any_one_of.clone(),
            None => self.orgs.clone(),
        };
        Ok(EndorsementPolicy::any_one_of(orgs)?)
    }
}

/// Whoever submits a proposal.
#[derive(Debug, Clone)]
pub enum Client {
    Member(Member),
    /// Shows `credential` disclosing only the attributes at `reveal`.
    Anonymous {
        credential: AnonCredential,
        reveal: BTreeSet<usize>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CommitMode {
    /// Peers commit one after another on the calling thread.
    #[default]
    Sequential,
    /// One scoped thread per peer.
    Parallel,
}

/// Result of delivering one block to every peer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockCommit {
    pub number: u64,
    pub tx_ids: Vec<Digest>,
    pub flags: Vec<ValidationFlag>,
    /// Private entries purged at this block, counted on one member peer.
    pub purged: usize,
}

/// Pipeline counters.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct NetworkStats {
    pub proposals: u64,
    pub endorsed: u64,
    pub blocks_committed: u64,
    pub txs_committed: u64,
    pub valid_txs: u64,
}

/// A submitted, endorsed and committed transaction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TxReceipt {
    pub tx_id: Digest,
    pub block: u64,
    pub flag: ValidationFlag,
}

pub struct Network {
    config: NetworkConfig,
    policy: EndorsementPolicy,
    collection: CollectionPolicy,
    cas: BTreeMap<String, OrgCa>,
    msp: Msp,
    issuer: IssuerKey,
    peers: Vec<Peer>,
    orderers: Vec<StandardIdentity>,
    ordering: OrderingService,
    clients: BTreeMap<String, Client>,
    next_endorser: BTreeMap<String, usize>,
    crypto_rng: ChaCha20Rng,
    tx_rng: ChaCha20Rng,
    mode: CommitMode,
    stats: NetworkStats,
}

impl std::fmt::Debug for Network {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Network")
            .field("config", &self.config)
            .field("height", &self.height())
            .finish_non_exhaustive()
    }
}

impl Network {
    pub fn init(config: NetworkConfig) -> Result<Self, NetworkError> {
        config.validate()?;
        let policy = config.endorsement_policy()?;
        let collection = CollectionPolicy::new(
            PRIVATE_COLLECTION,
            [config.orgs[0].clone()],
            config.collection_lifetime,
        )?;

        let mut crypto_rng = ChaCha20Rng::seed_from_u64(config.seed);
        let mut tx_rng = ChaCha20Rng::seed_from_u64(config.seed);
        tx_rng.set_stream(1);

        let mut cas = BTreeMap::new();
        for org in config.orgs.iter().map(String::as_str).chain([ORDERER_ORG]) {
            cas.insert(org.to_string(), setup_org_ca(org, &mut crypto_rng)?);
        }
        let msp = Msp::new(
            cas.iter()
                .map(|(org, ca)| (org.clone(), ca.public_key()))
                .collect(),
        );

        let mut peers = Vec::new();
        for org in &config.orgs {
            for i in 0..config.peers_per_org {
                let member = enroll_member(&cas[org], &format!("peer{i}"), Role::Peer, &mut crypto_rng)?;
                let store = collection
                    .is_member(org)
                    .then(|| crate::ledger::PrivateStore::new(&collection));
                peers.push(Peer::new(member, store));
            }
        }
        let orderers = (0..config.orderers)
            .map(|i| {
                enroll_member(&cas[ORDERER_ORG], &format!("orderer{i}"), Role::Orderer, &mut crypto_rng)
                    .map(|m| m.identity().clone())
            })
            .collect::<Result<Vec<_>, _>>()?;
        let issuer = issuer_setup(DEFAULT_ATTRIBUTES.len(), &mut crypto_rng)?;

        let genesis = Block::new(0, Digest::ZERO, Vec::new());
        let ordering = OrderingService::new(config.block_size, config.batch_timeout, &genesis);

        let mut net = Network {
            config,
            policy,
            collection,
            cas,
            msp,
            issuer,
            peers,
            orderers,
            ordering,
            clients: BTreeMap::new(),
            next_endorser: BTreeMap::new(),
            crypto_rng,
            tx_rng,
            mode: CommitMode::Sequential,
            stats: NetworkStats::default(),
        };
        net.deliver_and_commit(&genesis)?;
        net.stats = NetworkStats::default();
        Ok(net)
    }

    pub fn config(&self) -> &NetworkConfig {
        &self.config
    }

    pub fn policy(&self) -> &EndorsementPolicy {
        &self.policy
    }

    pub fn collection(&self) -> &CollectionPolicy {
        &self.collection
    }

    pub fn msp(&self) -> &Msp {
        &self.msp
    }

    pub fn issuer_public(&self) -> &IssuerPublic {
        self.issuer.public()
    }

    pub fn peers(&self) -> &[Peer] {
        &self.peers
    }

    pub fn peers_of<'a>(&'a self, org: &'a str) -> impl Iterator<Item = &'a Peer> + 'a {
        self.peers.iter().filter(move |p| p.org() == org)
    }

    pub fn orderers(&self) -> &[StandardIdentity] {
        &self.orderers
    }

    pub fn ordering(&self) -> &OrderingService {
        &self.ordering
    }

    pub fn stats(&self) -> NetworkStats {
        self.stats
    }

    pub fn set_commit_mode(&mut self, mode: CommitMode) {
        self.mode = mode;
    }

    pub fn set_block_size(&mut self, block_size: usize) {
        self.ordering.set_block_size(block_size);
    }

    /// Blocks committed on the first peer, genesis included.
    pub fn height(&self) -> u64 {
        self.peers[0].chain().len() as u64
    }

    /// Public state snapshot of every peer, in peer order.
    pub fn state_snapshots(&self) -> Vec<String> {
        self.peers.iter().map(|p| p.state().snapshot_json()).collect()
    }

    pub fn states_agree(&self) -> bool {
        let first = self.peers[0].state();
        self.peers.iter().all(|p| p.state() == first)
    }

    /// Enrolls a client identity with `org`'s CA.
    pub fn enroll_client(&mut self, org: &str, subject: &str) -> Result<Client, NetworkError> {
        let ca = self
            .cas
            .get(org)
            .filter(|_| org != ORDERER_ORG)
            .ok_or_else(|| NetworkError::UnknownClient(format!("{org}/{subject}")))?;
        Ok(Client::Member(enroll_member(ca, subject, Role::Client, &mut self.crypto_rng)?))
    }

    /// Issues an anonymous credential for a client of `org`.
    pub fn issue_anonymous(
        &mut self,
        org: &str,
        subject: &str,
        reveal: BTreeSet<usize>,
    ) -> Result<Client, NetworkError> {
        let attributes = [
            org.to_string(),
            Role::Client.to_string(),
            subject.to_string(),
            format!("{org}.patients"),
        ];
        let credential = issue_credential(&self.issuer, &attributes, &mut self.crypto_rng)?;
        Ok(Client::Anonymous { credential, reveal })
    }

    /// Resolves a client name, enrolling on first use.
    ///
    /// * `Org/subject`: standard identity of `Org`.
    /// * `anon:Org/subject`: anonymous credential revealing only the organization.
    /// * `anon:Org`: same, with a default subject.
    /// * `anon`: anonymous credential revealing nothing.
    pub fn client(&mut self, name: &str) -> Result<Client, NetworkError> {
        if let Some(c) = self.clients.get(name) {
            return Ok(c.clone());
        }
        let unknown = || NetworkError::UnknownClient(name.to_string());
        let client = if name == "anon" {
            let org = self.config.orgs[0].clone();
            self.issue_anonymous(&org, "anonymous", BTreeSet::new())?
        } else if let Some(rest) = name.strip_prefix("anon:") {
            let (org, subject) = rest.split_once('/').unwrap_or((rest, "anonymous"));
            if !self.config.orgs.iter().any(|o| o == org) || subject.is_empty() {
                return Err(unknown());
            }
            self.issue_anonymous(org, subject, BTreeSet::from([ORG_ATTRIBUTE]))?
        } else {
            let (org, subject) = name.split_once('/').ok_or_else(unknown)?;
            if !self.config.orgs.iter().any(|o| o == org) {
                return Err(unknown());
            }
            self.enroll_client(org, subject)?
        };
        self.clients.insert(name.to_string(), client.clone());
        Ok(client)
    }

    fn authenticate(
        &self,
        creator: &Creator,
        digest: &Digest,
    ) -> Result<CallerContext, NetworkError> {
        match creator {
            Creator::Member {
                identity,
                signature,
            } => {
                if identity.role != Role::Client && identity.role != Role::Admin {
                    return Err(NetworkError::Unauthenticated(format!(
                        "role {} may not submit proposals",
                        identity.role
                    )));
                }
                if !self.msp.validate(identity) {
                    return Err(NetworkError::Unauthenticated("unknown identity".into()));
                }
                if !identity.verify_signature(digest.as_bytes(), signature) {
                    return Err(NetworkError::Unauthenticated("bad proposal signature".into()));
                }
                Ok(CallerContext::member(identity.org_name.clone()))
            }
            Creator::Anonymous(pres) => {
                let revealed = verify_presentation(pres, &self.issuer, digest.as_bytes())
                    .map_err(|e| NetworkError::Unauthenticated(e.to_string()))?;
                let org = revealed.get(&ORG_ATTRIBUTE).cloned().unwrap_or_default();
                Ok(CallerContext::anonymous(org))
            }
        }
    }

    fn creator_for(&mut self, client: &Client, digest: &Digest) -> Result<Creator, NetworkError> {
        Ok(match client {
            Client::Member(m) => Creator::Member {
                identity: m.identity().clone(),
                signature: m.sign(digest.as_bytes()),
            },
            Client::Anonymous { credential, reveal } => Creator::Anonymous(present(
                credential,
                self.issuer.public(),
                reveal,
                digest.as_bytes(),
                &mut self.crypto_rng,
            )?),
        })
    }

    /// Round-robin over the caller's organization when the policy lists it,
    /// otherwise over the first listed organization.
    fn select_endorser(&mut self, org: &str) -> usize {
        let org = if self.policy.orgs().contains(org) {
            org.to_string()
        } else {
            self.policy.orgs().iter().next().expect("policy is non-empty").clone()
        };
        let candidates: Vec<usize> = (0..self.peers.len())
            .filter(|&i| self.peers[i].org() == org)
            .collect();
        let slot = self.next_endorser.entry(org).or_insert(0);
        let pick = candidates[*slot % candidates.len()];
        *slot += 1;
        pick
    }

    /// Builds an authenticated proposal, has one endorser execute it and
    /// returns the endorsed transaction. Private plaintext is handed to the
    /// collection members' peers here and never enters the transaction.
    pub fn submit_proposal(
        &mut self,
        client: &Client,
        call: &ChaincodeCall,
    ) -> Result<Transaction, NetworkError> {
        self.stats.proposals += 1;
        let (nonce, salt) = self.draw_tx_randomness(call);
        let (invocation, transient) = call.to_invocation(salt);
        let digest = proposal_digest(&nonce, &invocation);
        let creator = self.creator_for(client, &digest)?;
        let ctx = self.authenticate(&creator, &digest)?;

        let e = self.select_endorser(&ctx.org_name);
        let endorser = &self.peers[e];
        let out = chaincode::invoke(
            &ctx,
            endorser.state(),
            endorser.private_store(),
            &self.collection,
            &invocation,
            &transient,
        )?;
        let mut tx = Transaction::new(TxBody {
            nonce,
            invocation,
            read_set: out.read_set,
            write_set: out.write_set,
            private_writes: out.private_writes,
            creator,
        });
        tx.endorse(endorser.member());
        if !out.private_data.is_empty() {
            for p in &mut self.peers {
                if self.collection.is_member(p.org()) {
                    p.receive_private(tx.tx_id, out.private_data.clone());
                }
            }
        }
        self.stats.endorsed += 1;
        Ok(tx)
    }

    fn draw_tx_randomness(&mut self, call: &ChaincodeCall) -> ([u8; 16], Option<[u8; SALT_LEN]>) {
        let mut nonce = [0u8; 16];
        self.tx_rng.fill_bytes(&mut nonce);
        let salt = call.needs_salt().then(|| {
            let mut s = [0u8; SALT_LEN];
            self.tx_rng.fill_bytes(&mut s);
            s
        });
        (nonce, salt)
    }

    /// Runs a read-only call on one endorser against committed state.
    pub fn query(&mut self, client: &Client, call: &ChaincodeCall) -> Result<Vec<u8>, NetworkError> {
        let (nonce, _) = self.draw_tx_randomness(call);
        let (invocation, transient) = call.to_invocation(None);
        let digest = proposal_digest(&nonce, &invocation);
        let creator = self.creator_for(client, &digest)?;
        let ctx = self.authenticate(&creator, &digest)?;
        let e = self.select_endorser(&ctx.org_name);
        let peer = &self.peers[e];
        let out = chaincode::invoke(
            &ctx,
            peer.state(),
            peer.private_store(),
            &self.collection,
            &invocation,
            &transient,
        )?;
        Ok(out.response)
    }

    /// Hands `tx` to the orderer; returns any blocks that were cut.
    pub fn broadcast(&mut self, tx: Transaction) -> Vec<Block> {
        self.ordering.broadcast(tx)
    }

    pub fn tick(&mut self) -> Option<Block> {
        self.ordering.tick()
    }

    /// Orders `txs` in arrival order and cuts every resulting block,
    /// including a final partial one.
    pub fn order_and_cut(&mut self, txs: impl IntoIterator<Item = Transaction>) -> Vec<Block> {
        let mut blocks = Vec::new();
        for tx in txs {
            blocks.extend(self.ordering.broadcast(tx));
        }
        blocks.extend(self.ordering.flush());
        blocks
    }

    /// Every peer validates and commits `block` independently.
    pub fn deliver_and_commit(&mut self, block: &Block) -> Result<BlockCommit, NetworkError> {
        let collections = std::slice::from_ref(&self.collection);
        let (policy, msp) = (&self.policy, &self.msp);
        let results: Vec<Result<PeerCommit, NetworkError>> = match self.mode {
            CommitMode::Sequential => self
                .peers
                .iter_mut()
                .map(|p| p.commit(block, policy, collections, msp))
                .collect(),
            CommitMode::Parallel => std::thread::scope(|s| {
                let handles: Vec<_> = self
                    .peers
                    .iter_mut()
                    .map(|p| s.spawn(move || p.commit(block, policy, collections, msp)))
                    .collect();
                handles
                    .into_iter()
                    .map(|h| h.join().expect("peer thread panicked"))
                    .collect()
            }),
        };
        let mut commits = Vec::with_capacity(results.len());
        for r in results {
            commits.push(r?);
        }
        let flags = commits[0].flags.clone();
        debug_assert!(commits.iter().all(|c| c.flags == flags));
        let purged = self
            .peers
            .iter()
            .zip(&commits)
            .find(|(p, _)| p.private_store().is_some())
            .map_or(0, |(_, c)| c.purged.purged.len());
        self.stats.blocks_committed += 1;
        self.stats.txs_committed += flags.len() as u64;
        self.stats.valid_txs += flags.iter().filter(|f| f.is_valid()).count() as u64;
        tracing::debug!(block = block.number(), txs = flags.len(), "committed");
        Ok(BlockCommit {
            number: block.number(),
            tx_ids: block.transactions.iter().map(|t| t.tx_id).collect(),
            flags,
            purged,
        })
    }

    /// Cuts and commits everything queued at the orderer.
    pub fn flush(&mut self) -> Result<Vec<BlockCommit>, NetworkError> {
        let blocks = self.ordering.flush();
        blocks.iter().map(|b| self.deliver_and_commit(b)).collect()
    }

    /// Propose, order (cutting on the batch timer) and commit one call.
    pub fn execute(
        &mut self,
        client: &Client,
        call: &ChaincodeCall,
    ) -> Result<TxReceipt, NetworkError> {
        let tx = self.submit_proposal(client, call)?;
        let tx_id = tx.tx_id;
        let mut commits = Vec::new();
        for b in self.broadcast(tx) {
            commits.push(self.deliver_and_commit(&b)?);
        }
        while self.ordering.pending() > 0 {
            if let Some(b) = self.tick() {
                commits.push(self.deliver_and_commit(&b)?);
            }
        }
        commits
            .iter()
            .find_map(|c| {
                c.tx_ids.iter().position(|id| *id == tx_id).map(|i| TxReceipt {
                    tx_id,
                    block: c.number,
                    flag: c.flags[i],
                })
            })
            .ok_or_else(|| NetworkError::InvalidConfig("transaction was not committed".into()))
    }

    /// Like [`execute`](Self::execute), also returning the wall-clock latency.
    pub fn execute_timed(
        &mut self,
        client: &Client,
        call: &ChaincodeCall,
    ) -> Result<(TxReceipt, std::time::Duration), NetworkError> {
        let start = Instant::now();
        let r = self.execute(client, call)?;
        Ok((r, start.elapsed()))
    }
}
