//! Blocks, chain, world state, validation and private data collections.

pub mod block;
pub mod private;
pub mod state;
pub mod tx;
pub mod validate;

use thiserror::Error;

pub use block::{hash_block, Block, BlockHeader, LedgerChain, ValidationFlag};
pub use private::{
    anchor_of, sweep_expired, verify_private_anchor, CollectionPolicy, PrivateEntry,
    PrivateStore, PurgeReport, PurgedEntry, SALT_LEN,
};
pub use state::{AnchorEntry, StateEntry, WorldState};
pub use tx::{
    proposal_digest, Creator, Endorsement, Invocation, PrivateWrite, PrivateWriteKind, ReadItem, Transaction,
    TxBody, Version, WriteItem, WriteValue,
};
pub use validate::{commit_block, validate_transactions, EndorsementPolicy};

#[derive(Debug, Error)]
pub enum LedgerError {
    #[error("block number {got}, expected {expected}")]
    WrongNumber { expected: u64, got: u64 },
    #[error("block {number} does not link to the chain tip")]
    WrongPrevHash { number: u64 },
    #[error("block {number} data hash does not match its transactions")]
    DataHashMismatch { number: u64 },
    #[error("block {number} has {flags} flags for {transactions} transactions")]
    FlagCount {
        number: u64,
        flags: usize,
        transactions: usize,
    },
    #[error("salt must be 16 bytes, got {0}")]
    BadSaltLength(usize),
    #[error("no private entry for key `{0}`")]
    UnknownPrivateKey(String),
    #[error("collection `{0}` has no member organizations")]
    EmptyCollection(String),
    #[error("endorsement policy lists no organizations")]
    EmptyPolicy,
}
