//! A permissioned ledger for electronic health records.
//!
//! Transactions follow an execute-order-validate flow: endorsing peers run
//! chaincode against their local state and sign the resulting read/write
//! sets, an ordering service batches endorsed transactions into hash-chained
//! blocks, and every peer independently validates (endorsement policy plus
//! MVCC read-version checks) and commits. Patient names and addresses live in
//! a private data collection held only by member organizations; the public
//! ledger carries a salted hash of them, which survives purges as evidence
//! that the data existed.
//!
//! Module map:
//!
//! * [`identity`]: org CAs, signed member identities, anonymous credentials.
//! * [`ledger`]: blocks, chain, world state, MVCC validation, private stores.
//! * [`chaincode`]: the health-record application logic.
//! * [`network`]: in-process simulation of orgs, peers and ordering.
//! * [`baseline`]: conventional encrypted-column record store for comparison.
//! * [`bench`]: latency harness, CSV reporting and crossover estimate.

pub mod baseline;
pub mod bench;
pub mod chaincode;
pub mod encoding;
pub mod hash;
mod hexser;
pub mod identity;
pub mod ledger;
pub mod network;

pub use hash::Digest;

/// The guide under `book/` is compiled into doctests so its snippets stay
/// in sync with the API.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/intro.md")]
    mod intro {}
    #[doc = include_str!("../../../book/src/identities.md")]
    mod identities {}
    #[doc = include_str!("../../../book/src/ledger.md")]
    mod ledger {}
    #[doc = include_str!("../../../book/src/private-data.md")]
    mod private_data {}
    #[doc = include_str!("../../../book/src/chaincode.md")]
    mod chaincode {}
    #[doc = include_str!("../../../book/src/network.md")]
    mod network {}
    #[doc = include_str!("../../../book/src/benchmarks.md")]
    mod benchmarks {}
}
