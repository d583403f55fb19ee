//! Membership services: CA-signed standard identities and anonymous
//! credentials with selective disclosure.

pub mod credential;
pub mod group;
pub mod msp;

use thiserror::Error;

pub use credential::{
    issue_credential, issuer_setup, present, verify_credential, verify_presentation,
    AnonCredential, IssuerKey, IssuerPublic, Presentation, DEFAULT_ATTRIBUTES, ORG_ATTRIBUTE,
};
pub use msp::{
    enroll_member, setup_org_ca, verify_member, verify_signature, Member, Msp, OrgCa, Role,
    StandardIdentity,
};

#[derive(Debug, Error)]
pub enum IdentityError {
    #[error("organization name must not be empty")]
    EmptyOrgName,
    #[error("subject must not be empty")]
    EmptySubject,
    #[error("unknown role `{0}`")]
    UnknownRole(String),
}

#[derive(Debug, Error)]
pub enum CredentialError {
    #[error("an issuer key needs at least one attribute")]
    NoAttributes,
    #[error("expected {expected} attributes, got {got}")]
    AttributeCount { expected: usize, got: usize },
    #[error("reveal index {index} out of range for {count} attributes")]
    RevealIndex { index: usize, count: usize },
    #[error("presentation nonce must not be empty")]
    EmptyNonce,
    #[error("presentation is bound to a different nonce")]
    NonceMismatch,
    #[error("presentation proof does not verify")]
    ProofInvalid,
    #[error("malformed presentation: {0}")]
    Malformed(&'static str),
}
