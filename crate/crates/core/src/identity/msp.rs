//! Per-organization certificate authorities and signed member identities.
//!
//! An identity is an abstract signed tuple `(subject, org, role, public key)`
//! rather than an X.509 certificate; chains are exactly one CA deep.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::str::FromStr;
use std::sync::Mutex;

use ed25519_dalek::{Signature, Signer, SigningKey, VerifyingKey};
use rand::{CryptoRng, RngCore};
use serde::{Deserialize, Serialize};

use super::IdentityError;
use crate::encoding::{Decode, DecodeError, Decoder, Encode, Encoder};
use crate::hash::Digest;

pub type PublicKeyBytes = [u8; 32];
pub type SignatureBytes = [u8; 64];

const IDENTITY_TAG: &[u8] = b"medledger/identity/v1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Client,
    Peer,
    Orderer,
    Admin,
}

impl Role {
    fn tag(self) -> u8 {
        match self {
            Role::Client => 0,
            Role::Peer => 1,
            Role::Orderer => 2,
            Role::Admin => 3,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Role::Client => "client",
            Role::Peer => "peer",
            Role::Orderer => "orderer",
            Role::Admin => "admin",
        }
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Role {
    type Err = IdentityError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "client" => Ok(Role::Client),
            "peer" => Ok(Role::Peer),
            "orderer" => Ok(Role::Orderer),
            "admin" => Ok(Role::Admin),
            other => Err(IdentityError::UnknownRole(other.to_string())),
        }
    }
}

/// An organization's certificate authority.
pub struct OrgCa {
    org_name: String,
    signing_key: SigningKey,
}

impl OrgCa {
    pub fn org_name(&self) -> &str {
        &self.org_name
    }

    pub fn public_key(&self) -> PublicKeyBytes {
        self.signing_key.verifying_key().to_bytes()
    }

    pub fn sign(&self, msg: &[u8]) -> SignatureBytes {
        self.signing_key.sign(msg).to_bytes()
    }
}

impl fmt::Debug for OrgCa {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("OrgCa")
            .field("org_name", &self.org_name)
            .field("public_key", &hex::encode(self.public_key()))
            .finish_non_exhaustive()
    }
}

pub fn setup_org_ca<R: RngCore + CryptoRng>(
    org_name: &str,
    rng: &mut R,
) -> Result<OrgCa, IdentityError> {
    if org_name.is_empty() {
        return Err(IdentityError::EmptyOrgName);
    }
    Ok(OrgCa {
        org_name: org_name.to_string(),
        signing_key: SigningKey::generate(rng),
    })
}

/// A CA-signed identity tuple.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct StandardIdentity {
    pub subject: String,
    pub org_name: String,
    pub role: Role,
    #[serde(with = "crate::hexser")]
    pub public_key: PublicKeyBytes,
    #[serde(with = "crate::hexser")]
    pub ca_signature: SignatureBytes,
}

impl StandardIdentity {
    /// Bytes covered by the CA signature.
    pub fn signed_payload(&self) -> Vec<u8> {
        identity_payload(&self.subject, &self.org_name, self.role, &self.public_key)
    }

    pub fn digest(&self) -> Digest {
        Digest::of(&self.to_canonical_bytes())
    }

    /// Checks `signature` over `msg` under this identity's own key.
    pub fn verify_signature(&self, msg: &[u8], signature: &SignatureBytes) -> bool {
        verify_signature(&self.public_key, msg, signature)
    }
}

fn identity_payload(subject: &str, org: &str, role: Role, pk: &PublicKeyBytes) -> Vec<u8> {
    let mut enc = Encoder::new();
    enc.raw(IDENTITY_TAG).str(subject).str(org).u8(role.tag()).raw(pk);
    enc.finish()
}

impl Encode for StandardIdentity {
    fn encode(&self, enc: &mut Encoder) {
        enc.str(&self.subject)
            .str(&self.org_name)
            .u8(self.role.tag())
            .raw(&self.public_key)
            .raw(&self.ca_signature);
    }
}

impl Decode for StandardIdentity {
    fn decode(dec: &mut Decoder<'_>) -> Result<Self, DecodeError> {
        let subject = dec.string()?;
        let org_name = dec.string()?;
        let role = match dec.u8()? {
            0 => Role::Client,
            1 => Role::Peer,
            2 => Role::Orderer,
            3 => Role::Admin,
            tag => return Err(DecodeError::InvalidTag { what: "role", tag }),
        };
        Ok(StandardIdentity {
            subject,
            org_name,
            role,
            public_key: dec.array()?,
            ca_signature: dec.array()?,
        })
    }
}

/// An enrolled identity together with its private signing key.
#[derive(Clone)]
pub struct Member {
    identity: StandardIdentity,
    signing_key: SigningKey,
}

impl Member {
    pub fn identity(&self) -> &StandardIdentity {
        &self.identity
    }

    pub fn sign(&self, msg: &[u8]) -> SignatureBytes {
        self.signing_key.sign(msg).to_bytes()
    }
}

impl fmt::Debug for Member {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Member")
            .field("identity", &self.identity)
            .finish_non_exhaustive()
    }
}

pub fn enroll_member<R: RngCore + CryptoRng>(
    ca: &OrgCa,
    subject: &str,
    role: Role,
    rng: &mut R,
) -> Result<Member, IdentityError> {
    if subject.is_empty() {
        return Err(IdentityError::EmptySubject);
    }
    let signing_key = SigningKey::generate(rng);
    let public_key = signing_key.verifying_key().to_bytes();
    let payload = identity_payload(subject, &ca.org_name, role, &public_key);
    let identity = StandardIdentity {
        subject: subject.to_string(),
        org_name: ca.org_name.clone(),
        role,
        public_key,
        ca_signature: ca.sign(&payload),
    };
    Ok(Member {
        identity,
        signing_key,
    })
}

/// True iff `id.ca_signature` is a valid signature by `ca_public` over the
/// identity tuple. Malformed keys or signatures yield `false`.
pub fn verify_member(id: &StandardIdentity, ca_public: &PublicKeyBytes) -> bool {
    verify_signature(ca_public, &id.signed_payload(), &id.ca_signature)
}

pub fn verify_signature(public: &PublicKeyBytes, msg: &[u8], signature: &SignatureBytes) -> bool {
    let Ok(key) = VerifyingKey::from_bytes(public) else {
        return false;
    };
    key.verify_strict(msg, &Signature::from_bytes(signature)).is_ok()
}

/// Root keys of every organization's CA, as seen by one validating party.
///
/// Successfully verified identities are remembered by digest so repeated
/// endorsements from the same peer cost one signature check.
#[derive(Debug, Default)]
pub struct Msp {
    roots: BTreeMap<String, PublicKeyBytes>,
    verified: Mutex<HashSet<Digest>>,
}

impl Clone for Msp {
    fn clone(&self) -> Self {
        Msp {
            roots: self.roots.clone(),
            verified: Mutex::new(self.verified.lock().expect("poisoned").clone()),
        }
    }
}

impl Msp {
    pub fn new(roots: BTreeMap<String, PublicKeyBytes>) -> Self {
        Msp {
            roots,
            verified: Mutex::default(),
        }
    }

    pub fn root(&self, org: &str) -> Option<&PublicKeyBytes> {
        self.roots.get(org)
    }

    pub fn orgs(&self) -> impl Iterator<Item = &str> {
        self.roots.keys().map(String::as_str)
    }

    pub fn roots(&self) -> &BTreeMap<String, PublicKeyBytes> {
        &self.roots
    }

    /// Checks `id` against the root of the organization it claims.
    pub fn validate(&self, id: &StandardIdentity) -> bool {
        let digest = id.digest();
        if self.verified.lock().expect("poisoned").contains(&digest) {
            return true;
        }
        let ok = self
            .roots
            .get(&id.org_name)
            .is_some_and(|root| verify_member(id, root));
        if ok {
            self.verified.lock().expect("poisoned").insert(digest);
        }
        ok
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha20Rng;

    fn rng() -> ChaCha20Rng {
        ChaCha20Rng::seed_from_u64(7)
    }

    #[test]
    fn ca_signs_and_verifies() {
        let mut rng = rng();
        let ca = setup_org_ca("Healthcenter", &mut rng).unwrap();
        let sig = ca.sign(b"probe");
        assert!(verify_signature(&ca.public_key(), b"probe", &sig));
        assert!(!verify_signature(&ca.public_key(), b"probf", &sig));
    }

    #[test]
    fn three_orgs_have_distinct_keys() {
        let mut rng = rng();
        let keys: HashSet<_> = ["Healthcenter", "Hospital", "PublicHealth"]
            .iter()
            .map(|o| setup_org_ca(o, &mut rng).unwrap().public_key())
            .collect();
        assert_eq!(keys.len(), 3);
    }

    #[test]
    fn empty_names_rejected() {
        let mut rng = rng();
        assert!(matches!(
            setup_org_ca("", &mut rng),
            Err(IdentityError::EmptyOrgName)
        ));
        let ca = setup_org_ca("Hospital", &mut rng).unwrap();
        assert!(matches!(
            enroll_member(&ca, "", Role::Peer, &mut rng),
            Err(IdentityError::EmptySubject)
        ));
    }

    #[test]
    fn enrolled_member_verifies() {
        let mut rng = rng();
        let ca = setup_org_ca("Healthcenter", &mut rng).unwrap();
        let m = enroll_member(&ca, "peer0", Role::Peer, &mut rng).unwrap();
        assert!(verify_member(m.identity(), &ca.public_key()));
    }

    #[test]
    fn cross_org_identity_rejected() {
        let mut rng = rng();
        let hc = setup_org_ca("Healthcenter", &mut rng).unwrap();
        let hosp = setup_org_ca("Hospital", &mut rng).unwrap();
        let m = enroll_member(&hosp, "peer0", Role::Peer, &mut rng).unwrap();
        assert!(!verify_member(m.identity(), &hc.public_key()));
    }

    #[test]
    fn signature_byte_flips_rejected() {
        let mut rng = rng();
        let ca = setup_org_ca("Healthcenter", &mut rng).unwrap();
        let m = enroll_member(&ca, "peer0", Role::Peer, &mut rng).unwrap();
        for _ in 0..100 {
            let mut id = m.identity().clone();
            let pos = rng.gen_range(0..64);
            let bit = 1u8 << rng.gen_range(0..8);
            id.ca_signature[pos] ^= bit;
            assert!(!verify_member(&id, &ca.public_key()));
        }
    }

    #[test]
    fn tuple_fields_are_bound() {
        let mut rng = rng();
        let ca = setup_org_ca("Healthcenter", &mut rng).unwrap();
        let m = enroll_member(&ca, "peer0", Role::Peer, &mut rng).unwrap();
        let mut id = m.identity().clone();
        id.role = Role::Admin;
        assert!(!verify_member(&id, &ca.public_key()));
        let mut id = m.identity().clone();
        id.subject.push('x');
        assert!(!verify_member(&id, &ca.public_key()));
        let mut id = m.identity().clone();
        id.org_name = "Hospital".into();
        assert!(!verify_member(&id, &ca.public_key()));
    }

    #[test]
    fn msp_checks_claimed_org() {
        let mut rng = rng();
        let hc = setup_org_ca("Healthcenter", &mut rng).unwrap();
        let hosp = setup_org_ca("Hospital", &mut rng).unwrap();
        let msp = Msp::new(
            [
                ("Healthcenter".to_string(), hc.public_key()),
                ("Hospital".to_string(), hosp.public_key()),
            ]
            .into(),
        );
        let m = enroll_member(&hosp, "peer1", Role::Peer, &mut rng).unwrap();
        assert!(msp.validate(m.identity()));
        assert!(msp.validate(m.identity()));
        let mut forged = m.identity().clone();
        forged.org_name = "Healthcenter".into();
        assert!(!msp.validate(&forged));
    }

    #[test]
    fn canonical_roundtrip_and_json() {
        let mut rng = rng();
        let ca = setup_org_ca("Healthcenter", &mut rng).unwrap();
        let m = enroll_member(&ca, "alice", Role::Client, &mut rng).unwrap();
        let bytes = m.identity().to_canonical_bytes();
        assert_eq!(&StandardIdentity::from_canonical_bytes(&bytes).unwrap(), m.identity());
        let json = serde_json::to_string(m.identity()).unwrap();
        assert!(json.contains("\"role\":\"client\""));
        let back: StandardIdentity = serde_json::from_str(&json).unwrap();
        assert_eq!(&back, m.identity());
    }
}
