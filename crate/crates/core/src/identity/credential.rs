//! Anonymous credentials with selective disclosure.
//!
//! The construction is an algebraic-MAC credential over ristretto255:
//!
//! * The issuer holds secrets `x0, x0~, x1..xn` and publishes
//!   `Cx0 = x0·G + x0~·H` and one attribute base `Xi = xi·H` per attribute.
//! * A credential on attributes `m1..mn` (strings hashed to scalars) is the
//!   pair `U`, `U' = (x0 + Σ xi·mi)·U` for a random point `U` whose discrete
//!   log stays with the issuer, plus a Fiat–Shamir proof that `U'` was formed
//!   with the published key. On receipt the holder scales the pair by a fresh
//!   blinding `t`, so the stored `(tU, tU')` never appears at issuance.
//! * A presentation re-randomizes `(U, U')` by a fresh `r`, commits to every
//!   hidden attribute as `Ci = mi·rU + zi·H`, hides `rU'` as
//!   `Cv = rU' + s·G`, and proves knowledge of `(mi, zi)` and `s` such that
//!   `V = Σ zi·Xi − s·G`, where the verifier recomputes
//!   `V = x0·rU + Σhidden xi·Ci + Σrevealed xi·mi·rU − Cv`.
//!
//! Checking `V` needs the issuer's secret scalars, so presentations are
//! verified by the issuing authority's key (keyed verification). The holder
//! can check its own credential with the public key alone.

use std::collections::{BTreeMap, BTreeSet};

use curve25519_dalek::ristretto::RistrettoPoint;
use curve25519_dalek::scalar::Scalar;
use rand::{CryptoRng, RngCore};
use serde::{Deserialize, Serialize};
use sha2::Digest as _;

use super::group::{g, h, is_identity, random_nonzero, GroupElement, GroupScalar};
use super::CredentialError;
use crate::encoding::{Decode, DecodeError, Decoder, Encode, Encoder};
use crate::hash::{Digest, Hasher};

/// Attribute layout used for network clients.
pub const DEFAULT_ATTRIBUTES: [&str; 4] = ["organization", "role", "enrollment-id", "affiliation"];

/// Index of the organization attribute in [`DEFAULT_ATTRIBUTES`].
pub const ORG_ATTRIBUTE: usize = 0;

const ISSUE_TAG: &[u8] = b"medledger/credential/issue/v1";
const SHOW_TAG: &[u8] = b"medledger/credential/show/v1";
const NONCE_TAG: &[u8] = b"medledger/credential/nonce/v1";
const ATTRIBUTE_TAG: &[u8] = b"medledger/credential/attribute/v1";

#[derive(Clone)]
struct IssuerSecret {
    x0: Scalar,
    x0_blind: Scalar,
    x: Vec<Scalar>,
}

/// Public half of an issuer key.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct IssuerPublic {
    /// `Cx0`, the commitment to the MAC key's constant term.
    pub verification: GroupElement,
    /// One base `Xi` per attribute.
    pub bases: Vec<GroupElement>,
}

impl IssuerPublic {
    pub fn attribute_count(&self) -> usize {
        self.bases.len()
    }
}

impl Encode for IssuerPublic {
    fn encode(&self, enc: &mut Encoder) {
        enc.item(&self.verification).seq(&self.bases);
    }
}

#[derive(Clone)]
pub struct IssuerKey {
    secret: IssuerSecret,
    public: IssuerPublic,
}

impl std::fmt::Debug for IssuerKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("IssuerKey")
            .field("public", &self.public)
            .finish_non_exhaustive()
    }
}

impl IssuerKey {
    pub fn public(&self) -> &IssuerPublic {
        &self.public
    }

    pub fn attribute_count(&self) -> usize {
        self.public.attribute_count()
    }
}

/// Schnorr-style non-interactive proof: one challenge, one response per witness.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Proof {
    pub challenge: GroupScalar,
    pub responses: Vec<GroupScalar>,
}

impl Encode for Proof {
    fn encode(&self, enc: &mut Encoder) {
        enc.item(&self.challenge).seq(&self.responses);
    }
}

impl Decode for Proof {
    fn decode(dec: &mut Decoder<'_>) -> Result<Self, DecodeError> {
        Ok(Proof {
            challenge: dec.item()?,
            responses: dec.seq()?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct AnonCredential {
    pub attributes: Vec<String>,
    /// `tU`
    pub commitment: GroupElement,
    /// Holder-side blinding `t`.
    pub blinding: GroupScalar,
    /// `tU'`
    pub issuer_signature: GroupElement,
    /// Proof over the unblinded pair `(U, U')`.
    pub issuance_proof: Proof,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct HiddenCommitment {
    pub index: u32,
    pub commitment: GroupElement,
}

impl Encode for HiddenCommitment {
    fn encode(&self, enc: &mut Encoder) {
        enc.u32(self.index).item(&self.commitment);
    }
}

impl Decode for HiddenCommitment {
    fn decode(dec: &mut Decoder<'_>) -> Result<Self, DecodeError> {
        Ok(HiddenCommitment {
            index: dec.u32()?,
            commitment: dec.item()?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Presentation {
    /// `rU`
    pub randomized_commitment: GroupElement,
    /// `Cv = rU' + s·G`
    pub randomized_signature: GroupElement,
    /// Commitments to the undisclosed attributes, ascending by index.
    pub hidden: Vec<HiddenCommitment>,
    pub revealed: BTreeMap<u32, String>,
    pub proof: Proof,
    pub nonce_binding: Digest,
}

impl Presentation {
    pub fn revealed_indices(&self) -> BTreeSet<usize> {
        self.revealed.keys().map(|&i| i as usize).collect()
    }
}

impl Encode for Presentation {
    fn encode(&self, enc: &mut Encoder) {
        enc.item(&self.randomized_commitment)
            .item(&self.randomized_signature)
            .seq(&self.hidden)
            .len(self.revealed.len());
        for (i, v) in &self.revealed {
            enc.u32(*i).str(v);
        }
        enc.item(&self.proof).digest(&self.nonce_binding);
    }
}

impl Decode for Presentation {
    fn decode(dec: &mut Decoder<'_>) -> Result<Self, DecodeError> {
        let randomized_commitment = dec.item()?;
        let randomized_signature = dec.item()?;
        let hidden = dec.seq()?;
        let n = dec.len()?;
        let mut revealed = BTreeMap::new();
        let mut last = None;
        for _ in 0..n {
            let i = dec.u32()?;
            if last.is_some_and(|l| i <= l) {
                return Err(DecodeError::Invalid("revealed index order"));
            }
            last = Some(i);
            revealed.insert(i, dec.string()?);
        }
        Ok(Presentation {
            randomized_commitment,
            randomized_signature,
            hidden,
            revealed,
            proof: dec.item()?,
            nonce_binding: dec.digest()?,
        })
    }
}

/// Maps an attribute string to its scalar encoding.
pub fn attribute_scalar(value: &str) -> Scalar {
    let mut enc = Encoder::new();
    enc.raw(ATTRIBUTE_TAG).str(value);
    hash_to_scalar(enc.as_slice())
}

fn hash_to_scalar(bytes: &[u8]) -> Scalar {
    Scalar::from_bytes_mod_order(Hasher::digest(bytes).into())
}

pub fn nonce_binding(nonce: &[u8]) -> Digest {
    let mut enc = Encoder::new();
    enc.raw(NONCE_TAG).bytes(nonce);
    Digest::of(enc.as_slice())
}

struct Transcript(Encoder);

impl Transcript {
    fn new(tag: &[u8], public: &IssuerPublic) -> Self {
        let mut enc = Encoder::new();
        enc.raw(tag).item(public);
        Transcript(enc)
    }

    fn point(&mut self, p: &RistrettoPoint) -> &mut Self {
        self.0.raw(p.compress().as_bytes());
        self
    }

    fn scalar(&mut self, s: &Scalar) -> &mut Self {
        self.0.raw(s.as_bytes());
        self
    }

    fn challenge(&self) -> Scalar {
        hash_to_scalar(self.0.as_slice())
    }
}

pub fn issuer_setup<R: RngCore + CryptoRng>(
    attribute_count: usize,
    rng: &mut R,
) -> Result<IssuerKey, CredentialError> {
    if attribute_count < 1 {
        return Err(CredentialError::NoAttributes);
    }
    let x0 = random_nonzero(rng);
    let x0_blind = random_nonzero(rng);
    let x: Vec<Scalar> = (0..attribute_count).map(|_| random_nonzero(rng)).collect();
    let public = IssuerPublic {
        verification: GroupElement(x0 * g() + x0_blind * h()),
        bases: x.iter().map(|xi| GroupElement(xi * h())).collect(),
    };
    Ok(IssuerKey {
        secret: IssuerSecret { x0, x0_blind, x },
        public,
    })
}

fn issuance_transcript(
    public: &IssuerPublic,
    u: &RistrettoPoint,
    u_prime: &RistrettoPoint,
    m: &[Scalar],
) -> Transcript {
    let mut t = Transcript::new(ISSUE_TAG, public);
    t.point(u).point(u_prime);
    for mi in m {
        t.scalar(mi);
    }
    t
}

pub fn issue_credential<R: RngCore + CryptoRng, S: AsRef<str>>(
    issuer: &IssuerKey,
    attributes: &[S],
    rng: &mut R,
) -> Result<AnonCredential, CredentialError> {
    let n = issuer.attribute_count();
    if attributes.len() != n {
        return Err(CredentialError::AttributeCount {
            expected: n,
            got: attributes.len(),
        });
    }
    let m: Vec<Scalar> = attributes.iter().map(|a| attribute_scalar(a.as_ref())).collect();
    let sk = &issuer.secret;

    let u = random_nonzero(rng) * g();
    let mac_key = sk.x0 + sk.x.iter().zip(&m).map(|(x, m)| x * m).sum::<Scalar>();
    let u_prime = mac_key * u;

    // Proof that U' used the committed key: knowledge of (x0, x0~, x1..xn) with
    // Cx0 = x0 G + x0~ H, Xi = xi H, U' = x0 U + Σ xi mi U.
    let k0 = Scalar::random(rng);
    let k0_blind = Scalar::random(rng);
    let k: Vec<Scalar> = (0..n).map(|_| Scalar::random(rng)).collect();
    let t_cx0 = k0 * g() + k0_blind * h();
    let t_u = (k0 + k.iter().zip(&m).map(|(k, m)| k * m).sum::<Scalar>()) * u;

    let mut transcript = issuance_transcript(&issuer.public, &u, &u_prime, &m);
    transcript.point(&t_cx0);
    for ki in &k {
        transcript.point(&(ki * h()));
    }
    transcript.point(&t_u);
    let c = transcript.challenge();

    let mut responses = vec![GroupScalar(k0 + c * sk.x0), GroupScalar(k0_blind + c * sk.x0_blind)];
    responses.extend(k.iter().zip(&sk.x).map(|(k, x)| GroupScalar(k + c * x)));

    let blinding = random_nonzero(rng);
    Ok(AnonCredential {
        attributes: attributes.iter().map(|a| a.as_ref().to_string()).collect(),
        commitment: GroupElement(blinding * u),
        blinding: GroupScalar(blinding),
        issuer_signature: GroupElement(blinding * u_prime),
        issuance_proof: Proof {
            challenge: GroupScalar(c),
            responses,
        },
    })
}

/// Holder-side check that `cred` was issued under `public`.
pub fn verify_credential(cred: &AnonCredential, public: &IssuerPublic) -> bool {
    let n = public.attribute_count();
    if cred.attributes.len() != n || cred.issuance_proof.responses.len() != n + 2 {
        return false;
    }
    if cred.blinding.0 == Scalar::ZERO {
        return false;
    }
    let unblind = cred.blinding.0.invert();
    let u = unblind * cred.commitment.0;
    let u_prime = unblind * cred.issuer_signature.0;
    if is_identity(&u) {
        return false;
    }
    let m: Vec<Scalar> = cred.attributes.iter().map(|a| attribute_scalar(a)).collect();
    let c = cred.issuance_proof.challenge.0;
    let s: Vec<Scalar> = cred.issuance_proof.responses.iter().map(|s| s.0).collect();

    let t_cx0 = s[0] * g() + s[1] * h() - c * public.verification.0;
    let t_u = (s[0] + s[2..].iter().zip(&m).map(|(s, m)| s * m).sum::<Scalar>()) * u - c * u_prime;

    let mut transcript = issuance_transcript(public, &u, &u_prime, &m);
    transcript.point(&t_cx0);
    for (si, xi) in s[2..].iter().zip(&public.bases) {
        transcript.point(&(si * h() - c * xi.0));
    }
    transcript.point(&t_u);
    transcript.challenge() == c
}

fn show_transcript(
    public: &IssuerPublic,
    randomized_commitment: &RistrettoPoint,
    randomized_signature: &RistrettoPoint,
    hidden: &[HiddenCommitment],
    revealed: &BTreeMap<u32, String>,
    nonce: &[u8],
) -> Transcript {
    let mut t = Transcript::new(SHOW_TAG, public);
    t.point(randomized_commitment).point(randomized_signature);
    t.0.seq(hidden).len(revealed.len());
    for (i, v) in revealed {
        t.0.u32(*i).str(v);
    }
    t.0.bytes(nonce);
    t
}

/// Produces an unlinkable showing of `cred` disclosing exactly the
/// attributes at `reveal`, bound to `nonce`.
pub fn present<R: RngCore + CryptoRng>(
    cred: &AnonCredential,
    public: &IssuerPublic,
    reveal: &BTreeSet<usize>,
    nonce: &[u8],
    rng: &mut R,
) -> Result<Presentation, CredentialError> {
    let n = cred.attributes.len();
    if n != public.attribute_count() {
        return Err(CredentialError::AttributeCount {
            expected: public.attribute_count(),
            got: n,
        });
    }
    if let Some(&bad) = reveal.iter().find(|&&i| i >= n) {
        return Err(CredentialError::RevealIndex { index: bad, count: n });
    }
    if nonce.is_empty() {
        return Err(CredentialError::EmptyNonce);
    }

    let r = random_nonzero(rng);
    let ru = r * cred.commitment.0;
    let ru_prime = r * cred.issuer_signature.0;
    let mask = Scalar::random(rng);
    let cv = ru_prime + mask * g();

    let hidden_idx: Vec<usize> = (0..n).filter(|i| !reveal.contains(i)).collect();
    let mut hidden = Vec::with_capacity(hidden_idx.len());
    let mut witnesses = Vec::with_capacity(hidden_idx.len());
    for &i in &hidden_idx {
        let m = attribute_scalar(&cred.attributes[i]);
        let z = Scalar::random(rng);
        hidden.push(HiddenCommitment {
            index: i as u32,
            commitment: GroupElement(m * ru + z * h()),
        });
        witnesses.push((m, z));
    }
    let revealed: BTreeMap<u32, String> = reveal
        .iter()
        .map(|&i| (i as u32, cred.attributes[i].clone()))
        .collect();

    let nonces: Vec<(Scalar, Scalar)> = hidden_idx
        .iter()
        .map(|_| (Scalar::random(rng), Scalar::random(rng)))
        .collect();
    let k_mask = Scalar::random(rng);
    let mut t_v = -(k_mask * g());
    let mut transcript = show_transcript(public, &ru, &cv, &hidden, &revealed, nonce);
    for (&i, (k_m, k_z)) in hidden_idx.iter().zip(&nonces) {
        transcript.point(&(k_m * ru + k_z * h()));
        t_v += k_z * public.bases[i].0;
    }
    transcript.point(&t_v);
    let c = transcript.challenge();

    let mut responses = Vec::with_capacity(2 * hidden_idx.len() + 1);
    for ((m, z), (k_m, k_z)) in witnesses.iter().zip(&nonces) {
        responses.push(GroupScalar(k_m + c * m));
        responses.push(GroupScalar(k_z + c * z));
    }
    responses.push(GroupScalar(k_mask + c * mask));

    Ok(Presentation {
        randomized_commitment: GroupElement(ru),
        randomized_signature: GroupElement(cv),
        hidden,
        revealed,
        proof: Proof {
            challenge: GroupScalar(c),
            responses,
        },
        nonce_binding: nonce_binding(nonce),
    })
}

/// Verifies `pres` against the issuer key and `nonce`, returning the
/// disclosed attributes by index.
pub fn verify_presentation(
    pres: &Presentation,
    issuer: &IssuerKey,
    nonce: &[u8],
) -> Result<BTreeMap<usize, String>, CredentialError> {
    let public = &issuer.public;
    let sk = &issuer.secret;
    let n = public.attribute_count();

    if nonce_binding(nonce) != pres.nonce_binding {
        return Err(CredentialError::NonceMismatch);
    }

    // Hidden and revealed indices must partition 0..n.
    let mut seen = vec![false; n];
    for &i in pres.revealed.keys() {
        let i = i as usize;
        if i >= n {
            return Err(CredentialError::Malformed("revealed index out of range"));
        }
        seen[i] = true;
    }
    let mut prev = None;
    for hc in &pres.hidden {
        let i = hc.index as usize;
        if i >= n || seen[i] || prev.is_some_and(|p| i <= p) {
            return Err(CredentialError::Malformed("hidden index"));
        }
        seen[i] = true;
        prev = Some(i);
    }
    if seen.iter().any(|s| !s) {
        return Err(CredentialError::Malformed("attribute neither hidden nor revealed"));
    }
    if pres.proof.responses.len() != 2 * pres.hidden.len() + 1 {
        return Err(CredentialError::Malformed("response count"));
    }
    let ru = pres.randomized_commitment.0;
    if is_identity(&ru) {
        return Err(CredentialError::Malformed("identity commitment"));
    }
    let cv = pres.randomized_signature.0;
    let c = pres.proof.challenge.0;

    let mut v = sk.x0 * ru - cv;
    for hc in &pres.hidden {
        v += sk.x[hc.index as usize] * hc.commitment.0;
    }
    for (&i, value) in &pres.revealed {
        v += (sk.x[i as usize] * attribute_scalar(value)) * ru;
    }

    let s = &pres.proof.responses;
    let s_mask = s[s.len() - 1].0;
    let mut t_v = -(s_mask * g()) - c * v;
    let mut transcript = show_transcript(public, &ru, &cv, &pres.hidden, &pres.revealed, nonce);
    for (j, hc) in pres.hidden.iter().enumerate() {
        let (s_m, s_z) = (s[2 * j].0, s[2 * j + 1].0);
        transcript.point(&(s_m * ru + s_z * h() - c * hc.commitment.0));
        t_v += s_z * public.bases[hc.index as usize].0;
    }
    transcript.point(&t_v);

    if transcript.challenge() != c {
        return Err(CredentialError::ProofInvalid);
    }
    Ok(pres
        .revealed
        .iter()
        .map(|(&i, v)| (i as usize, v.clone()))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    const ATTRS: [&str; 4] = ["Healthcenter", "client", "u1", "none"];

    fn setup() -> (ChaCha20Rng, IssuerKey, AnonCredential) {
        let mut rng = ChaCha20Rng::seed_from_u64(11);
        let issuer = issuer_setup(4, &mut rng).unwrap();
        let cred = issue_credential(&issuer, &ATTRS, &mut rng).unwrap();
        (rng, issuer, cred)
    }

    #[test]
    fn setup_shapes() {
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        assert_eq!(issuer_setup(4, &mut rng).unwrap().public().bases.len(), 4);
        assert_eq!(issuer_setup(1, &mut rng).unwrap().attribute_count(), 1);
        assert!(matches!(
            issuer_setup(0, &mut rng),
            Err(CredentialError::NoAttributes)
        ));
    }

    #[test]
    fn issued_credential_verifies_publicly() {
        let (_, issuer, cred) = setup();
        assert!(verify_credential(&cred, issuer.public()));
        let mut forged = cred.clone();
        forged.attributes[1] = "admin".into();
        assert!(!verify_credential(&forged, issuer.public()));
    }

    #[test]
    fn issuance_is_freshly_blinded() {
        let (mut rng, issuer, a) = setup();
        let b = issue_credential(&issuer, &ATTRS, &mut rng).unwrap();
        assert_ne!(a.blinding, b.blinding);
        assert_ne!(a.commitment, b.commitment);
        assert_ne!(a.issuer_signature, b.issuer_signature);
    }

    #[test]
    fn attribute_count_mismatch() {
        let (mut rng, issuer, _) = setup();
        assert!(matches!(
            issue_credential(&issuer, &ATTRS[..3], &mut rng),
            Err(CredentialError::AttributeCount { expected: 4, got: 3 })
        ));
    }

    #[test]
    fn reveal_org_only() {
        let (mut rng, issuer, cred) = setup();
        let pres = present(&cred, issuer.public(), &BTreeSet::from([0]), b"n1", &mut rng).unwrap();
        let revealed = verify_presentation(&pres, &issuer, b"n1").unwrap();
        assert_eq!(revealed, BTreeMap::from([(0, "Healthcenter".to_string())]));
        assert_eq!(pres.hidden.len(), 3);
    }

    #[test]
    fn reveal_nothing() {
        let (mut rng, issuer, cred) = setup();
        let pres = present(&cred, issuer.public(), &BTreeSet::new(), b"n", &mut rng).unwrap();
        assert!(verify_presentation(&pres, &issuer, b"n").unwrap().is_empty());
    }

    #[test]
    fn reveal_everything() {
        let (mut rng, issuer, cred) = setup();
        let all: BTreeSet<usize> = (0..4).collect();
        let pres = present(&cred, issuer.public(), &all, b"n", &mut rng).unwrap();
        assert_eq!(verify_presentation(&pres, &issuer, b"n").unwrap().len(), 4);
        assert_eq!(pres.proof.responses.len(), 1);
    }

    #[test]
    fn present_preconditions() {
        let (mut rng, issuer, cred) = setup();
        assert!(matches!(
            present(&cred, issuer.public(), &BTreeSet::from([4]), b"n", &mut rng),
            Err(CredentialError::RevealIndex { index: 4, count: 4 })
        ));
        assert!(matches!(
            present(&cred, issuer.public(), &BTreeSet::new(), b"", &mut rng),
            Err(CredentialError::EmptyNonce)
        ));
    }

    #[test]
    fn replay_under_other_nonce_rejected() {
        let (mut rng, issuer, cred) = setup();
        let pres = present(&cred, issuer.public(), &BTreeSet::from([0]), b"a", &mut rng).unwrap();
        assert!(matches!(
            verify_presentation(&pres, &issuer, b"b"),
            Err(CredentialError::NonceMismatch)
        ));
        // Rebinding the digest does not help: the nonce is in the challenge.
        let mut rebound = pres.clone();
        rebound.nonce_binding = nonce_binding(b"b");
        assert!(matches!(
            verify_presentation(&rebound, &issuer, b"b"),
            Err(CredentialError::ProofInvalid)
        ));
    }

    #[test]
    fn other_issuer_rejects() {
        let (mut rng, issuer, cred) = setup();
        let other = issuer_setup(4, &mut rng).unwrap();
        let pres = present(&cred, issuer.public(), &BTreeSet::from([0]), b"n", &mut rng).unwrap();
        assert!(verify_presentation(&pres, &other, b"n").is_err());
    }

    #[test]
    fn tampered_revealed_value_rejected() {
        let (mut rng, issuer, cred) = setup();
        let mut pres = present(&cred, issuer.public(), &BTreeSet::from([0]), b"n", &mut rng).unwrap();
        pres.revealed.insert(0, "Hospital".into());
        assert!(matches!(
            verify_presentation(&pres, &issuer, b"n"),
            Err(CredentialError::ProofInvalid)
        ));
    }

    #[test]
    fn canonical_roundtrip() {
        let (mut rng, issuer, cred) = setup();
        let pres = present(&cred, issuer.public(), &BTreeSet::from([0, 2]), b"n", &mut rng).unwrap();
        let bytes = pres.to_canonical_bytes();
        assert_eq!(Presentation::from_canonical_bytes(&bytes).unwrap(), pres);
        let json = serde_json::to_string(&pres).unwrap();
        assert_eq!(serde_json::from_str::<Presentation>(&json).unwrap(), pres);
    }
}
