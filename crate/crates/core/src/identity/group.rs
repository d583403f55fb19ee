//! Serializable wrappers around ristretto255 points and scalars.

use std::sync::OnceLock;

use curve25519_dalek::constants::RISTRETTO_BASEPOINT_POINT;
use curve25519_dalek::ristretto::{CompressedRistretto, RistrettoPoint};
use curve25519_dalek::scalar::Scalar;
use curve25519_dalek::traits::Identity;
use rand::{CryptoRng, RngCore};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::encoding::{Decode, DecodeError, Decoder, Encode, Encoder};
use crate::hash::WideHasher;

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct GroupElement(pub RistrettoPoint);

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct GroupScalar(pub Scalar);

/// Primary generator.
pub fn g() -> RistrettoPoint {
    RISTRETTO_BASEPOINT_POINT
}

/// Second generator with unknown discrete log relative to [`g`].
pub fn h() -> RistrettoPoint {
    static H: OnceLock<RistrettoPoint> = OnceLock::new();
    *H.get_or_init(|| RistrettoPoint::hash_from_bytes::<WideHasher>(b"medledger/credential/generator-h"))
}

pub fn random_nonzero<R: RngCore + CryptoRng>(rng: &mut R) -> Scalar {
    loop {
        let s = Scalar::random(rng);
        if s != Scalar::ZERO {
            return s;
        }
    }
}

pub fn is_identity(p: &RistrettoPoint) -> bool {
    *p == RistrettoPoint::identity()
}

impl GroupElement {
    pub fn to_bytes(&self) -> [u8; 32] {
        self.0.compress().to_bytes()
    }

    pub fn from_bytes(bytes: &[u8; 32]) -> Option<Self> {
        CompressedRistretto(*bytes).decompress().map(GroupElement)
    }
}

impl GroupScalar {
    pub fn to_bytes(&self) -> [u8; 32] {
        self.0.to_bytes()
    }

    pub fn from_bytes(bytes: [u8; 32]) -> Option<Self> {
        Option::from(Scalar::from_canonical_bytes(bytes)).map(GroupScalar)
    }
}

impl Encode for GroupElement {
    fn encode(&self, enc: &mut Encoder) {
        enc.raw(&self.to_bytes());
    }
}

impl Decode for GroupElement {
    fn decode(dec: &mut Decoder<'_>) -> Result<Self, DecodeError> {
        GroupElement::from_bytes(&dec.array()?).ok_or(DecodeError::Invalid("group element"))
    }
}

impl Encode for GroupScalar {
    fn encode(&self, enc: &mut Encoder) {
        enc.raw(&self.to_bytes());
    }
}

impl Decode for GroupScalar {
    fn decode(dec: &mut Decoder<'_>) -> Result<Self, DecodeError> {
        GroupScalar::from_bytes(dec.array()?).ok_or(DecodeError::Invalid("scalar"))
    }
}

fn decode_hex32<'de, D: Deserializer<'de>>(d: D) -> Result<[u8; 32], D::Error> {
    let s = String::deserialize(d)?;
    let mut out = [0u8; 32];
    hex::decode_to_slice(&s, &mut out).map_err(serde::de::Error::custom)?;
    Ok(out)
}

impl Serialize for GroupElement {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&hex::encode(self.to_bytes()))
    }
}

impl<'de> Deserialize<'de> for GroupElement {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        GroupElement::from_bytes(&decode_hex32(d)?)
            .ok_or_else(|| serde::de::Error::custom("invalid ristretto255 encoding"))
    }
}

impl Serialize for GroupScalar {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&hex::encode(self.to_bytes()))
    }
}

impl<'de> Deserialize<'de> for GroupScalar {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        GroupScalar::from_bytes(decode_hex32(d)?)
            .ok_or_else(|| serde::de::Error::custom("non-canonical scalar"))
    }
}
