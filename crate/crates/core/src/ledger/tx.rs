use serde::{Deserialize, Serialize};

use crate::encoding::{Decode, DecodeError, Decoder, Encode, Encoder};
use crate::hash::Digest;
use crate::identity::msp::SignatureBytes;
use crate::identity::{Member, Presentation, StandardIdentity};

const PROPOSAL_TAG: &[u8] = b"medledger/proposal/v1";

/// Position of a committed write: `(block number, index within block)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Version {
    pub block: u64,
    pub tx: u64,
}

impl Version {
    pub fn new(block: u64, tx: u64) -> Self {
        Version { block, tx }
    }
}

impl Encode for Version {
    fn encode(&self, enc: &mut Encoder) {
        enc.u64(self.block).u64(self.tx);
    }
}

impl Decode for Version {
    fn decode(dec: &mut Decoder<'_>) -> Result<Self, DecodeError> {
        Ok(Version {
            block: dec.u64()?,
            tx: dec.u64()?,
        })
    }
}

/// Chaincode function name plus its public arguments.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Invocation {
    pub function: String,
    pub args: Vec<Vec<u8>>,
}

impl Invocation {
    pub fn new(function: impl Into<String>, args: Vec<Vec<u8>>) -> Self {
        Invocation {
            function: function.into(),
            args,
        }
    }
}

impl Encode for Invocation {
    fn encode(&self, enc: &mut Encoder) {
        enc.str(&self.function).seq(&self.args);
    }
}

impl Decode for Invocation {
    fn decode(dec: &mut Decoder<'_>) -> Result<Self, DecodeError> {
        Ok(Invocation {
            function: dec.string()?,
            args: dec.seq()?,
        })
    }
}

/// A key read during execution and the version observed (`None` = absent).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReadItem {
    pub key: String,
    pub version: Option<Version>,
}

impl Encode for ReadItem {
    fn encode(&self, enc: &mut Encoder) {
        enc.str(&self.key).option(self.version.as_ref());
    }
}

impl Decode for ReadItem {
    fn decode(dec: &mut Decoder<'_>) -> Result<Self, DecodeError> {
        Ok(ReadItem {
            key: dec.string()?,
            version: dec.option()?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum WriteValue {
    Put(Vec<u8>),
    Delete,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WriteItem {
    pub key: String,
    pub value: WriteValue,
}

impl WriteItem {
    pub fn put(key: impl Into<String>, value: Vec<u8>) -> Self {
        WriteItem {
            key: key.into(),
            value: WriteValue::Put(value),
        }
    }

    pub fn delete(key: impl Into<String>) -> Self {
        WriteItem {
            key: key.into(),
            value: WriteValue::Delete,
        }
    }
}

impl Encode for WriteItem {
    fn encode(&self, enc: &mut Encoder) {
        enc.str(&self.key);
        match &self.value {
            WriteValue::Put(v) => enc.u8(0).bytes(v),
            WriteValue::Delete => enc.u8(1),
        };
    }
}

impl Decode for WriteItem {
    fn decode(dec: &mut Decoder<'_>) -> Result<Self, DecodeError> {
        let key = dec.string()?;
        let value = match dec.u8()? {
            0 => WriteValue::Put(dec.bytes()?.to_vec()),
            1 => WriteValue::Delete,
            tag => return Err(DecodeError::InvalidTag { what: "write", tag }),
        };
        Ok(WriteItem { key, value })
    }
}

/// Public trace of a private-collection write. Plaintext never appears here:
/// an `Anchor` carries `H(salt ‖ plaintext)`, a `Purge` asks member peers to
/// drop their copy while the anchor stays in public state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PrivateWriteKind {
    Anchor(Digest),
    Purge,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrivateWrite {
    pub collection: String,
    pub key: String,
    pub kind: PrivateWriteKind,
}

impl Encode for PrivateWrite {
    fn encode(&self, enc: &mut Encoder) {
        enc.str(&self.collection).str(&self.key);
        match &self.kind {
            PrivateWriteKind::Anchor(h) => enc.u8(0).digest(h),
            PrivateWriteKind::Purge => enc.u8(1),
        };
    }
}

impl Decode for PrivateWrite {
    fn decode(dec: &mut Decoder<'_>) -> Result<Self, DecodeError> {
        let collection = dec.string()?;
        let key = dec.string()?;
        let kind = match dec.u8()? {
            0 => PrivateWriteKind::Anchor(dec.digest()?),
            1 => PrivateWriteKind::Purge,
            tag => return Err(DecodeError::InvalidTag { what: "private write", tag }),
        };
        Ok(PrivateWrite {
            collection,
            key,
            kind,
        })
    }
}

/// Who submitted the proposal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Creator {
    /// A standard identity and its signature over the proposal digest.
    Member {
        identity: StandardIdentity,
        signature: SignatureBytes,
    },
    /// An anonymous-credential presentation bound to the proposal digest.
    Anonymous(Presentation),
}

impl Encode for Creator {
    fn encode(&self, enc: &mut Encoder) {
        match self {
            Creator::Member {
                identity,
                signature,
            } => enc.u8(0).item(identity).raw(signature),
            Creator::Anonymous(p) => enc.u8(1).item(p),
        };
    }
}

impl Decode for Creator {
    fn decode(dec: &mut Decoder<'_>) -> Result<Self, DecodeError> {
        match dec.u8()? {
            0 => Ok(Creator::Member {
                identity: dec.item()?,
                signature: dec.array()?,
            }),
            1 => Ok(Creator::Anonymous(dec.item()?)),
            tag => Err(DecodeError::InvalidTag { what: "creator", tag }),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Endorsement {
    pub endorser: StandardIdentity,
    /// Signature over the transaction id.
    pub signature: SignatureBytes,
}

impl Encode for Endorsement {
    fn encode(&self, enc: &mut Encoder) {
        enc.item(&self.endorser).raw(&self.signature);
    }
}

impl Decode for Endorsement {
    fn decode(dec: &mut Decoder<'_>) -> Result<Self, DecodeError> {
        Ok(Endorsement {
            endorser: dec.item()?,
            signature: dec.array()?,
        })
    }
}

/// Everything the transaction id commits to.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TxBody {
    /// Client-chosen nonce; also feeds the proposal digest.
    pub nonce: [u8; 16],
    pub invocation: Invocation,
    pub read_set: Vec<ReadItem>,
    pub write_set: Vec<WriteItem>,
    pub private_writes: Vec<PrivateWrite>,
    pub creator: Creator,
}

impl TxBody {
    pub fn tx_id(&self) -> Digest {
        Digest::of(&self.to_canonical_bytes())
    }

    pub fn proposal_digest(&self) -> Digest {
        proposal_digest(&self.nonce, &self.invocation)
    }
}

/// Digest the creator signs (or binds its presentation to) before execution.
pub fn proposal_digest(nonce: &[u8; 16], invocation: &Invocation) -> Digest {
    let mut enc = Encoder::new();
    enc.raw(PROPOSAL_TAG).raw(nonce).item(invocation);
    Digest::of(enc.as_slice())
}

impl Encode for TxBody {
    fn encode(&self, enc: &mut Encoder) {
        enc.raw(&self.nonce)
            .item(&self.invocation)
            .seq(&self.read_set)
            .seq(&self.write_set)
            .seq(&self.private_writes)
            .item(&self.creator);
    }
}

impl Decode for TxBody {
    fn decode(dec: &mut Decoder<'_>) -> Result<Self, DecodeError> {
        Ok(TxBody {
            nonce: dec.array()?,
            invocation: dec.item()?,
            read_set: dec.seq()?,
            write_set: dec.seq()?,
            private_writes: dec.seq()?,
            creator: dec.item()?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transaction {
    pub tx_id: Digest,
    pub body: TxBody,
    pub endorsements: Vec<Endorsement>,
}

impl Transaction {
    /// Wraps `body` with its id and no endorsements yet.
    pub fn new(body: TxBody) -> Self {
        Transaction {
            tx_id: body.tx_id(),
            body,
            endorsements: Vec::new(),
        }
    }

    pub fn endorse(&mut self, peer: &Member) {
        self.endorsements.push(Endorsement {
            endorser: peer.identity().clone(),
            signature: peer.sign(self.tx_id.as_bytes()),
        });
    }

    /// The stored id matches the body.
    pub fn id_is_consistent(&self) -> bool {
        self.body.tx_id() == self.tx_id
    }
}

impl Encode for Transaction {
    fn encode(&self, enc: &mut Encoder) {
        enc.digest(&self.tx_id)
            .item(&self.body)
            .seq(&self.endorsements);
    }
}

impl Decode for Transaction {
    fn decode(dec: &mut Decoder<'_>) -> Result<Self, DecodeError> {
        Ok(Transaction {
            tx_id: dec.digest()?,
            body: dec.item()?,
            endorsements: dec.seq()?,
        })
    }
}
