//! Health-record chaincode.
//!
//! A record has six fields. `name` and `address` are routed into the
//! `org1-private` collection as one length-prefixed pair under the record id;
//! the other four form the public view stored at `rec/<id>`. Chaincode is a
//! pure function of caller, state snapshot and arguments: it returns read and
//! write sets plus the plaintext to hand to collection members, and never
//! mutates state itself.
//!
//! Deleting a record purges the private pair and replaces the public view by
//! a tombstone `{id, deleted: true}`. Country and date of birth are
//! quasi-identifiers, so leaving them readable would undercut erasure. The
//! salted anchor and all historical blocks remain.

use std::collections::BTreeMap;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::encoding::{Decode, DecodeError, Decoder, Encode, Encoder};
use crate::ledger::{
    anchor_of, CollectionPolicy, Invocation, PrivateStore, PrivateWrite, PrivateWriteKind,
    ReadItem, WorldState, WriteItem, SALT_LEN,
};

pub const RECORD_PREFIX: &str = "rec/";
pub const PRIVATE_COLLECTION: &str = "org1-private";

pub const FN_CREATE: &str = "create";
pub const FN_READ: &str = "read";
pub const FN_READ_PRIVATE: &str = "readPrivate";
pub const FN_UPDATE: &str = "update";
pub const FN_DELETE: &str = "delete";

/// Transient-map keys. Transient data reaches the endorser but is never
/// written into the transaction.
pub const TRANSIENT_PRIVATE: &str = "private";
pub const TRANSIENT_SALT: &str = "salt";

pub type Transient = BTreeMap<String, Vec<u8>>;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ChaincodeError {
    #[error("record `{0}` already exists")]
    DuplicateId(String),
    #[error("field `{0}` is missing or empty")]
    MissingField(&'static str),
    #[error("date of birth `{0}` is not an ISO-8601 date")]
    InvalidDate(String),
    #[error("record `{0}` not found")]
    NotFound(String),
    #[error("organization `{0}` may not access the private collection")]
    AccessDenied(String),
    #[error("private data for `{0}` has been purged")]
    Purged(String),
    #[error("private data is not held by this peer")]
    NoPrivateStore,
    #[error("private data for `{0}` does not match its anchor")]
    AnchorMismatch(String),
    #[error("bad arguments: {0}")]
    BadArgs(String),
    #[error("unknown function `{0}`")]
    UnknownFunction(String),
}

/// Record interchange format.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct EhrRecord {
    pub id: String,
    pub name: String,
    pub address: String,
    pub country: String,
    pub date_of_birth: String,
    pub test: String,
}

impl EhrRecord {
    pub fn validate(&self) -> Result<(), ChaincodeError> {
        for (field, value) in [
            ("id", &self.id),
            ("name", &self.name),
            ("address", &self.address),
            ("country", &self.country),
            ("dateOfBirth", &self.date_of_birth),
            ("test", &self.test),
        ] {
            if value.is_empty() {
                return Err(ChaincodeError::MissingField(field));
            }
        }
        validate_date(&self.date_of_birth)
    }

    pub fn public_view(&self) -> PublicRecordView {
        PublicRecordView {
            id: self.id.clone(),
            country: self.country.clone(),
            date_of_birth: self.date_of_birth.clone(),
            test: self.test.clone(),
        }
    }

    pub fn private_fields(&self) -> PrivateFields {
        PrivateFields {
            name: self.name.clone(),
            address: self.address.clone(),
        }
    }
}

fn validate_date(s: &str) -> Result<(), ChaincodeError> {
    NaiveDate::parse_from_str(s, "%Y-%m-%d")
        .map(|_| ())
        .map_err(|_| ChaincodeError::InvalidDate(s.to_string()))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct PublicRecordView {
    pub id: String,
    pub country: String,
    pub date_of_birth: String,
    pub test: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrivateFields {
    pub name: String,
    pub address: String,
}

impl Encode for PrivateFields {
    fn encode(&self, enc: &mut Encoder) {
        enc.str(&self.name).str(&self.address);
    }
}

impl Decode for PrivateFields {
    fn decode(dec: &mut Decoder<'_>) -> Result<Self, DecodeError> {
        Ok(PrivateFields {
            name: dec.string()?,
            address: dec.string()?,
        })
    }
}

/// Field updates; `None` leaves a field unchanged.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct RecordChanges {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub address: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub country: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub date_of_birth: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub test: Option<String>,
}

impl RecordChanges {
    pub fn touches_private(&self) -> bool {
        self.name.is_some() || self.address.is_some()
    }

    fn public_part(&self) -> RecordChanges {
        RecordChanges {
            name: None,
            address: None,
            ..self.clone()
        }
    }

    fn private_part(&self) -> RecordChanges {
        RecordChanges {
            name: self.name.clone(),
            address: self.address.clone(),
            ..Default::default()
        }
    }
}

/// Who is calling, as far as the chaincode can tell.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CallerContext {
    pub org_name: String,
    pub anonymous: bool,
}

impl CallerContext {
    pub fn member(org: impl Into<String>) -> Self {
        CallerContext {
            org_name: org.into(),
            anonymous: false,
        }
    }

    pub fn anonymous(org: impl Into<String>) -> Self {
        CallerContext {
            org_name: org.into(),
            anonymous: true,
        }
    }
}

/// Plaintext destined for collection members only.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrivateData {
    pub collection: String,
    pub key: String,
    pub plaintext: Vec<u8>,
    pub salt: [u8; SALT_LEN],
}

/// Result of simulating one invocation.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ChaincodeOutput {
    pub read_set: Vec<ReadItem>,
    pub write_set: Vec<WriteItem>,
    pub private_writes: Vec<PrivateWrite>,
    pub private_data: Vec<PrivateData>,
    pub response: Vec<u8>,
}

/// A client-side description of a chaincode call.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ChaincodeCall {
    Create(EhrRecord),
    Read { id: String },
    ReadPrivate { id: String },
    Update { id: String, changes: RecordChanges },
    Delete { id: String },
}

impl ChaincodeCall {
    /// True for calls that only query state and are not ordered.
    pub fn is_query(&self) -> bool {
        matches!(self, ChaincodeCall::Read { .. } | ChaincodeCall::ReadPrivate { .. })
    }

    pub fn needs_salt(&self) -> bool {
        match self {
            ChaincodeCall::Create(_) => true,
            ChaincodeCall::Update { changes, .. } => changes.touches_private(),
            _ => false,
        }
    }

    /// Splits into public invocation arguments and transient data.
    pub fn to_invocation(&self, salt: Option<[u8; SALT_LEN]>) -> (Invocation, Transient) {
        let mut transient = Transient::new();
        if let Some(salt) = salt {
            transient.insert(TRANSIENT_SALT.into(), salt.to_vec());
        }
        let invocation = match self {
            ChaincodeCall::Create(record) => {
                transient.insert(
                    TRANSIENT_PRIVATE.into(),
                    record.private_fields().to_canonical_bytes(),
                );
                Invocation::new(FN_CREATE, vec![to_json(&record.public_view())])
            }
            ChaincodeCall::Read { id } => Invocation::new(FN_READ, vec![id.as_bytes().to_vec()]),
            ChaincodeCall::ReadPrivate { id } => {
                Invocation::new(FN_READ_PRIVATE, vec![id.as_bytes().to_vec()])
            }
            ChaincodeCall::Update { id, changes } => {
                if changes.touches_private() {
                    transient.insert(TRANSIENT_PRIVATE.into(), to_json(&changes.private_part()));
                }
                Invocation::new(
                    FN_UPDATE,
                    vec![id.as_bytes().to_vec(), to_json(&changes.public_part())],
                )
            }
            ChaincodeCall::Delete { id } => {
                Invocation::new(FN_DELETE, vec![id.as_bytes().to_vec()])
            }
        };
        (invocation, transient)
    }
}

fn to_json<T: Serialize>(v: &T) -> Vec<u8> {
    serde_json::to_vec(v).expect("chaincode values serialize")
}

pub fn record_key(id: &str) -> String {
    format!("{RECORD_PREFIX}{id}")
}

/// Stored public value: either a live view or a tombstone.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
enum StoredRecord {
    Tombstone { id: String, deleted: bool },
    Live(PublicRecordView),
}

/// Execution context for one invocation over a state snapshot.
pub struct Stub<'a> {
    state: &'a WorldState,
    private: Option<&'a PrivateStore>,
    collection: &'a CollectionPolicy,
    out: ChaincodeOutput,
}

impl<'a> Stub<'a> {
    pub fn new(
        state: &'a WorldState,
        private: Option<&'a PrivateStore>,
        collection: &'a CollectionPolicy,
    ) -> Self {
        Stub {
            state,
            private,
            collection,
            out: ChaincodeOutput::default(),
        }
    }

    pub fn finish(self) -> ChaincodeOutput {
        self.out
    }

    fn get_state(&mut self, key: &str) -> Option<&'a [u8]> {
        let entry = self.state.get(key);
        if !self.out.read_set.iter().any(|r| r.key == key) {
            self.out.read_set.push(ReadItem {
                key: key.to_string(),
                version: entry.map(|e| e.version),
            });
        }
        entry.map(|e| e.value.as_slice())
    }

    fn put_state(&mut self, key: String, value: Vec<u8>) {
        self.out.write_set.push(WriteItem::put(key, value));
    }

    fn put_private(&mut self, key: &str, plaintext: Vec<u8>, salt: [u8; SALT_LEN]) {
        let anchor = anchor_of(&salt, &plaintext);
        self.out.private_writes.push(PrivateWrite {
            collection: self.collection.name.clone(),
            key: key.to_string(),
            kind: PrivateWriteKind::Anchor(anchor),
        });
        self.out.private_data.push(PrivateData {
            collection: self.collection.name.clone(),
            key: key.to_string(),
            plaintext,
            salt,
        });
    }

    fn purge_private(&mut self, key: &str) {
        self.out.private_writes.push(PrivateWrite {
            collection: self.collection.name.clone(),
            key: key.to_string(),
            kind: PrivateWriteKind::Purge,
        });
    }

    fn live_record(&mut self, id: &str) -> Result<PublicRecordView, ChaincodeError> {
        let raw = self
            .get_state(&record_key(id))
            .ok_or_else(|| ChaincodeError::NotFound(id.to_string()))?;
        match serde_json::from_slice::<StoredRecord>(raw) {
            Ok(StoredRecord::Live(view)) => Ok(view),
            Ok(StoredRecord::Tombstone { .. }) => Err(ChaincodeError::NotFound(id.to_string())),
            Err(e) => Err(ChaincodeError::BadArgs(format!("corrupt record {id}: {e}"))),
        }
    }

    fn check_access(&self, ctx: &CallerContext) -> Result<(), ChaincodeError> {
        if self.collection.is_member(&ctx.org_name) {
            Ok(())
        } else {
            Err(ChaincodeError::AccessDenied(ctx.org_name.clone()))
        }
    }

    fn private_fields(&self, id: &str) -> Result<PrivateFields, ChaincodeError> {
        let anchor = self
            .state
            .anchor(&self.collection.name, id)
            .ok_or_else(|| ChaincodeError::NotFound(id.to_string()))?;
        let store = self.private.ok_or(ChaincodeError::NoPrivateStore)?;
        let entry = store
            .get(id)
            .ok_or_else(|| ChaincodeError::Purged(id.to_string()))?;
        if anchor_of(&entry.salt, &entry.plaintext) != anchor.value_hash {
            return Err(ChaincodeError::AnchorMismatch(id.to_string()));
        }
        PrivateFields::from_canonical_bytes(&entry.plaintext)
            .map_err(|e| ChaincodeError::BadArgs(format!("corrupt private data: {e}")))
    }
}

pub fn create_record(
    stub: &mut Stub<'_>,
    _ctx: &CallerContext,
    record: &EhrRecord,
    salt: [u8; SALT_LEN],
) -> Result<(), ChaincodeError> {
    record.validate()?;
    let key = record_key(&record.id);
    // Tombstoned ids stay taken.
    if stub.get_state(&key).is_some() {
        return Err(ChaincodeError::DuplicateId(record.id.clone()));
    }
    stub.put_state(key, to_json(&record.public_view()));
    stub.put_private(&record.id, record.private_fields().to_canonical_bytes(), salt);
    stub.out.response = record.id.as_bytes().to_vec();
    Ok(())
}

/// Same answer for every organization.
pub fn read_record(
    stub: &mut Stub<'_>,
    _ctx: &CallerContext,
    id: &str,
) -> Result<PublicRecordView, ChaincodeError> {
    let view = stub.live_record(id)?;
    stub.out.response = to_json(&view);
    Ok(view)
}

pub fn read_private(
    stub: &mut Stub<'_>,
    ctx: &CallerContext,
    id: &str,
) -> Result<PrivateFields, ChaincodeError> {
    stub.check_access(ctx)?;
    let fields = stub.private_fields(id)?;
    stub.out.response = to_json(&fields);
    Ok(fields)
}

pub fn update_record(
    stub: &mut Stub<'_>,
    ctx: &CallerContext,
    id: &str,
    changes: &RecordChanges,
    salt: Option<[u8; SALT_LEN]>,
) -> Result<(), ChaincodeError> {
    if changes.touches_private() {
        stub.check_access(ctx)?;
    }
    let mut view = stub.live_record(id)?;
    if let Some(c) = &changes.country {
        view.country = c.clone();
    }
    if let Some(d) = &changes.date_of_birth {
        validate_date(d)?;
        view.date_of_birth = d.clone();
    }
    if let Some(t) = &changes.test {
        view.test = t.clone();
    }
    for (field, value) in [
        ("name", &changes.name),
        ("address", &changes.address),
        ("country", &changes.country),
        ("test", &changes.test),
    ] {
        if value.as_ref().is_some_and(String::is_empty) {
            return Err(ChaincodeError::MissingField(field));
        }
    }
    if changes.touches_private() {
        let salt = salt.ok_or(ChaincodeError::MissingField("salt"))?;
        let mut fields = stub.private_fields(id)?;
        if let Some(n) = &changes.name {
            fields.name = n.clone();
        }
        if let Some(a) = &changes.address {
            fields.address = a.clone();
        }
        stub.put_private(id, fields.to_canonical_bytes(), salt);
    }
    // Always rewritten so concurrent updates of one record conflict.
    stub.put_state(record_key(id), to_json(&view));
    Ok(())
}

pub fn delete_record(
    stub: &mut Stub<'_>,
    _ctx: &CallerContext,
    id: &str,
) -> Result<(), ChaincodeError> {
    stub.live_record(id)?;
    let tombstone = StoredRecord::Tombstone {
        id: id.to_string(),
        deleted: true,
    };
    stub.put_state(record_key(id), to_json(&tombstone));
    if stub.state.anchor(&stub.collection.name, id).is_some() {
        stub.purge_private(id);
    }
    Ok(())
}

fn arg_str<'a>(inv: &'a Invocation, i: usize) -> Result<&'a str, ChaincodeError> {
    let raw = inv
        .args
        .get(i)
        .ok_or_else(|| ChaincodeError::BadArgs(format!("missing argument {i}")))?;
    std::str::from_utf8(raw).map_err(|_| ChaincodeError::BadArgs(format!("argument {i} is not utf-8")))
}

fn arg_json<T: for<'de> Deserialize<'de>>(inv: &Invocation, i: usize) -> Result<T, ChaincodeError> {
    serde_json::from_str(arg_str(inv, i)?).map_err(|e| ChaincodeError::BadArgs(e.to_string()))
}

fn transient_salt(transient: &Transient) -> Result<Option<[u8; SALT_LEN]>, ChaincodeError> {
    transient
        .get(TRANSIENT_SALT)
        .map(|s| {
            s.as_slice()
                .try_into()
                .map_err(|_| ChaincodeError::BadArgs(format!("salt must be {SALT_LEN} bytes")))
        })
        .transpose()
}

/// Dispatches an invocation against a snapshot of `state`.
pub fn invoke(
    ctx: &CallerContext,
    state: &WorldState,
    private: Option<&PrivateStore>,
    collection: &CollectionPolicy,
    invocation: &Invocation,
    transient: &Transient,
) -> Result<ChaincodeOutput, ChaincodeError> {
    let mut stub = Stub::new(state, private, collection);
    match invocation.function.as_str() {
        FN_CREATE => {
            let view: PublicRecordView = arg_json(invocation, 0)?;
            let private = transient
                .get(TRANSIENT_PRIVATE)
                .ok_or(ChaincodeError::MissingField("name"))?;
            let fields = PrivateFields::from_canonical_bytes(private)
                .map_err(|e| ChaincodeError::BadArgs(e.to_string()))?;
            let salt = transient_salt(transient)?.ok_or(ChaincodeError::MissingField("salt"))?;
            let record = EhrRecord {
                id: view.id,
                name: fields.name,
                address: fields.address,
                country: view.country,
                date_of_birth: view.date_of_birth,
                test: view.test,
            };
            create_record(&mut stub, ctx, &record, salt)?;
        }
        FN_READ => {
            read_record(&mut stub, ctx, arg_str(invocation, 0)?)?;
        }
        FN_READ_PRIVATE => {
            read_private(&mut stub, ctx, arg_str(invocation, 0)?)?;
        }
        FN_UPDATE => {
            let id = arg_str(invocation, 0)?;
            let mut changes: RecordChanges = arg_json(invocation, 1)?;
            if changes.touches_private() {
                return Err(ChaincodeError::BadArgs(
                    "private fields must travel in transient data".into(),
                ));
            }
            if let Some(p) = transient.get(TRANSIENT_PRIVATE) {
                let private: RecordChanges = serde_json::from_slice(p)
                    .map_err(|e| ChaincodeError::BadArgs(e.to_string()))?;
                changes.name = private.name;
                changes.address = private.address;
            }
            update_record(&mut stub, ctx, id, &changes, transient_salt(transient)?)?;
        }
        FN_DELETE => {
            delete_record(&mut stub, ctx, arg_str(invocation, 0)?)?;
        }
        other => return Err(ChaincodeError::UnknownFunction(other.to_string())),
    }
    Ok(stub.finish())
}
