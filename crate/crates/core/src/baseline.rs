//! Conventional record store used as the comparison target.
//!
//! Rows are appended to fixed-capacity pages. Name and address are encrypted
//! per column with ChaCha20-Poly1305 under a store key, each with its own
//! random nonce and the row id plus column name as associated data. Reads
//! scan from the first row until the id matches, so read cost grows with the
//! row count; the id set below only enforces uniqueness on insert. An indexed
//! lookup would make reads flat and is deliberately not provided.

use std::collections::BTreeSet;
use std::io::BufRead;

use chacha20poly1305::aead::{Aead, KeyInit, Payload};
use chacha20poly1305::{ChaCha20Poly1305, Key, Nonce};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use thiserror::Error;

use crate::chaincode::{ChaincodeError, EhrRecord};
use crate::encoding::{Encode, Encoder};

pub const NONCE_LEN: usize = 12;
const PAGE_ROWS: usize = 4096;

#[derive(Debug, Error)]
pub enum BaselineError {
    #[error("record `{0}` already exists")]
    DuplicateId(String),
    #[error("record `{0}` not found")]
    NotFound(String),
    #[error("column `{column}` of `{id}` failed to decrypt")]
    Decrypt { id: String, column: &'static str },
    #[error(transparent)]
    InvalidRecord(#[from] ChaincodeError),
    #[error("line {line}: {message}")]
    Load { line: usize, message: String },
}

/// An encrypted column value: nonce followed by ciphertext and tag.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SealedColumn {
    pub nonce: [u8; NONCE_LEN],
    pub ciphertext: Vec<u8>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BaselineRow {
    pub id: String,
    pub country: String,
    pub date_of_birth: String,
    pub test: String,
    pub name_ct: SealedColumn,
    pub address_ct: SealedColumn,
}

pub struct BaselineStore {
    pages: Vec<Vec<BaselineRow>>,
    ids: BTreeSet<String>,
    cipher: ChaCha20Poly1305,
    nonce_rng: ChaCha20Rng,
}

impl std::fmt::Debug for BaselineStore {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("BaselineStore")
            .field("rows", &self.len())
            .finish_non_exhaustive()
    }
}

impl BaselineStore {
    /// A store with `key`; nonces come from a stream seeded by `nonce_seed`.
    pub fn new(key: [u8; 32], nonce_seed: u64) -> Self {
        BaselineStore {
            pages: Vec::new(),
            ids: BTreeSet::new(),
            cipher: ChaCha20Poly1305::new(Key::from_slice(&key)),
            nonce_rng: ChaCha20Rng::seed_from_u64(nonce_seed),
        }
    }

    /// Key and nonce stream both derived from `seed`.
    pub fn from_seed(seed: u64) -> Self {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        rng.set_stream(2);
        let mut key = [0u8; 32];
        rng.fill_bytes(&mut key);
        Self::new(key, seed)
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    fn seal(&mut self, id: &str, column: &'static str, plaintext: &str) -> SealedColumn {
        let mut nonce = [0u8; NONCE_LEN];
        self.nonce_rng.fill_bytes(&mut nonce);
        let aad = associated_data(id, column);
        let ciphertext = self
            .cipher
            .encrypt(
                Nonce::from_slice(&nonce),
                Payload {
                    msg: plaintext.as_bytes(),
                    aad: &aad,
                },
            )
            .expect("encryption does not fail for in-memory buffers");
        SealedColumn { nonce, ciphertext }
    }

    fn open(&self, id: &str, column: &'static str, sealed: &SealedColumn) -> Result<String, BaselineError> {
        let err = || BaselineError::Decrypt {
            id: id.to_string(),
            column,
        };
        let aad = associated_data(id, column);
        let plain = self
            .cipher
            .decrypt(
                Nonce::from_slice(&sealed.nonce),
                Payload {
                    msg: &sealed.ciphertext,
                    aad: &aad,
                },
            )
            .map_err(|_| err())?;
        String::from_utf8(plain).map_err(|_| err())
    }

    pub fn insert_row(&mut self, record: &EhrRecord) -> Result<(), BaselineError> {
        record.validate()?;
        if self.ids.contains(&record.id) {
            return Err(BaselineError::DuplicateId(record.id.clone()));
        }
        let name_ct = self.seal(&record.id, "name", &record.name);
        let address_ct = self.seal(&record.id, "address", &record.address);
        if self.pages.last().map_or(true, |p| p.len() == PAGE_ROWS) {
            self.pages.push(Vec::with_capacity(PAGE_ROWS));
        }
        self.pages.last_mut().expect("page exists").push(BaselineRow {
            id: record.id.clone(),
            country: record.country.clone(),
            date_of_birth: record.date_of_birth.clone(),
            test: record.test.clone(),
            name_ct,
            address_ct,
        });
        self.ids.insert(record.id.clone());
        Ok(())
    }

    pub fn rows(&self) -> impl Iterator<Item = &BaselineRow> {
        self.pages.iter().flatten()
    }

    /// Sequential scan from the first row, then decryption.
    pub fn read_row(&self, id: &str) -> Result<EhrRecord, BaselineError> {
        let row = self
            .rows()
            .find(|r| r.id == id)
            .ok_or_else(|| BaselineError::NotFound(id.to_string()))?;
        Ok(EhrRecord {
            id: row.id.clone(),
            name: self.open(id, "name", &row.name_ct)?,
            address: self.open(id, "address", &row.address_ct)?,
            country: row.country.clone(),
            date_of_birth: row.date_of_birth.clone(),
            test: row.test.clone(),
        })
    }

    /// Loads JSON-lines records; returns how many were inserted.
    pub fn load_jsonl(&mut self, reader: impl BufRead) -> Result<usize, BaselineError> {
        let mut n = 0;
        for (i, line) in reader.lines().enumerate() {
            let load_err = |message: String| BaselineError::Load {
                line: i + 1,
                message,
            };
            let line = line.map_err(|e| load_err(e.to_string()))?;
            if line.trim().is_empty() {
                continue;
            }
            let record: EhrRecord =
                serde_json::from_str(&line).map_err(|e| load_err(e.to_string()))?;
            self.insert_row(&record)?;
            n += 1;
        }
        Ok(n)
    }

    /// Everything the store would persist, key excluded.
    pub fn serialize(&self) -> Vec<u8> {
        let mut enc = Encoder::new();
        enc.item(self);
        enc.finish()
    }
}

impl Encode for BaselineStore {
    fn encode(&self, enc: &mut Encoder) {
        enc.len(self.len());
        for r in self.rows() {
            enc.str(&r.id)
                .str(&r.country)
                .str(&r.date_of_birth)
                .str(&r.test)
                .raw(&r.name_ct.nonce)
                .bytes(&r.name_ct.ciphertext)
                .raw(&r.address_ct.nonce)
                .bytes(&r.address_ct.ciphertext);
        }
    }
}

fn associated_data(id: &str, column: &str) -> Vec<u8> {
    let mut enc = Encoder::new();
    enc.str(id).str(column);
    enc.finish()
}
