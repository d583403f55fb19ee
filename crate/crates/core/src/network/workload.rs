//! JSON-lines workload scripts.
//!
//! One op per line: `{"op": "create", "client": "Healthcenter/alice", "args": {...}}`.
//! Ops are `create` (args: a full record), `read`, `read-private`, `delete`
//! (args: `{"id": ...}`), `update` (args: `{"id": ..., <changed fields>}`)
//! and `tick`, which advances the orderer's batch timer.

use std::collections::HashMap;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::chaincode::{ChaincodeCall, EhrRecord, RecordChanges};
use crate::hash::Digest;
use crate::ledger::{Block, ValidationFlag};

use super::{BlockCommit, Network, NetworkError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorkloadOp {
    pub op: String,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub client: String,
    #[serde(default, skip_serializing_if = "serde_json::Value::is_null")]
    pub args: serde_json::Value,
}

impl WorkloadOp {
    pub fn new(op: &str, client: &str, args: serde_json::Value) -> Self {
        WorkloadOp {
            op: op.to_string(),
            client: client.to_string(),
            args,
        }
    }

    pub fn tick() -> Self {
        Self::new("tick", "", serde_json::Value::Null)
    }

    /// The chaincode call this op stands for; `None` for `tick`.
    pub fn to_call(&self) -> Result<Option<ChaincodeCall>, String> {
        #[derive(Deserialize)]
        struct IdArg {
            id: String,
        }
        #[derive(Deserialize)]
        struct UpdateArgs {
            id: String,
            #[serde(flatten)]
            changes: RecordChanges,
        }
        let args = self.args.clone();
        let id = || {
            serde_json::from_value::<IdArg>(args.clone())
                .map(|a| a.id)
                .map_err(|e| e.to_string())
        };
        Ok(Some(match self.op.as_str() {
            "tick" => return Ok(None),
            "create" => ChaincodeCall::Create(
                serde_json::from_value::<EhrRecord>(self.args.clone()).map_err(|e| e.to_string())?,
            ),
            "read" => ChaincodeCall::Read { id: id()? },
            "read-private" | "readPrivate" => ChaincodeCall::ReadPrivate { id: id()? },
            "delete" => ChaincodeCall::Delete { id: id()? },
            "update" => {
                let a: UpdateArgs =
                    serde_json::from_value(self.args.clone()).map_err(|e| e.to_string())?;
                ChaincodeCall::Update {
                    id: a.id,
                    changes: a.changes,
                }
            }
            other => return Err(format!("unknown op `{other}`")),
        }))
    }
}

/// Parses a JSON-lines script; blank lines are skipped.
pub fn parse_script(text: &str) -> Result<Vec<WorkloadOp>, serde_json::Error> {
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(serde_json::from_str)
        .collect()
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct WorkloadOptions {
    /// Replace each `Org/subject` client by an anonymous credential for the
    /// same subject that reveals only the organization.
    pub anonymize: bool,
    /// Record every peer's state snapshot after each block.
    pub snapshot_every_block: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OpOutcome {
    Committed { block: u64, flag: ValidationFlag },
    Query(Vec<u8>),
    Rejected(String),
    Tick,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OpResult {
    pub index: usize,
    pub op: String,
    pub outcome: OpOutcome,
    /// Submission to commit for transactions; call duration for queries.
    pub latency: Duration,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct WorkloadStats {
    pub ops: usize,
    pub valid: usize,
    pub invalid_mvcc: usize,
    pub invalid_endorsement: usize,
    pub rejected: usize,
    pub queries: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct WorkloadReport {
    pub results: Vec<OpResult>,
    pub stats: WorkloadStats,
    pub blocks: Vec<BlockCommit>,
    /// Per-peer state snapshots; after every block when requested, and
    /// always once at the end.
    pub snapshots: Vec<Vec<String>>,
}

impl WorkloadReport {
    pub fn final_snapshots(&self) -> &[String] {
        self.snapshots.last().map_or(&[], Vec::as_slice)
    }
}

struct Pending {
    index: usize,
    op: String,
    started: Instant,
}

impl Network {
    fn resolve_client_name(&self, name: &str, opts: WorkloadOptions) -> String {
        if opts.anonymize && !name.starts_with("anon") && name.contains('/') {
            format!("anon:{name}")
        } else {
            name.to_string()
        }
    }

    /// Runs `script` through the full pipeline and drains the orderer at the
    /// end. Failing ops are recorded, not fatal; only delivery errors abort.
    pub fn run_workload(
        &mut self,
        script: &[WorkloadOp],
        opts: WorkloadOptions,
    ) -> Result<WorkloadReport, NetworkError> {
        let mut report = WorkloadReport::default();
        let mut pending: HashMap<Digest, Pending> = HashMap::new();
        let mut slots: Vec<Option<OpResult>> = vec![None; script.len()];

        for (index, op) in script.iter().enumerate() {
            let started = Instant::now();
            let call = match op.to_call() {
                Ok(Some(call)) => call,
                Ok(None) => {
                    slots[index] = Some(OpResult {
                        index,
                        op: op.op.clone(),
                        outcome: OpOutcome::Tick,
                        latency: Duration::ZERO,
                    });
                    if let Some(b) = self.tick() {
                        self.commit_for_workload(&b, &mut pending, &mut slots, &mut report, opts)?;
                    }
                    continue;
                }
                Err(e) => {
                    slots[index] = Some(rejected(index, op, e, started));
                    continue;
                }
            };
            let client_name = self.resolve_client_name(&op.client, opts);
            let client = match self.client(&client_name) {
                Ok(c) => c,
                Err(e) => {
                    slots[index] = Some(rejected(index, op, e.to_string(), started));
                    continue;
                }
            };
            if call.is_query() {
                let outcome = match self.query(&client, &call) {
                    Ok(resp) => OpOutcome::Query(resp),
                    Err(e) => OpOutcome::Rejected(e.to_string()),
                };
                slots[index] = Some(OpResult {
                    index,
                    op: op.op.clone(),
                    outcome,
                    latency: started.elapsed(),
                });
                continue;
            }
            match self.submit_proposal(&client, &call) {
                Ok(tx) => {
                    pending.insert(
                        tx.tx_id,
                        Pending {
                            index,
                            op: op.op.clone(),
                            started,
                        },
                    );
                    for b in self.broadcast(tx) {
                        self.commit_for_workload(&b, &mut pending, &mut slots, &mut report, opts)?;
                    }
                }
                Err(e) => slots[index] = Some(rejected(index, op, e.to_string(), started)),
            }
        }
        for b in self.ordering.flush() {
            self.commit_for_workload(&b, &mut pending, &mut slots, &mut report, opts)?;
        }

        for (i, slot) in slots.into_iter().enumerate() {
            let r = slot.unwrap_or_else(|| OpResult {
                index: i,
                op: script[i].op.clone(),
                outcome: OpOutcome::Rejected("never committed".into()),
                latency: Duration::ZERO,
            });
            let s = &mut report.stats;
            match &r.outcome {
                OpOutcome::Committed { flag, .. } => match flag {
                    ValidationFlag::Valid => s.valid += 1,
                    ValidationFlag::InvalidMvcc => s.invalid_mvcc += 1,
                    ValidationFlag::InvalidEndorsement => s.invalid_endorsement += 1,
                },
                OpOutcome::Query(_) => s.queries += 1,
                OpOutcome::Rejected(_) => s.rejected += 1,
                OpOutcome::Tick => {}
            }
            if r.outcome != OpOutcome::Tick {
                s.ops += 1;
            }
            report.results.push(r);
        }
        report.snapshots.push(self.state_snapshots());
        Ok(report)
    }

    fn commit_for_workload(
        &mut self,
        block: &Block,
        pending: &mut HashMap<Digest, Pending>,
        slots: &mut [Option<OpResult>],
        report: &mut WorkloadReport,
        opts: WorkloadOptions,
    ) -> Result<(), NetworkError> {
        let commit = self.deliver_and_commit(block)?;
        for (id, flag) in commit.tx_ids.iter().zip(&commit.flags) {
            if let Some(p) = pending.remove(id) {
                slots[p.index] = Some(OpResult {
                    index: p.index,
                    op: p.op,
                    outcome: OpOutcome::Committed {
                        block: commit.number,
                        flag: *flag,
                    },
                    latency: p.started.elapsed(),
                });
            }
        }
        if opts.snapshot_every_block {
            report.snapshots.push(self.state_snapshots());
        }
        report.blocks.push(commit);
        Ok(())
    }
}

fn rejected(index: usize, op: &WorkloadOp, reason: String, started: Instant) -> OpResult {
    OpResult {
        index,
        op: op.op.clone(),
        outcome: OpOutcome::Rejected(reason),
        latency: started.elapsed(),
    }
}
