//! Latency harness for ledger and baseline reads and writes.
//!
//! For each target and volume the store is grown to the volume, the last
//! `min(reads, new rows)` inserts are timed as writes, and `reads` lookups of
//! uniformly chosen existing ids are timed after `warmup` discarded ones.
//! Volumes are reached incrementally on one store per target.
//!
//! A ledger write is a full create: proposal, endorsement, ordering and
//! validation plus commit on every peer. A ledger read is the public record
//! query followed by the private-field query, issued by a collection-member
//! client, so both targets return the same six fields. Bulk population goes
//! through the same pipeline with large blocks and parallel peer commits;
//! timed operations run in sequential mode.

use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::baseline::BaselineStore;
use crate::chaincode::{ChaincodeCall, EhrRecord};
use crate::network::{Client, CommitMode, Network, NetworkConfig, NetworkError};

pub const DEFAULT_VOLUMES: [usize; 5] = [10, 100, 1_000, 10_000, 100_000];
pub const FULL_VOLUMES: [usize; 6] = [10, 100, 1_000, 10_000, 100_000, 1_000_000];
pub const CSV_HEADER: &str = "target,volume,op,mean_ms,p95_ms,samples";

const BULK_BLOCK: usize = 500;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("invalid plan: {0}")]
    InvalidPlan(String),
    #[error("unknown target `{0}`")]
    UnknownTarget(String),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("csv header is `{0}`, expected `{CSV_HEADER}`")]
    Header(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Target {
    Ledger,
    Baseline,
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Target::Ledger => "ledger",
            Target::Baseline => "baseline",
        })
    }
}

impl FromStr for Target {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "ledger" => Ok(Target::Ledger),
            "baseline" => Ok(Target::Baseline),
            other => Err(BenchError::UnknownTarget(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Op {
    Read,
    Write,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BenchPlan {
    pub targets: Vec<Target>,
    pub volumes: Vec<usize>,
    pub reads_per_volume: usize,
    pub warmup: usize,
    pub seed: u64,
}

impl Default for BenchPlan {
    fn default() -> Self {
        BenchPlan {
            targets: vec![Target::Ledger, Target::Baseline],
            volumes: DEFAULT_VOLUMES.to_vec(),
            reads_per_volume: 200,
            warmup: 20,
            seed: 42,
        }
    }
}

impl BenchPlan {
    pub fn validate(&self) -> Result<(), BenchError> {
        if self.reads_per_volume < 1 {
            return Err(BenchError::InvalidPlan("reads per volume must be at least 1".into()));
        }
        if self.volumes.windows(2).any(|w| w[0] >= w[1]) {
            return Err(BenchError::InvalidPlan("volumes must be strictly increasing".into()));
        }
        if self.volumes.first() == Some(&0) {
            return Err(BenchError::InvalidPlan("volumes must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchResult {
    pub target: Target,
    pub volume: usize,
    pub op: Op,
    pub mean_ms: f64,
    pub p95_ms: f64,
    pub samples: usize,
}

impl BenchResult {
    pub fn from_samples(target: Target, volume: usize, op: Op, samples: &[Duration]) -> Option<Self> {
        let (mean_ms, p95_ms) = summarize(samples)?;
        Some(BenchResult {
            target,
            volume,
            op,
            mean_ms,
            p95_ms,
            samples: samples.len(),
        })
    }
}

/// Mean and nearest-rank 95th percentile in milliseconds.
pub fn summarize(samples: &[Duration]) -> Option<(f64, f64)> {
    if samples.is_empty() {
        return None;
    }
    let mut ms: Vec<f64> = samples.iter().map(|d| d.as_secs_f64() * 1e3).collect();
    ms.sort_by(f64::total_cmp);
    let mean = ms.iter().sum::<f64>() / ms.len() as f64;
    let rank = ((0.95 * ms.len() as f64).ceil() as usize).clamp(1, ms.len());
    Some((mean, ms[rank - 1]))
}

const GIVEN_NAMES: [&str; 24] = [
    "Aldric", "Brisa", "Cosmin", "Delphine", "Eamonn", "Faustina", "Gwyndor", "Halvard",
    "Isolde", "Jorunn", "Kasimir", "Liesel", "Marisol", "Nerys", "Odalric", "Perpetua",
    "Quintus", "Rosalind", "Sigrun", "Tiberio", "Ulrika", "Valerian", "Wilhelmina", "Yorick",
];
const FAMILY_NAMES: [&str; 24] = [
    "Ashdown", "Bellweather", "Corrigan", "Drummond", "Everleigh", "Fairbrother", "Gallowglass",
    "Hollingsworth", "Ingersoll", "Jessamine", "Kittredge", "Lockwood", "Merriweather",
    "Northcott", "Oakenshaw", "Pemberton", "Quarrington", "Ravenscroft", "Southwell",
    "Thistlewood", "Underhill", "Vandermeer", "Whitlock", "Yardley",
];
const STREETS: [&str; 12] = [
    "Brambleway", "Cinderhill Road", "Dovecote Lane", "Elmstead Row", "Foxglove Close",
    "Gorse Terrace", "Heathfield Mews", "Ivybridge Walk", "Juniper Court", "Kestrel Drive",
    "Lavender Yard", "Marigold Crescent",
];
const TOWNS: [&str; 8] = [
    "Ashbourne", "Blackmere", "Coldharbour", "Dunwich", "Eastbury", "Farleigh", "Glenholt",
    "Hartwell",
];
const COUNTRIES: [&str; 8] = [
    "Cyprus", "Greece", "Portugal", "Norway", "Chile", "Kenya", "Canada", "Japan",
];
const TESTS: [&str; 8] = [
    "hba1c=", "ldl=", "crp=", "tsh=", "ferritin=", "alt=", "egfr=", "psa=",
];

/// Deterministic stream of `n` schema-valid records with distinct ids.
///
/// Ids are 32 hex digits: 64 random bits followed by the 64-bit index, so
/// they are distinct by construction. Names and addresses use vocabularies
/// that never occur in the public fields.
pub fn generate_records(n: usize, seed: u64) -> impl Iterator<Item = EhrRecord> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    (0..n).map(move |i| {
        let id = format!("{:016x}{:016x}", rng.next_u64(), i as u64);
        let name = format!(
            "{} {} {}",
            GIVEN_NAMES.choose(&mut rng).expect("non-empty"),
            FAMILY_NAMES.choose(&mut rng).expect("non-empty"),
            FAMILY_NAMES.choose(&mut rng).expect("non-empty"),
        );
        let address = format!(
            "{} {}, {}",
            rng.gen_range(1..400),
            STREETS.choose(&mut rng).expect("non-empty"),
            TOWNS.choose(&mut rng).expect("non-empty"),
        );
        let date_of_birth = format!(
            "{:04}-{:02}-{:02}",
            rng.gen_range(1930..2015),
            rng.gen_range(1..=12),
            rng.gen_range(1..=28),
        );
        let test = format!(
            "{}{}.{}",
            TESTS.choose(&mut rng).expect("non-empty"),
            rng.gen_range(0..200),
            rng.gen_range(0..10)
        );
        EhrRecord {
            id,
            name,
            address,
            country: COUNTRIES.choose(&mut rng).expect("non-empty").to_string(),
            date_of_birth,
            test,
        }
    })
}

/// Instrumentation: how many transactions committed while ledger writes
/// were being timed.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct BenchCounters {
    pub ledger_timed_writes: u64,
    pub ledger_committed_during_timing: u64,
    pub failed_cells: u64,
}

trait Subject {
    fn insert(&mut self, records: &[EhrRecord]) -> Result<(), String>;
    fn insert_timed(&mut self, record: &EhrRecord) -> Result<Duration, String>;
    fn read_timed(&mut self, id: &str) -> Result<Duration, String>;
}

struct BaselineSubject(BaselineStore);

impl Subject for BaselineSubject {
    fn insert(&mut self, records: &[EhrRecord]) -> Result<(), String> {
        records
            .iter()
            .try_for_each(|r| self.0.insert_row(r))
            .map_err(|e| e.to_string())
    }

    fn insert_timed(&mut self, record: &EhrRecord) -> Result<Duration, String> {
        let start = Instant::now();
        self.0.insert_row(record).map_err(|e| e.to_string())?;
        Ok(start.elapsed())
    }

    fn read_timed(&mut self, id: &str) -> Result<Duration, String> {
        let start = Instant::now();
        let r = self.0.read_row(id).map_err(|e| e.to_string())?;
        let elapsed = start.elapsed();
        std::hint::black_box(r);
        Ok(elapsed)
    }
}

struct LedgerSubject<'c> {
    net: Network,
    writer: Client,
    reader: Client,
    counters: &'c mut BenchCounters,
}

impl LedgerSubject<'_> {
    fn new(seed: u64, counters: &mut BenchCounters) -> Result<LedgerSubject<'_>, NetworkError> {
        let mut net = Network::init(NetworkConfig::with_seed(seed))?;
        let writer = net.client("Healthcenter/registrar")?;
        let reader = net.client("Healthcenter/clinician")?;
        Ok(LedgerSubject {
            net,
            writer,
            reader,
            counters,
        })
    }
}

impl Subject for LedgerSubject<'_> {
    fn insert(&mut self, records: &[EhrRecord]) -> Result<(), String> {
        let block_size = self.net.ordering().block_size();
        self.net.set_block_size(BULK_BLOCK);
        self.net.set_commit_mode(CommitMode::Parallel);
        let result = (|| {
            for chunk in records.chunks(BULK_BLOCK) {
                let mut txs = Vec::with_capacity(chunk.len());
                for r in chunk {
                    txs.push(self.net.submit_proposal(&self.writer, &ChaincodeCall::Create(r.clone()))?);
                }
                for b in self.net.order_and_cut(txs) {
                    let commit = self.net.deliver_and_commit(&b)?;
                    if let Some(i) = commit.flags.iter().position(|f| !f.is_valid()) {
                        return Err(NetworkError::InvalidConfig(format!(
                            "bulk transaction {i} of block {} was flagged {:?}",
                            commit.number, commit.flags[i]
                        )));
                    }
                }
            }
            Ok(())
        })();
        self.net.set_block_size(block_size);
        self.net.set_commit_mode(CommitMode::Sequential);
        result.map_err(|e: NetworkError| e.to_string())
    }

    fn insert_timed(&mut self, record: &EhrRecord) -> Result<Duration, String> {
        let before = self.net.stats().txs_committed;
        let (receipt, elapsed) = self
            .net
            .execute_timed(&self.writer, &ChaincodeCall::Create(record.clone()))
            .map_err(|e| e.to_string())?;
        if !receipt.flag.is_valid() {
            return Err(format!("write flagged {:?}", receipt.flag));
        }
        self.counters.ledger_timed_writes += 1;
        self.counters.ledger_committed_during_timing += self.net.stats().txs_committed - before;
        Ok(elapsed)
    }

    fn read_timed(&mut self, id: &str) -> Result<Duration, String> {
        let start = Instant::now();
        let public = self
            .net
            .query(&self.reader, &ChaincodeCall::Read { id: id.to_string() })
            .map_err(|e| e.to_string())?;
        let private = self
            .net
            .query(&self.reader, &ChaincodeCall::ReadPrivate { id: id.to_string() })
            .map_err(|e| e.to_string())?;
        let elapsed = start.elapsed();
        std::hint::black_box((public, private));
        Ok(elapsed)
    }
}

fn bench_subject(
    target: Target,
    subject: &mut dyn Subject,
    plan: &BenchPlan,
    counters_failed: &mut u64,
    out: &mut Vec<BenchResult>,
) {
    let max = plan.volumes.last().copied().unwrap_or(0);
    let mut records = generate_records(max, plan.seed);
    let mut ids: Vec<String> = Vec::with_capacity(max);
    let mut pick = ChaCha20Rng::seed_from_u64(plan.seed ^ 0x5eed);
    let mut populated = 0usize;

    for &volume in &plan.volumes {
        let new_rows = volume - populated;
        let timed = new_rows.min(plan.reads_per_volume);
        let bulk: Vec<EhrRecord> = records.by_ref().take(new_rows - timed).collect();
        ids.extend(bulk.iter().map(|r| r.id.clone()));
        if let Err(e) = subject.insert(&bulk) {
            tracing::warn!(%target, volume, error = %e, "population failed; stopping target");
            *counters_failed += 1;
            return;
        }
        let mut writes = Vec::with_capacity(timed);
        let mut write_failed = false;
        for r in records.by_ref().take(timed) {
            ids.push(r.id.clone());
            match subject.insert_timed(&r) {
                Ok(d) => writes.push(d),
                Err(e) => {
                    tracing::warn!(%target, volume, error = %e, "timed write failed");
                    write_failed = true;
                }
            }
        }
        populated = volume;
        if write_failed {
            *counters_failed += 1;
        } else if let Some(r) = BenchResult::from_samples(target, volume, Op::Write, &writes) {
            out.push(r);
        }

        let mut reads = Vec::with_capacity(plan.reads_per_volume);
        let mut read_failed = false;
        for i in 0..plan.warmup + plan.reads_per_volume {
            let id = &ids[pick.gen_range(0..ids.len())];
            match subject.read_timed(id) {
                Ok(d) if i >= plan.warmup => reads.push(d),
                Ok(_) => {}
                Err(e) => {
                    tracing::warn!(%target, volume, error = %e, "timed read failed");
                    read_failed = true;
                    break;
                }
            }
        }
        if read_failed {
            *counters_failed += 1;
        } else if let Some(r) = BenchResult::from_samples(target, volume, Op::Read, &reads) {
            out.push(r);
        }
        tracing::info!(%target, volume, "cell done");
    }
}

/// Runs `plan`, returning rows sorted by (target, volume, op).
pub fn run_bench(plan: &BenchPlan) -> Result<Vec<BenchResult>, BenchError> {
    run_bench_counted(plan, &mut BenchCounters::default())
}

pub fn run_bench_counted(
    plan: &BenchPlan,
    counters: &mut BenchCounters,
) -> Result<Vec<BenchResult>, BenchError> {
    plan.validate()?;
    let mut out = Vec::new();
    let mut targets = plan.targets.clone();
    targets.sort();
    targets.dedup();
    for target in targets {
        match target {
            Target::Baseline => {
                let mut s = BaselineSubject(BaselineStore::from_seed(plan.seed));
                bench_subject(target, &mut s, plan, &mut counters.failed_cells, &mut out);
            }
            Target::Ledger => {
                let mut failed = 0;
                match LedgerSubject::new(plan.seed, counters) {
                    Ok(mut s) => bench_subject(target, &mut s, plan, &mut failed, &mut out),
                    Err(e) => {
                        tracing::warn!(error = %e, "ledger setup failed");
                        failed += 1;
                    }
                }
                counters.failed_cells += failed;
            }
        }
    }
    out.sort_by(|a, b| (a.target, a.volume, a.op).cmp(&(b.target, b.volume, b.op)));
    Ok(out)
}

pub fn write_csv<W: Write>(results: &[BenchResult], out: W) -> Result<(), BenchError> {
    let mut w = csv::Writer::from_writer(out);
    if results.is_empty() {
        w.write_record(CSV_HEADER.split(','))?;
    }
    for r in results {
        w.serialize(r)?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn to_csv(results: &[BenchResult]) -> String {
    let mut buf = Vec::new();
    write_csv(results, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("csv is utf-8")
}

pub fn read_csv<R: Read>(input: R) -> Result<Vec<BenchResult>, BenchError> {
    let mut r = csv::Reader::from_reader(input);
    let header = r.headers()?.iter().collect::<Vec<_>>().join(",");
    if header != CSV_HEADER {
        return Err(BenchError::Header(header));
    }
    r.deserialize().map(|row| row.map_err(BenchError::from)).collect()
}

/// Least-squares line `y = slope·x + intercept`; `None` with fewer than two
/// distinct x values.
pub fn fit_line(points: &[(f64, f64)]) -> Option<(f64, f64)> {
    let n = points.len() as f64;
    if points.len() < 2 {
        return None;
    }
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    Some((slope, my - slope * mx))
}

/// Volume at which a linear baseline read cost reaches a constant ledger
/// read cost. `None` when the baseline does not grow or the crossing is not
/// at a positive volume.
pub fn crossover(baseline_reads: &[(f64, f64)], ledger_read_ms: f64) -> Option<f64> {
    let (slope, intercept) = fit_line(baseline_reads)?;
    if !(slope > 0.0) {
        return None;
    }
    let v = (ledger_read_ms - intercept) / slope;
    (v.is_finite() && v > 0.0).then_some(v)
}

/// One published reference row: mean milliseconds per volume.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferenceRow {
    pub system: &'static str,
    pub op: Op,
    pub ms: [f64; 6],
}

/// Published query times over the volumes in [`FULL_VOLUMES`].
pub const REFERENCE_TABLE: [ReferenceRow; 8] = [
    ReferenceRow { system: "prehealth", op: Op::Read, ms: [183.0; 6] },
    ReferenceRow { system: "prehealth", op: Op::Write, ms: [58.0; 6] },
    ReferenceRow { system: "postgres", op: Op::Read, ms: [1.73, 1.79, 2.38, 8.76, 43.52, 136.19] },
    ReferenceRow { system: "postgres", op: Op::Write, ms: [4.32, 4.48, 4.47, 4.37, 4.39, 4.45] },
    ReferenceRow { system: "medrec", op: Op::Read, ms: [177.0, 186.0, 194.0, 199.0, 205.0, 210.0] },
    ReferenceRow { system: "medrec", op: Op::Write, ms: [81.5, 86.9, 79.6, 71.6, 63.2, 79.6] },
    ReferenceRow { system: "blockstack", op: Op::Read, ms: [360.0; 6] },
    ReferenceRow { system: "blockstack", op: Op::Write, ms: [530.0; 6] },
];

fn reference(system: &str, op: Op) -> &'static ReferenceRow {
    REFERENCE_TABLE
        .iter()
        .find(|r| r.system == system && r.op == op)
        .expect("reference row exists")
}

/// Crossover computed from the published numbers: postgres reads fitted
/// linearly against the constant prehealth read time.
pub fn reference_crossover() -> Option<f64> {
    let pg = reference("postgres", Op::Read);
    let points: Vec<(f64, f64)> = FULL_VOLUMES
        .iter()
        .zip(pg.ms)
        .map(|(&v, ms)| (v as f64, ms))
        .collect();
    crossover(&points, reference("prehealth", Op::Read).ms[0])
}

#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    /// Mean of the ledger's per-volume read means.
    pub ledger_read_ms: Option<f64>,
    /// Slope and intercept of baseline reads against volume.
    pub baseline_fit: Option<(f64, f64)>,
    /// `None` unless both targets have read rows and the fit crosses.
    pub crossover: Option<f64>,
    pub reference_crossover: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub csv: String,
    pub summary: Summary,
    pub text: String,
}

pub fn summarize_results(results: &[BenchResult], with_reference: bool) -> Summary {
    let reads = |t: Target| -> Vec<&BenchResult> {
        results.iter().filter(|r| r.target == t && r.op == Op::Read).collect()
    };
    let ledger = reads(Target::Ledger);
    let baseline: Vec<(f64, f64)> = reads(Target::Baseline)
        .iter()
        .map(|r| (r.volume as f64, r.mean_ms))
        .collect();
    let ledger_read_ms = (!ledger.is_empty())
        .then(|| ledger.iter().map(|r| r.mean_ms).sum::<f64>() / ledger.len() as f64);
    let baseline_fit = fit_line(&baseline);
    let crossover = match (ledger_read_ms, baseline.is_empty()) {
        (Some(c), false) => crossover(&baseline, c),
        _ => None,
    };
    Summary {
        ledger_read_ms,
        baseline_fit,
        crossover,
        reference_crossover: with_reference.then(reference_crossover).flatten(),
    }
}

pub fn report(results: &[BenchResult], with_reference: bool) -> Report {
    use std::fmt::Write as _;
    let summary = summarize_results(results, with_reference);
    let mut text = String::new();
    let fmt_opt = |v: Option<f64>, unit: &str| match v {
        Some(v) => format!("{v:.3}{unit}"),
        None => "none".to_string(),
    };
    writeln!(text, "ledger read (mean over volumes): {}", fmt_opt(summary.ledger_read_ms, " ms")).ok();
    match summary.baseline_fit {
        Some((a, b)) => writeln!(text, "baseline read fit: {a:.6e} ms/record + {b:.3} ms").ok(),
        None => writeln!(text, "baseline read fit: none").ok(),
    };
    writeln!(
        text,
        "read crossover: {}",
        summary
            .crossover
            .map_or("none".to_string(), |v| format!("{v:.0} records"))
    )
    .ok();
    if with_reference {
        writeln!(text, "reference table (ms) at volumes {FULL_VOLUMES:?}:").ok();
        for r in &REFERENCE_TABLE {
            let op = match r.op {
                Op::Read => "read",
                Op::Write => "write",
            };
            writeln!(text, "  {:<10} {:<5} {:?}", r.system, op, r.ms).ok();
        }
        writeln!(
            text,
            "reference read crossover: {}",
            summary
                .reference_crossover
                .map_or("none".to_string(), |v| format!("{v:.0} records"))
        )
        .ok();
    }
    Report {
        csv: to_csv(results),
        summary,
        text,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn records_deterministic_and_valid() {
        let a: Vec<_> = generate_records(10, 42).collect();
        let b: Vec<_> = generate_records(10, 42).collect();
        assert_eq!(a, b);
        assert!(a.iter().all(|r| r.validate().is_ok()));
        assert_eq!(generate_records(0, 1).count(), 0);
        assert_ne!(a, generate_records(10, 43).collect::<Vec<_>>());
    }

    #[test]
    fn ids_distinct() {
        let ids: HashSet<String> = generate_records(100_000, 42).map(|r| r.id).collect();
        assert_eq!(ids.len(), 100_000);
    }

    #[test]
    fn private_vocab_disjoint_from_public_fields() {
        for w in GIVEN_NAMES.iter().chain(&FAMILY_NAMES).chain(&STREETS).chain(&TOWNS) {
            for p in COUNTRIES.iter().chain(&TESTS) {
                assert!(!p.contains(w) && !w.contains(p), "{w} / {p}");
            }
        }
    }

    #[test]
    fn percentile_nearest_rank() {
        let s: Vec<Duration> = (1..=100).map(Duration::from_millis).collect();
        let (mean, p95) = summarize(&s).unwrap();
        assert!((mean - 50.5).abs() < 1e-9);
        assert!((p95 - 95.0).abs() < 1e-9);
        assert_eq!(summarize(&[]), None);
        let (m, p) = summarize(&[Duration::from_millis(7)]).unwrap();
        assert_eq!((m, p), (7.0, 7.0));
    }

    #[test]
    fn plan_validation() {
        assert!(BenchPlan::default().validate().is_ok());
        let bad = BenchPlan {
            volumes: vec![10, 10],
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let bad = BenchPlan {
            reads_per_volume: 0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn empty_targets_empty_results() {
        let plan = BenchPlan {
            targets: vec![],
            ..Default::default()
        };
        assert!(run_bench(&plan).unwrap().is_empty());
    }

    #[test]
    fn small_run_shapes() {
        let plan = BenchPlan {
            volumes: vec![10, 50],
            reads_per_volume: 15,
            warmup: 2,
            ..Default::default()
        };
        let mut counters = BenchCounters::default();
        let rows = run_bench_counted(&plan, &mut counters).unwrap();
        let keys: Vec<_> = rows.iter().map(|r| (r.target, r.volume, r.op, r.samples)).collect();
        assert_eq!(
            keys,
            [
                (Target::Ledger, 10, Op::Read, 15),
                (Target::Ledger, 10, Op::Write, 10),
                (Target::Ledger, 50, Op::Read, 15),
                (Target::Ledger, 50, Op::Write, 15),
                (Target::Baseline, 10, Op::Read, 15),
                (Target::Baseline, 10, Op::Write, 10),
                (Target::Baseline, 50, Op::Read, 15),
                (Target::Baseline, 50, Op::Write, 15),
            ]
        );
        assert_eq!(counters.ledger_timed_writes, 25);
        assert_eq!(counters.ledger_committed_during_timing, 25);
        assert_eq!(counters.failed_cells, 0);
    }

    #[test]
    fn csv_roundtrip() {
        let rows = vec![
            BenchResult {
                target: Target::Baseline,
                volume: 1000,
                op: Op::Read,
                mean_ms: 0.1 + 0.2,
                p95_ms: 1.0 / 3.0,
                samples: 200,
            },
            BenchResult {
                target: Target::Ledger,
                volume: 10,
                op: Op::Write,
                mean_ms: 12.5,
                p95_ms: 1e-7,
                samples: 10,
            },
        ];
        let text = to_csv(&rows);
        assert!(text.starts_with(&format!("{CSV_HEADER}\n")));
        assert_eq!(read_csv(text.as_bytes()).unwrap(), rows);
        assert_eq!(to_csv(&[]), format!("{CSV_HEADER}\n"));
        assert!(matches!(read_csv("a,b\n".as_bytes()), Err(BenchError::Header(_))));
    }

    #[test]
    fn crossover_on_synthetic_lines() {
        for (a, b, c) in [(1e-4, 2.0, 183.0), (3.5e-3, 0.5, 40.0), (2.0, -7.0, 11.0)] {
            let pts: Vec<(f64, f64)> = [10.0, 100.0, 1e3, 1e4, 1e5]
                .iter()
                .map(|&v| (v, a * v + b))
                .collect();
            let want = (c - b) / a;
            let got = crossover(&pts, c).unwrap();
            assert!(((got - want) / want).abs() < 0.01, "{got} vs {want}");
        }
    }

    #[test]
    fn crossover_degenerate() {
        let flat: Vec<(f64, f64)> = [10.0, 100.0, 1000.0].iter().map(|&v| (v, 183.0)).collect();
        assert_eq!(crossover(&flat, 183.0), None);
        let falling = [(10.0, 5.0), (100.0, 1.0)];
        assert_eq!(crossover(&falling, 3.0), None);
        // Already above the ledger at volume zero.
        assert_eq!(crossover(&[(10.0, 200.0), (20.0, 210.0)], 183.0), None);
        assert_eq!(crossover(&[(10.0, 1.0)], 183.0), None);
    }

    #[test]
    fn single_target_has_no_crossover() {
        let rows = vec![BenchResult {
            target: Target::Baseline,
            volume: 10,
            op: Op::Read,
            mean_ms: 1.0,
            p95_ms: 1.0,
            samples: 1,
        }];
        let r = report(&rows, false);
        assert_eq!(r.summary.crossover, None);
        assert!(r.text.contains("read crossover: none"));
    }
}
