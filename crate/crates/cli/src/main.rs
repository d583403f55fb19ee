//! `medledger`: benchmark harness and network simulator front end.
//!
//! `net init` stores a network config under the state directory
//! (`$MEDLEDGER_HOME`, default `./.medledger`). Each `tx` rebuilds the network
//! from that config, replays the logged transactions and then runs the new
//! call; since every source of randomness is seeded the replay reproduces the
//! same chain.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use medledger::bench::{self, BenchPlan, Target, DEFAULT_VOLUMES, FULL_VOLUMES};
use medledger::network::{Network, NetworkConfig, WorkloadOp};
use serde_json::json;

const HOME_VAR: &str = "MEDLEDGER_HOME";
const CONFIG_FILE: &str = "network.json";
const LOG_FILE: &str = "txlog.jsonl";

#[derive(Parser)]
#[command(name = "medledger", version, about = "Health-record ledger simulator and benchmark harness")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Latency benchmarks.
    #[command(subcommand)]
    Bench(BenchCommand),
    /// Simulated network management.
    #[command(subcommand)]
    Net(NetCommand),
    /// Submit a chaincode call to the initialized network.
    Tx(TxArgs),
}

#[derive(Subcommand)]
enum BenchCommand {
    /// Populate each target across the volume ladder and time reads and writes.
    Run(BenchRunArgs),
    /// Summarize a results CSV, including the read-latency crossover.
    Report(BenchReportArgs),
}

#[derive(Args)]
struct BenchRunArgs {
    /// Comma-separated subset of ledger,baseline.
    #[arg(long, value_delimiter = ',', default_value = "ledger,baseline")]
    targets: Vec<String>,
    /// Comma-separated, strictly increasing record counts.
    #[arg(long, value_delimiter = ',')]
    volumes: Option<Vec<usize>>,
    /// Use the full ladder up to 1,000,000 records.
    #[arg(long, conflicts_with = "volumes")]
    full: bool,
    #[arg(long, default_value_t = 200)]
    reads: usize,
    #[arg(long, default_value_t = 20)]
    warmup: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Output CSV; relative paths resolve against the state directory.
    #[arg(long, default_value = "results.csv")]
    out: PathBuf,
}

#[derive(Args)]
struct BenchReportArgs {
    #[arg(long = "in")]
    input: PathBuf,
    /// Also print the published reference table and its crossover.
    #[arg(long)]
    reference: bool,
}

#[derive(Subcommand)]
enum NetCommand {
    /// Validate and store a network config; clears the transaction log.
    Init {
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum TxOp {
    Create,
    Read,
    ReadPrivate,
    Update,
    Delete,
}

impl TxOp {
    fn name(self) -> &'static str {
        match self {
            TxOp::Create => "create",
            TxOp::Read => "read",
            TxOp::ReadPrivate => "read-private",
            TxOp::Update => "update",
            TxOp::Delete => "delete",
        }
    }
}

#[derive(Args)]
struct TxArgs {
    op: TxOp,
    /// `Org/subject`, `anon`, `anon:Org` or `anon:Org/subject`.
    #[arg(long)]
    client: String,
    /// JSON arguments: a full record for create, `{"id": ...}` otherwise,
    /// plus changed fields for update.
    #[arg(long)]
    args: String,
}

fn home() -> PathBuf {
    std::env::var_os(HOME_VAR)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(".medledger"))
}

fn resolve(path: &Path) -> PathBuf {
    if path.is_absolute() {
        path.to_path_buf()
    } else {
        home().join(path)
    }
}

fn bench_run(a: BenchRunArgs) -> Result<()> {
    let targets = a
        .targets
        .iter()
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<Target>())
        .collect::<Result<Vec<_>, _>>()?;
    let volumes = match (a.volumes, a.full) {
        (Some(v), _) => v,
        (None, true) => FULL_VOLUMES.to_vec(),
        (None, false) => DEFAULT_VOLUMES.to_vec(),
    };
    let plan = BenchPlan {
        targets,
        volumes,
        reads_per_volume: a.reads,
        warmup: a.warmup,
        seed: a.seed,
    };
    let mut counters = bench::BenchCounters::default();
    let results = bench::run_bench_counted(&plan, &mut counters)?;
    let out = resolve(&a.out);
    if let Some(dir) = out.parent() {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    let file = fs::File::create(&out).with_context(|| format!("creating {}", out.display()))?;
    bench::write_csv(&results, BufWriter::new(file))?;
    print!("{}", bench::to_csv(&results));
    eprintln!("wrote {} rows to {}", results.len(), out.display());
    if counters.failed_cells > 0 {
        bail!("{} benchmark cells failed", counters.failed_cells);
    }
    Ok(())
}

fn bench_report(a: BenchReportArgs) -> Result<()> {
    let path = resolve(&a.input);
    let file = fs::File::open(&path).with_context(|| format!("opening {}", path.display()))?;
    let results = bench::read_csv(file)?;
    let r = bench::report(&results, a.reference);
    print!("{}{}", r.csv, r.text);
    Ok(())
}

fn net_init(config: Option<PathBuf>) -> Result<()> {
    let cfg: NetworkConfig = match &config {
        Some(p) => {
            let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            serde_json::from_str(&text).with_context(|| format!("parsing {}", p.display()))?
        }
        None => NetworkConfig::default(),
    };
    let net = Network::init(cfg.clone())?;
    let dir = home();
    fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    fs::write(dir.join(CONFIG_FILE), serde_json::to_string_pretty(&cfg)?)?;
    fs::write(dir.join(LOG_FILE), "")?;
    let genesis = &net.peers()[0].chain().blocks()[0];
    let summary = json!({
        "orgs": cfg.orgs,
        "peers": net.peers().len(),
        "orderers": net.orderers().len(),
        "privateStores": net.peers().iter().filter(|p| p.private_store().is_some()).count(),
        "genesisHash": genesis.hash().to_hex(),
    });
    println!("{}", serde_json::to_string_pretty(&summary)?);
    Ok(())
}

fn load_network() -> Result<(Network, Vec<WorkloadOp>)> {
    let dir = home();
    let text = fs::read_to_string(dir.join(CONFIG_FILE))
        .with_context(|| format!("no network in {}; run `net init` first", dir.display()))?;
    let cfg: NetworkConfig = serde_json::from_str(&text)?;
    let mut net = Network::init(cfg)?;
    let log = fs::read_to_string(dir.join(LOG_FILE)).unwrap_or_default();
    let ops = medledger::network::parse_script(&log)?;
    for (i, op) in ops.iter().enumerate() {
        let call = op
            .to_call()
            .map_err(anyhow::Error::msg)?
            .context("logged op is not a call")?;
        let client = net.client(&op.client)?;
        net.execute(&client, &call)
            .with_context(|| format!("replaying logged transaction {}", i + 1))?;
    }
    Ok((net, ops))
}

fn tx(a: TxArgs) -> Result<()> {
    let args: serde_json::Value = serde_json::from_str(&a.args).context("--args is not JSON")?;
    let op = WorkloadOp::new(a.op.name(), &a.client, args);
    let call = op.to_call().map_err(anyhow::Error::msg)?.context("not a call")?;
    let (mut net, _) = load_network()?;
    let client = net.client(&a.client)?;
    if call.is_query() {
        let response = net.query(&client, &call)?;
        let value: serde_json::Value = serde_json::from_slice(&response)?;
        println!("{}", serde_json::to_string_pretty(&value)?);
        return Ok(());
    }
    let receipt = net.execute(&client, &call)?;
    let mut log = fs::OpenOptions::new()
        .append(true)
        .create(true)
        .open(home().join(LOG_FILE))?;
    writeln!(log, "{}", serde_json::to_string(&op)?)?;
    println!(
        "{}",
        serde_json::to_string_pretty(&json!({
            "txId": receipt.tx_id.to_hex(),
            "block": receipt.block,
            "flag": receipt.flag,
        }))?
    );
    if !receipt.flag.is_valid() {
        bail!("transaction was committed as {:?}", receipt.flag);
    }
    Ok(())
}

fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env()
                .unwrap_or_else(|_| tracing_subscriber::EnvFilter::new("warn")),
        )
        .with_writer(std::io::stderr)
        .init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Bench(BenchCommand::Run(a)) => bench_run(a),
        Command::Bench(BenchCommand::Report(a)) => bench_report(a),
        Command::Net(NetCommand::Init { config }) => net_init(config),
        Command::Tx(a) => tx(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
