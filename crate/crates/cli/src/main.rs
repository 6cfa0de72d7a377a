use std::ffi::OsString;
use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, CommandFactory, Parser, Subcommand};
use hashlane::encoders::EncoderKind;

mod commands;
mod config;

/// Binary-hashing nearest neighbour index: generate data, train encoders,
/// build multi-table indexes and benchmark them against brute force.
#[derive(Debug, Parser)]
#[command(name = "hashlane", version)]
struct Cli {
    /// key=value file supplying defaults for the subcommand's flags
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Cmd,
}

#[derive(Debug, Clone, Args)]
pub struct Output {
    /// Output root; the run directory beneath it is named by a hash of the
    /// other flags [default: $HASHLANE_OUT, else ./hashlane-out]
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Subcommand)]
enum Cmd {
    /// Write synthetic gaussian clusters (base.fset, queries.fset, predictions.fset)
    #[command(args_override_self = true)]
    Gen(GenArgs),
    /// Train one encoder per table with seeds seed..seed+T-1 (model_NNN.hmdl)
    #[command(args_override_self = true)]
    Train(TrainArgs),
    /// Encode a feature set with every model (codes_NNN.cset)
    #[command(args_override_self = true)]
    Encode(EncodeArgs),
    /// Build a multi-table index from code sets (index.hidx)
    #[command(args_override_self = true)]
    Build(BuildArgs),
    /// Sweep pool sizes and write sweep.csv and radius.csv
    #[command(args_override_self = true)]
    Bench(BenchArgs),
    /// Exact brute-force precision (oracle.csv)
    #[command(args_override_self = true)]
    Oracle(OracleArgs),
    /// Bucket occupancy of an index and/or a code-length study
    #[command(args_override_self = true)]
    Stats(StatsArgs),
}

impl Cmd {
    fn name(&self) -> &'static str {
        match self {
            Cmd::Gen(_) => "gen",
            Cmd::Train(_) => "train",
            Cmd::Encode(_) => "encode",
            Cmd::Build(_) => "build",
            Cmd::Bench(_) => "bench",
            Cmd::Oracle(_) => "oracle",
            Cmd::Stats(_) => "stats",
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct GenArgs {
    #[arg(long, default_value_t = 10)]
    pub clusters: usize,
    #[arg(long, default_value_t = 100)]
    pub per_cluster: usize,
    #[arg(long, default_value_t = 16)]
    pub dim: usize,
    /// Per-coordinate standard deviation around each centre
    #[arg(long, default_value_t = 0.05)]
    pub spread: f32,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Held-out queries per cluster; 0 writes no query file
    #[arg(long, default_value_t = 10)]
    pub queries_per_cluster: usize,
    /// Also write stub classifier predictions for the queries with this accuracy
    #[arg(long)]
    pub accuracy: Option<f64>,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Clone, Args)]
pub struct TrainArgs {
    #[arg(long, value_parser = EncoderKind::from_str)]
    pub method: EncoderKind,
    /// Code length l (1..=64)
    #[arg(long)]
    pub bits: u32,
    #[arg(long, default_value_t = 1)]
    pub tables: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Training features (lsh, isoh); for crc, labels give the class count
    #[arg(long)]
    pub features: Option<PathBuf>,
    /// Class count for crc
    #[arg(long)]
    pub classes: Option<u32>,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Clone, Args)]
pub struct EncodeArgs {
    /// A model file or a directory of *.hmdl files
    #[arg(long)]
    pub models: PathBuf,
    #[arg(long)]
    pub features: Option<PathBuf>,
    /// crc only: code by these labels instead of the features' labels
    #[arg(long)]
    pub predictions: Option<PathBuf>,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Clone, Args)]
pub struct BuildArgs {
    /// A code file or a directory of *.cset files (one table each)
    #[arg(long)]
    pub codes: PathBuf,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Clone, Args)]
pub struct BenchArgs {
    #[arg(long)]
    pub index: PathBuf,
    /// Labelled base features the index was built from
    #[arg(long)]
    pub features: PathBuf,
    /// Labelled queries
    #[arg(long)]
    pub queries: PathBuf,
    /// A model file or a directory of *.hmdl files, one per table
    #[arg(long)]
    pub models: PathBuf,
    /// crc only: predicted query labels
    #[arg(long)]
    pub predictions: Option<PathBuf>,
    #[arg(long, default_value_t = 10)]
    pub k: usize,
    /// Comma-separated ascending pool sizes [default: K, 2K, 4K, ... capped at n]
    #[arg(long)]
    pub pools: Option<PoolList>,
    /// Shard queries over N workers; times are then not comparable to sequential runs
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..))]
    pub parallel: u32,
    /// Append a brute-force row to sweep.csv
    #[arg(long)]
    pub brute_force: bool,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Clone, Args)]
pub struct OracleArgs {
    #[arg(long)]
    pub features: PathBuf,
    #[arg(long)]
    pub queries: PathBuf,
    #[arg(long, default_value_t = 10)]
    pub k: usize,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Clone, Args)]
pub struct StatsArgs {
    /// Index to summarise (buckets.csv)
    #[arg(long)]
    pub index: Option<PathBuf>,
    /// Code lengths for the locating study (code_length.csv), e.g. 16,24,32
    #[arg(long)]
    pub lengths: Option<PoolList>,
    #[arg(long)]
    pub features: Option<PathBuf>,
    #[arg(long)]
    pub queries: Option<PathBuf>,
    #[arg(long, default_value = "lsh", value_parser = EncoderKind::from_str)]
    pub method: EncoderKind,
    #[arg(long, default_value_t = 100)]
    pub pool: usize,
    #[arg(long, default_value_t = 1)]
    pub tables: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub output: Output,
}

/// Comma-separated list of positive integers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PoolList(pub Vec<usize>);

impl FromStr for PoolList {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let values = s
            .split(',')
            .map(|p| match p.trim().parse::<usize>() {
                Ok(0) | Err(_) => Err(format!("{p:?} is not a positive integer")),
                Ok(v) => Ok(v),
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(PoolList(values))
    }
}

/// A failure reported as `error: kind=<kind> msg=<msg>` on stderr.
#[derive(Debug)]
pub struct Failure {
    pub kind: &'static str,
    pub msg: String,
    pub status: u8,
}

impl Failure {
    pub fn new(kind: &'static str, msg: impl Into<String>) -> Self {
        Failure {
            kind,
            msg: msg.into(),
            status: 1,
        }
    }

    /// Prefixes the message with where it happened, e.g. a file path.
    pub fn at(mut self, place: impl fmt::Display) -> Self {
        self.msg = format!("{place}: {}", self.msg);
        self
    }
}

impl From<hashlane::Error> for Failure {
    fn from(e: hashlane::Error) -> Self {
        Failure::new(e.code(), e.to_string())
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let msg = self.msg.split_whitespace().collect::<Vec<_>>().join(" ");
        write!(f, "error: kind={} msg={msg}", self.kind)
    }
}

fn usage(e: clap::Error) -> Failure {
    let text = e.to_string();
    let line = text
        .lines()
        .find(|l| !l.trim().is_empty())
        .unwrap_or("invalid arguments")
        .trim_start_matches("error: ");
    Failure {
        kind: "usage",
        msg: line.to_string(),
        status: 2,
    }
}

/// The config path and subcommand name, found without validating anything else.
fn prescan(args: &[OsString]) -> (Option<PathBuf>, Option<String>) {
    let mut config = None;
    let mut sub = None;
    let mut it = args.iter().skip(1);
    while let Some(a) = it.next() {
        let s = a.to_string_lossy();
        if s == "--config" {
            config = it.next().map(PathBuf::from);
        } else if let Some(p) = s.strip_prefix("--config=") {
            config = Some(PathBuf::from(p));
        } else if sub.is_none() && !s.starts_with('-') {
            sub = Some(s.into_owned());
        }
    }
    (config, sub)
}

fn parse(args: Vec<OsString>) -> Result<Option<Cli>, Failure> {
    let args = match prescan(&args) {
        (Some(path), Some(name)) => match Cli::command().find_subcommand(&name) {
            Some(sub) => {
                let flags = config::to_flags(sub, &config::load(&path)?)?;
                config::splice(&args, &name, flags)
            }
            None => args,
        },
        _ => args,
    };
    match Cli::try_parse_from(args) {
        Ok(cli) => Ok(Some(cli)),
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            Ok(None)
        }
        Err(e) => Err(usage(e)),
    }
}

fn run(args: Vec<OsString>) -> Result<(), Failure> {
    let Some(cli) = parse(args)? else {
        return Ok(());
    };
    let name = cli.command.name();
    let dir = match cli.command {
        Cmd::Gen(a) => commands::gen(name, a),
        Cmd::Train(a) => commands::train(name, a),
        Cmd::Encode(a) => commands::encode(name, a),
        Cmd::Build(a) => commands::build(name, a),
        Cmd::Bench(a) => commands::bench(name, a),
        Cmd::Oracle(a) => commands::oracle(name, a),
        Cmd::Stats(a) => commands::stats(name, a),
    }?;
    println!("{}", dir.display());
    Ok(())
}

fn main() -> ExitCode {
    match run(std::env::args_os().collect()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("{f}");
            ExitCode::from(f.status)
        }
    }
}
