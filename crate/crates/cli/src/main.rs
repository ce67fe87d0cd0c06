//! `diqkd`: key-length studies, reconciliation benchmarks, extractor runs and
//! protocol simulations.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

mod cmd;
mod config;

use config::{ConfigFile, Count, Fraction, Resolver};

pub const EXIT_OK: u8 = 0;
pub const EXIT_NO_KEY: u8 = 2;
pub const EXIT_ABORT: u8 = 3;
pub const EXIT_USAGE: u8 = 64;
pub const EXIT_SOFTWARE: u8 = 70;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("transport: {0}")]
    Transport(String),
    #[error("{0}")]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    K0(#[from] diqkd_core::hashing::K0Error),
    #[error(transparent)]
    Protocol(#[from] diqkd_core::protocol::ProtocolError),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            _ => EXIT_SOFTWARE,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "diqkd", version, about = "DIQKD post-processing toolkit")]
struct Cli {
    #[command(flatten)]
    shared: Shared,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
pub struct Shared {
    /// Master seed; every random choice derives from it.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory for artifacts.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// `key = value` file; flags take precedence over it.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Finite-size secure key length with optimised security parameters.
    Keylen(KeylenArgs),
    /// Full protocol run, in process or as one party over TCP.
    Run(RunArgs),
    /// Reconciliation success rate over a grid of overheads.
    EcBench(EcBenchArgs),
    /// Trevisan extraction of a packed-bit source.
    Extract(ExtractArgs),
    /// Almost-Δ-universal hash / Wegman-Carter tag of a message.
    Hash(HashArgs),
}

#[derive(Debug, Args)]
pub struct KeylenArgs {
    #[arg(long)]
    pub n: Option<Count>,
    /// Test-round probability as NUM/DEN.
    #[arg(long)]
    pub gamma: Option<Fraction>,
    #[arg(long = "S")]
    pub s: Option<f64>,
    #[arg(long = "Q")]
    pub q: Option<f64>,
    #[arg(long)]
    pub eps_snd: Option<f64>,
    /// Overrides the completeness threshold.
    #[arg(long)]
    pub omega_thresh: Option<f64>,
    /// Overrides the syndrome length.
    #[arg(long)]
    pub m: Option<Count>,
    #[arg(long)]
    pub starts: Option<usize>,
    #[arg(long)]
    pub max_evals: Option<usize>,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// alice or bob; only used with the TCP transport.
    #[arg(long)]
    pub role: Option<String>,
    /// inproc or tcp.
    #[arg(long)]
    pub transport: Option<String>,
    #[arg(long, conflicts_with = "connect")]
    pub listen: Option<String>,
    #[arg(long)]
    pub connect: Option<String>,
    /// Pre-shared key file; generated from the seed when absent.
    #[arg(long)]
    pub k0: Option<PathBuf>,
    /// e.g. flip-syndrome-bit:1000
    #[arg(long)]
    pub fault: Option<String>,
    #[arg(long)]
    pub n: Option<Count>,
    #[arg(long)]
    pub gamma: Option<Fraction>,
    #[arg(long = "S")]
    pub s: Option<f64>,
    #[arg(long = "Q")]
    pub q: Option<f64>,
    #[arg(long)]
    pub eps_snd: Option<f64>,
    /// Demonstration key length; runs above the certified length are
    /// flagged `certified=false`.
    #[arg(long)]
    pub ell: Option<Count>,
    /// Simulated devices: `S,Q` or `measured`; defaults to the design S,Q.
    #[arg(long)]
    pub device: Option<String>,
    /// Receive timeout in seconds.
    #[arg(long)]
    pub timeout: Option<u64>,
}

#[derive(Debug, Args)]
pub struct EcBenchArgs {
    #[arg(long)]
    pub n: Option<Count>,
    #[arg(long)]
    pub gamma: Option<Fraction>,
    #[arg(long = "S")]
    pub s: Option<f64>,
    #[arg(long = "Q")]
    pub q: Option<f64>,
    /// Overheads m/n as lo:hi:step.
    #[arg(long)]
    pub eta_grid: Option<String>,
    #[arg(long)]
    pub trials: Option<u64>,
    #[arg(long)]
    pub max_iters: Option<usize>,
}

#[derive(Debug, Args)]
pub struct ExtractArgs {
    /// Packed-bit source file.
    #[arg(long, conflicts_with = "source_hex")]
    pub source: Option<PathBuf>,
    #[arg(long)]
    pub source_hex: Option<String>,
    /// Packed-bit seed file; generated from --seed when neither seed option is given.
    #[arg(long, conflicts_with = "seed_hex")]
    pub seed_file: Option<PathBuf>,
    #[arg(long)]
    pub seed_hex: Option<String>,
    #[arg(long)]
    pub ell: Option<Count>,
    #[arg(long)]
    pub eps_pa: Option<f64>,
    /// Explicit even `t` instead of the one derived from eps-pa (toy runs).
    #[arg(long)]
    pub t: Option<usize>,
}

#[derive(Debug, Args)]
pub struct HashArgs {
    #[arg(long, conflicts_with = "message_hex")]
    pub message: Option<PathBuf>,
    /// Message bytes in hex.
    #[arg(long)]
    pub message_hex: Option<String>,
    /// Take the hash seed from a K0 file instead of --seed.
    #[arg(long)]
    pub k0: Option<PathBuf>,
    /// 64-bit one-time pad in hex; the plain hash when absent.
    #[arg(long)]
    pub pad: Option<String>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn dispatch(cli: Cli) -> Result<u8, CliError> {
    let file = match &cli.shared.config {
        Some(p) => ConfigFile::load(p)?,
        None => ConfigFile::default(),
    };
    let mut r = Resolver::new(file);
    let seed = r.get("seed", cli.shared.seed, 0)?;
    let out = PathBuf::from(r.get("out", cli.shared.out.as_ref().map(|p| p.display().to_string()), "out".into())?);
    let ctx = cmd::Ctx { seed, out };
    match cli.command {
        Command::Keylen(a) => cmd::keylen::run(&ctx, &mut r, a),
        Command::Run(a) => cmd::run::run(&ctx, &mut r, a),
        Command::EcBench(a) => cmd::ec_bench::run(&ctx, &mut r, a),
        Command::Extract(a) => cmd::extract::run(&ctx, &mut r, a),
        Command::Hash(a) => cmd::hash::run(&ctx, &mut r, a),
    }
}
