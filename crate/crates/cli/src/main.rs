//! `fermisurf`: TF and KS-LDA solves, surface scans and diagnostics.

mod cache;
mod commands;
mod config;
mod error;
mod output;
mod selfcheck;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use cache::Cache;
use commands::Context;
use config::RunConfig;
use error::CliError;
use output::OutDir;

const CACHE_ENV: &str = "FERMISURF_CACHE";
const DEFAULT_CACHE: &str = ".fermisurf-cache";

#[derive(Parser)]
#[command(name = "fermisurf", version, about = "Thomas-Fermi and Kohn-Sham LDA molecular binding surfaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// JSON run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Directory for CSV and JSON datasets.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    /// Solution cache directory.
    #[arg(long, global = true)]
    cache: Option<PathBuf>,
    /// Worker threads for independent solves.
    #[arg(long, global = true, default_value_t = 1, value_parser = clap::value_parser!(u16).range(1..))]
    workers: u16,
    /// Enforce the strict conditions on the exchange-correlation functional.
    #[arg(long, global = true)]
    strict_xc: bool,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Neutral TF atoms with the Sommerfeld tail fit.
    TfAtom,
    /// TF molecule; writes a density snapshot.
    TfMolecule,
    /// Radial KS-LDA atoms.
    KsAtom,
    /// Cartesian KS-LDA molecule; writes a density snapshot.
    KsMolecule,
    /// Binding energy sweep over internuclear distances.
    BoScan,
    /// Short-range limit of the TF binding energy.
    Gamma,
    /// KS versus TF screened potentials around the nuclei.
    Screened,
    /// Outside-model cross terms and decomposition gap.
    Qij,
    /// Search for the minimizing nuclear configuration.
    Minsearch,
    /// Fast closed-form checks.
    Selfcheck,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::TfAtom => "tf-atom",
            Command::TfMolecule => "tf-molecule",
            Command::KsAtom => "ks-atom",
            Command::KsMolecule => "ks-molecule",
            Command::BoScan => "bo-scan",
            Command::Gamma => "gamma",
            Command::Screened => "screened",
            Command::Qij => "qij",
            Command::Minsearch => "minsearch",
            Command::Selfcheck => "selfcheck",
        }
    }
}

fn cache_dir(flag: Option<PathBuf>) -> PathBuf {
    flag.or_else(|| std::env::var_os(CACHE_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_CACHE))
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Command::Selfcheck = cli.command {
        return selfcheck::run();
    }
    let path = cli
        .config
        .ok_or_else(|| CliError::Config("--config <path> is required".into()))?;
    let text = std::fs::read_to_string(&path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    let cfg = RunConfig::parse(&text)?;
    let cache = Cache::open(cache_dir(cli.cache))?;
    let out = OutDir::create(&cli.out)?;
    let ctx = Context::new(cfg, cli.strict_xc, cache, out, cli.workers as usize)?;
    let result = match cli.command {
        Command::TfAtom => commands::tf_atom(&ctx),
        Command::TfMolecule => commands::tf_molecule(&ctx),
        Command::KsAtom => commands::ks_atom(&ctx),
        Command::KsMolecule => commands::ks_molecule(&ctx),
        Command::BoScan => commands::bo_scan(&ctx),
        Command::Gamma => commands::gamma(&ctx),
        Command::Screened => commands::screened(&ctx),
        Command::Qij => commands::qij(&ctx),
        Command::Minsearch => commands::minsearch(&ctx),
        Command::Selfcheck => unreachable!(),
    };
    eprintln!(
        "cache: dir={} hits={} misses={}",
        ctx.cache.dir().display(),
        ctx.cache.hits(),
        ctx.cache.misses()
    );
    result
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let name = cli.command.name();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.to_json(name));
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
