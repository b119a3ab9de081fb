//! `anosov-lab`: batch front end for the anosov-core engines.
//!
//! Exit codes: 0 success, 2 configuration or parse error, 3 numeric failure,
//! 4 verification failure.

mod commands;
mod config;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::RunConfig;

const THREADS_ENV: &str = "ANOSOV_LAB_THREADS";

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Numeric(anosov_core::Error),
    Failed(String),
}

impl From<anosov_core::Error> for CliError {
    fn from(e: anosov_core::Error) -> Self {
        use anosov_core::Error as E;
        match e {
            E::Parse(m) => CliError::Config(m),
            E::Io(e) => CliError::Config(e.to_string()),
            e => CliError::Numeric(e),
        }
    }
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numeric(_) => 3,
            CliError::Failed(_) => 4,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Numeric(e) => write!(f, "numeric failure: {e}"),
            CliError::Failed(m) => write!(f, "verification failed: {m}"),
        }
    }
}

#[derive(Parser)]
#[command(name = "anosov-lab", version, about = "Orbit sums, exponents and dimension oracles for Anosov representations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// JSON run configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Worker threads (fallback: ANOSOV_LAB_THREADS, then the config).
    #[arg(long)]
    threads: Option<usize>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Fixture name, overriding the config family.
    #[arg(long)]
    family: Option<String>,
    /// Maximal core length, overriding the config.
    #[arg(long)]
    max_len: Option<usize>,
    /// Functional names such as a1 or w1 (repeatable).
    #[arg(long = "functional")]
    functionals: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Class table as CSV.
    Spectrum(Common),
    /// Counting and Dirichlet exponents.
    Exponent(Common),
    /// Intersection of `family` against `other`.
    Intersect(Common),
    /// Pressure forms along both grid axes.
    Pressure(Common),
    /// Transfer-operator and box-counting dimensions.
    Dimension(Common),
    /// Verification suites.
    Verify {
        /// identities | certificates | oracles
        suite: Option<String>,
        /// Print the suite inventory.
        #[arg(long)]
        list: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Limit set samples as CSV and optional PPM.
    Limitset(Common),
}

fn resolve(common: &Common) -> Result<RunConfig, CliError> {
    let mut cfg = match &common.config {
        Some(p) => RunConfig::load(p).map_err(CliError::Config)?,
        None => RunConfig::default(),
    };
    if let Some(f) = &common.family {
        cfg.family = config::FamilySpec::Named(f.clone());
    }
    if let Some(l) = common.max_len {
        cfg.max_len = l;
    }
    if !common.functionals.is_empty() {
        cfg.functionals = common.functionals.clone();
    }
    if let Some(o) = &common.out {
        cfg.out = Some(o.clone());
    }
    let env = match std::env::var(THREADS_ENV) {
        Ok(v) => Some(
            v.trim()
                .parse::<usize>()
                .map_err(|_| CliError::Config(format!("{THREADS_ENV}={v:?} is not a count")))?,
        ),
        Err(_) => None,
    };
    cfg.threads = common.threads.or(env).or(cfg.threads);
    cfg.validate().map_err(CliError::Config)?;
    Ok(cfg)
}

fn write_files(dir: &Path, files: &[(String, Vec<u8>)]) -> Result<(), CliError> {
    std::fs::create_dir_all(dir)
        .map_err(|e| CliError::Config(format!("cannot create {}: {e}", dir.display())))?;
    for (name, bytes) in files {
        let p = dir.join(name);
        std::fs::write(&p, bytes)
            .map_err(|e| CliError::Config(format!("cannot write {}: {e}", p.display())))?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    let (common, job): (&Common, Box<dyn Fn(&RunConfig) -> Result<commands::Outcome, CliError> + Sync>) =
        match &cli.command {
            Command::Spectrum(c) => (c, Box::new(commands::spectrum)),
            Command::Exponent(c) => (c, Box::new(commands::exponent)),
            Command::Intersect(c) => (c, Box::new(commands::intersect)),
            Command::Pressure(c) => (c, Box::new(commands::pressure)),
            Command::Dimension(c) => (c, Box::new(commands::dimension)),
            Command::Limitset(c) => (c, Box::new(commands::limitset)),
            Command::Verify { suite, list, common } => {
                if *list {
                    for (name, what) in commands::SUITES {
                        println!("{name}: {what}");
                    }
                    return Ok(());
                }
                let suite = suite
                    .clone()
                    .ok_or_else(|| CliError::Config("verify needs a suite name or --list".into()))?;
                (common, Box::new(move |cfg: &RunConfig| commands::verify(&suite, cfg)))
            }
        };
    let cfg = resolve(common)?;
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cfg.threads {
        pool = pool.num_threads(n);
    }
    let pool = pool
        .build()
        .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    let outcome = pool.install(|| job(&cfg))?;
    let dir = cfg.out.clone().unwrap_or_else(|| PathBuf::from("."));
    write_files(&dir, &outcome.files)?;
    println!(
        "{}",
        serde_json::to_string(&outcome.summary).map_err(|e| CliError::Config(e.to_string()))?
    );
    match outcome.failure {
        Some(m) => Err(CliError::Failed(m)),
        None => Ok(()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("anosov-lab: {e}");
            ExitCode::from(e.code())
        }
    }
}
