//! `slelab` command line: one subcommand per estimator or check, a JSON
//! config overridden by flags, and a manifest per output directory.

mod commands;
mod config;
mod manifest;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{ArgAction, Parser};

use config::{ConfigError, RunConfig};
use manifest::Recorder;

const EXIT_CONFIG: u8 = 2;
const EXIT_STATISTICAL: u8 = 3;
const EXIT_INTERNAL: u8 = 4;

#[derive(Debug, thiserror::Error)]
pub enum CmdError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Core(#[from] slelab::Error),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

impl CmdError {
    fn exit_code(&self) -> u8 {
        match self {
            CmdError::Config(_) | CmdError::Core(slelab::Error::Domain { .. }) => EXIT_CONFIG,
            _ => EXIT_INTERNAL,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "slelab", version, about = "SLE, CLE and carpet-measure experiments")]
struct Cli {
    #[arg(value_parser = clap::builder::PossibleValuesParser::new(commands::SUBCOMMANDS))]
    subcommand: String,
    /// JSON config file; flags override its fields
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    kappa: Option<f64>,
    #[arg(long)]
    grid: Option<usize>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    n_traces: Option<usize>,
    #[arg(long)]
    n_fields: Option<usize>,
    #[arg(long)]
    n_replicas: Option<usize>,
    #[arg(long)]
    steps: Option<usize>,
    /// Comma-separated increasing central charges ending at 1
    #[arg(long, value_delimiter = ',')]
    c_sequence: Option<Vec<f64>>,
    /// Repeatable; every seed is an independent run
    #[arg(long = "seed", action = ArgAction::Append)]
    seeds: Vec<u64>,
    /// Draw one seed from the OS when none is given
    #[arg(long)]
    random_seed: bool,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, overrides_with = "no_csv")]
    csv: bool,
    #[arg(long)]
    no_csv: bool,
    #[arg(long, overrides_with = "no_json")]
    json: bool,
    #[arg(long)]
    no_json: bool,
    #[arg(long)]
    svg: bool,
    /// Worker threads; results are aggregated in seed order regardless
    #[arg(long)]
    workers: Option<usize>,
}

impl Cli {
    fn into_config(self) -> Result<RunConfig, ConfigError> {
        let mut c = match &self.config {
            Some(path) => RunConfig::from_file(path)?,
            None => RunConfig::default(),
        };
        if !c.subcommand.is_empty() && c.subcommand != self.subcommand {
            return Err(ConfigError::new(
                "subcommand",
                format!("config file is for `{}`, not `{}`", c.subcommand, self.subcommand),
            ));
        }
        c.subcommand = self.subcommand;
        macro_rules! over {
            ($($f:ident),*) => { $( if self.$f.is_some() { c.$f = self.$f; } )* };
        }
        over!(kappa, grid, eps, n_traces, n_fields, n_replicas, steps, c_sequence);
        if !self.seeds.is_empty() {
            c.seeds = self.seeds;
        }
        if c.seeds.is_empty() && self.random_seed {
            c.seeds = vec![rand::random()];
        }
        if let Some(out) = self.out {
            c.out = out;
        }
        if self.csv {
            c.csv = true;
        }
        if self.no_csv {
            c.csv = false;
        }
        if self.json {
            c.json = true;
        }
        if self.no_json {
            c.json = false;
        }
        if self.svg {
            c.svg = true;
        }
        if let Some(w) = self.workers {
            c.workers = w;
        }
        c.validate()?;
        Ok(c)
    }
}

fn execute(cfg: &RunConfig) -> Result<bool, CmdError> {
    let started = Instant::now();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(std::io::Error::other)?;
    let mut rec = Recorder::new(cfg)?;
    commands::run(cfg, &mut rec, &pool)?;
    for a in &rec.assertions {
        eprintln!("{} {}: {}", if a.passed { "PASS" } else { "FAIL" }, a.name, a.detail);
    }
    let passed = rec.all_passed();
    rec.finish(cfg, started)?;
    Ok(passed)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match cli.into_config() {
        Ok(c) => c,
        Err(e) => {
            eprintln!("{e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    match execute(&cfg) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_STATISTICAL),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
