//! `decoupling-lab`: batch runner for decoupling, coding, coherent-information
//! and typicality experiments.
//!
//! Exit codes: 0 on success, 1 when an invariant check fails, 2 on a usage or
//! configuration error.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use anyhow::Result;
use clap::{Parser, Subcommand, ValueEnum};

pub mod commands;
pub mod config;
pub mod output;

use config::*;
use output::{OutDir, RunManifest};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVARIANT: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    fn ext(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "decoupling-lab", version, about = "Random-subspace decoupling and coding experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, clap::Args)]
pub struct Common {
    /// Experiment config (JSON).
    #[arg(long, value_name = "PATH")]
    pub config: PathBuf,
    /// Overrides the seed in the config.
    #[arg(long, value_name = "U64")]
    pub seed: Option<u64>,
    /// Output directory; created if missing.
    #[arg(long, value_name = "DIR", default_value = "decoupling-lab-out")]
    pub out: PathBuf,
    /// Worker threads (default: available cores). Results do not depend on it.
    #[arg(long, value_name = "N")]
    pub threads: Option<usize>,
    /// Format of the record file; summary.json is always written.
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Exact, Weyl and Monte-Carlo decoupling averages for a list of instances.
    #[command(after_help = "\
Writes manifest.json, then decouple.csv (or decouple.json) and summary.json.

CSV columns (floats with 17 significant digits, empty when not applicable):
  instance_id  instance name from the config
  S, R, E      dimensions of the input, code and environment spaces
  metric       hs_squared | trace | trace_squared | hs_squared_weyl
  n_samples    Haar samples (|S|^2 Weyl operators for hs_squared_weyl)
  mean         sample mean (exact finite average for hs_squared_weyl)
  stderr       standard error of the mean
  exact_value  closed-form Haar average of the squared HS distance
  bound        Tr[(Psi^SE)^2] for HS metrics, sqrt(|R||E|Tr[(Psi^SE)^2]) for trace,
               its square for trace_squared")]
    Decouple(Common),
    /// Random-subspace entanglement-generation trials with the Uhlmann decoder.
    #[command(after_help = "\
Writes manifest.json, then code.csv (or code.json) and summary.json.

CSV columns, one row per trial:
  trial, decoupling_distance (trace norm), hs_distance_sq, oneshot_bound,
  achieved_fidelity (overlap with the decoder target), channel_fidelity
  (entanglement fidelity of the decoding channel), infidelity, fidelity_slack
  (achieved_fidelity - (1 - decoupling_distance)), bound_holds,
  encoding_defect, trace_deviation")]
    Code(Common),
    /// Multi-start maximization of the coherent information.
    #[command(after_help = "\
Writes manifest.json, then capacity.json (or capacity.csv with columns
restart, per_copy_value, iterations) and summary.json.")]
    Capacity(Common),
    /// Typical-subspace flattening and its bounds.
    #[command(after_help = "\
Writes manifest.json, then typicality.json (or typicality.csv with columns
bound, lhs, rhs, slack, pass, required) and summary.json.")]
    Typicality(Common),
}

enum Failure {
    Config(anyhow::Error),
    Invariant(Vec<String>),
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    match execute(&cli.command) {
        Ok(()) => EXIT_OK,
        Err(Failure::Config(e)) => {
            eprintln!("error: {e:#}");
            EXIT_CONFIG
        }
        Err(Failure::Invariant(list)) => {
            for f in &list {
                eprintln!("invariant failed: {f}");
            }
            EXIT_INVARIANT
        }
    }
}

fn execute(command: &Command) -> std::result::Result<(), Failure> {
    let (name, common) = match command {
        Command::Decouple(c) => ("decouple", c),
        Command::Code(c) => ("code", c),
        Command::Capacity(c) => ("capacity", c),
        Command::Typicality(c) => ("typicality", c),
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(common.threads.unwrap_or(0))
        .build()
        .map_err(|e| Failure::Config(e.into()))?;
    let failures = pool.install(|| dispatch(name, common)).map_err(Failure::Config)?;
    if failures.is_empty() {
        Ok(())
    } else {
        Err(Failure::Invariant(failures))
    }
}

fn dispatch(name: &str, common: &Common) -> Result<Vec<String>> {
    let path = common.config.as_path();
    let base = path.parent().unwrap_or(Path::new("."));
    let fmt = common.format;
    let outputs = |stem: &str| vec![format!("{stem}.{}", fmt.ext()), "summary.json".to_string()];
    match name {
        "decouple" => {
            let mut cfg: DecoupleConfig = load(path, DECOUPLE_SCHEMA, |c: &DecoupleConfig| &c.schema)?;
            cfg.seed = common.seed.unwrap_or(cfg.seed);
            let out = start(name, common, DECOUPLE_SCHEMA, Some(cfg.seed), outputs("decouple"))?;
            commands::decouple(&cfg, base, &out, fmt)
        }
        "code" => {
            let mut cfg: CodeConfig = load(path, CODE_SCHEMA, |c: &CodeConfig| &c.schema)?;
            cfg.seed = common.seed.unwrap_or(cfg.seed);
            let out = start(name, common, CODE_SCHEMA, Some(cfg.seed), outputs("code"))?;
            commands::code(&cfg, base, &out, fmt)
        }
        "capacity" => {
            let mut cfg: CapacityConfig = load(path, CAPACITY_SCHEMA, |c: &CapacityConfig| &c.schema)?;
            cfg.seed = common.seed.unwrap_or(cfg.seed);
            let out = start(name, common, CAPACITY_SCHEMA, Some(cfg.seed), outputs("capacity"))?;
            commands::capacity(&cfg, base, &out, fmt)
        }
        _ => {
            let cfg: TypicalityConfig = load(path, TYPICALITY_SCHEMA, |c: &TypicalityConfig| &c.schema)?;
            let out = start(name, common, TYPICALITY_SCHEMA, common.seed, outputs("typicality"))?;
            commands::typicality(&cfg, base, &out, fmt)
        }
    }
}

fn start(name: &str, common: &Common, schema: &str, seed: Option<u64>, outputs: Vec<String>) -> Result<OutDir> {
    let out = OutDir::create(&common.out)?;
    out.write_json(
        "manifest.json",
        &RunManifest {
            command: name.into(),
            config_path: common.config.display().to_string(),
            config_schema: schema.into(),
            seed,
            output_dir: common.out.display().to_string(),
            tool_version: env!("CARGO_PKG_VERSION").into(),
            threads: common.threads,
            format: common.format.ext().into(),
            timestamp: output::timestamp(),
            outputs,
        },
    )?;
    Ok(out)
}
