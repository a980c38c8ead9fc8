//! Command-line front end: loads a run config, dispatches one pipeline and
//! writes its result as CSV or JSON.

pub mod config;
pub mod output;

use std::path::{Path, PathBuf};

use clap::{Parser, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};
use xtunnel::experiments::{
    exchange_report, hf_tail, oracle_report, scan_case2, scan_distance_exchange, scan_hbar_exchange_case1,
    scan_hbar_exchange_case3, scan_hbar_splitting, spectrum_report, wkb_report,
};

pub use config::{Format, RunConfig};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("cannot write {path}: {source}")]
    Write { path: PathBuf, source: std::io::Error },
    #[error("config: {0}")]
    Config(String),
    #[error("override `{0}`: {1}")]
    Override(String, String),
    #[error("usage: {0}")]
    Usage(String),
    #[error(transparent)]
    Model(#[from] xtunnel::Error),
}

impl CliError {
    /// 1 for bad input, 2 for numerical or regime failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Model(e) if !e.is_validation() => 2,
            _ => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Spectrum,
    Wkb,
    Exchange,
    HfTail,
    Oracle2p,
    ScanHbarSplitting,
    ScanDistance,
    ScanCase1,
    ScanCase2,
    ScanCase3,
}

#[derive(Debug, Parser)]
#[command(name = "xtunnel", version, about = "Exchange-assisted tunneling pipelines")]
pub struct Cli {
    /// Pipeline to run.
    #[arg(value_enum)]
    pub command: Command,
    #[arg(long)]
    pub config: PathBuf,
    /// Output file; standard output when absent from both flags and config.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// `key=value` with a dot-path key, applied before validation.
    #[arg(long = "override", value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
}

/// Rendered result, both encodings.
pub struct Rendered {
    pub json: Value,
    pub csv: String,
}

fn to_value(v: &impl Serialize) -> Value {
    serde_json::to_value(v).unwrap_or(Value::Null)
}

fn report(v: &impl Serialize) -> Rendered {
    let json = to_value(v);
    Rendered { csv: output::flat(&json), json }
}

/// Runs one pipeline on a validated config.
pub fn execute(command: Command, cfg: &RunConfig) -> Result<Rendered, CliError> {
    let m = cfg.model();
    let o = &cfg.options;
    Ok(match command {
        Command::Spectrum => report(&spectrum_report(&m, o.count)?),
        Command::Wkb => report(&wkb_report(&m, o.energy, o.bracket)?),
        Command::Exchange => report(&exchange_report(&m)?),
        Command::HfTail => report(&hf_tail(&m, &o.hf)?),
        Command::Oracle2p => report(&oracle_report(&m, &o.oracle)?),
        Command::ScanHbarSplitting => {
            let r = scan_hbar_splitting(&cfg.scan_spec()?)?;
            scan_rendered(&r.table, output::fit_block(&r.fit), to_value(&r))
        }
        Command::ScanDistance => {
            let r = scan_distance_exchange(&cfg.scan_spec()?, o.distance)?;
            scan_rendered(&r.table, output::fit_block(&r.fit), to_value(&r))
        }
        Command::ScanCase1 => {
            let r = scan_hbar_exchange_case1(&cfg.scan_spec()?, &o.case1)?;
            let fits = json!({ "semilog": output::fit_block(&r.semilog), "loglog": output::fit_block(&r.loglog) });
            scan_rendered(&r.table, fits, to_value(&r))
        }
        Command::ScanCase2 => {
            let params = o.case2.as_ref().ok_or_else(|| CliError::Config("missing field `options.case2`".into()))?;
            let r = scan_case2(&cfg.scan_spec()?, params)?;
            scan_rendered(&r.table, output::fit_block(&r.fit), to_value(&r))
        }
        Command::ScanCase3 => {
            let r = scan_hbar_exchange_case3(&cfg.scan_spec()?, &o.case3)?;
            let fits = json!({ "semilog": output::fit_block(&r.semilog), "loglog": output::fit_block(&r.loglog) });
            scan_rendered(&r.table, fits, to_value(&r))
        }
    })
}

/// CSV: the table, then the fit block as one JSON line.
fn scan_rendered(table: &xtunnel::experiments::ScanResult, fits: Value, json: Value) -> Rendered {
    let mut csv = output::table(table);
    csv.push_str(&fits.to_string());
    csv.push('\n');
    Rendered { json, csv }
}

/// The JSON document: command, resolved config and result.
pub fn document(command: Command, cfg: &RunConfig, result: Value) -> String {
    let m = cfg.model();
    let resolved = json!({
        "grid": m.resolve_grid().ok(),
        "kernel": m.resolve_kernel().ok(),
    });
    let doc = json!({ "command": command, "config": cfg, "resolved": resolved, "result": result });
    let mut s = serde_json::to_string_pretty(&doc).unwrap_or_default();
    s.push('\n');
    s
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|source| CliError::Read { path: path.to_path_buf(), source })
}

/// Full run: load, execute, write. Returns where the output went.
pub fn run(cli: &Cli) -> Result<Option<PathBuf>, CliError> {
    let mut cfg = RunConfig::load(&read(&cli.config)?, &cli.overrides)?;
    if let Some(p) = &cli.out {
        cfg.output.path = Some(p.clone());
    }
    if let Some(f) = cli.format {
        cfg.output.format = f;
    }
    let rendered = execute(cli.command, &cfg)?;
    let text = match cfg.output.format {
        Format::Csv => rendered.csv,
        Format::Json => document(cli.command, &cfg, rendered.json),
    };
    match &cfg.output.path {
        Some(p) => {
            std::fs::write(p, text).map_err(|source| CliError::Write { path: p.clone(), source })?;
            Ok(Some(p.clone()))
        }
        None => {
            print!("{text}");
            Ok(None)
        }
    }
}
