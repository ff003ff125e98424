//! Command-line interface: `construct`, `verify`, `mindist`, `simulate`.
//!
//! Exit codes: 0 success, 1 verification failure or runtime error, 2 usage error.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::algebra::{lambda_for_relays, LinkerFamily, RepContext};
use crate::error::Error;
use crate::export::{construction_export, unix_now, CodebookExport, RunManifest};
use crate::parallel::Execution;
use crate::relays::build_relay_matrices;
use crate::signal_sets::{default_codebook, min_distance};
use crate::simulator::{run_simulation_with, write_csv, DecoderKind, ScaleTracking, SimConfig};
use crate::verify::{run_suite, Outcome, VerifyOptions};

pub const EXIT_OK: u8 = 0;
pub const EXIT_FAILURE: u8 = 1;
pub const EXIT_USAGE: u8 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "ddstc",
    version,
    about = "Distributed differential space-time codes from extended Clifford algebras"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Export the design, relay matrices, s0 and X0 as JSON.
    Construct(ConstructArgs),
    /// Run the full algebraic and decoder invariant suite.
    Verify(VerifyArgs),
    /// Exhaustive minimum Frobenius distance of the default codebook.
    Mindist(MindistArgs),
    /// Monte Carlo block-error simulation of the relay network.
    Simulate(SimulateArgs),
}

fn parse_relays(s: &str) -> Result<usize, String> {
    let r: usize = s
        .parse()
        .map_err(|_| format!("R must be a power of two ≥ 4 (got {s})"))?;
    lambda_for_relays(r).map_err(|e| e.to_string())?;
    Ok(r)
}

#[derive(Debug, Args)]
pub struct ConstructArgs {
    /// Number of relays R (a power of two ≥ 4).
    #[arg(long, default_value_t = 4, value_parser = parse_relays)]
    pub relays: usize,
    /// Conjugating-relay family.
    #[arg(long, value_enum, default_value_t = LinkerFamily::Gamma2)]
    pub linkers: LinkerFamily,
    /// Output file; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, default_value_t = 4, value_parser = parse_relays)]
    pub relays: usize,
    /// Random instances per check.
    #[arg(long, default_value_t = 1000)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Amplitude levels of the axis signal sets.
    #[arg(long, value_delimiter = ',', default_value = "1")]
    pub amplitudes: Vec<f64>,
    #[arg(long, value_enum, default_value_t = LinkerFamily::Gamma2)]
    pub linkers: LinkerFamily,
    /// Replace the first conjugating relay with φ(δ1) (negative control).
    #[arg(long, hide = true)]
    pub corrupt_relay: bool,
}

#[derive(Debug, Args)]
pub struct MindistArgs {
    #[arg(long, default_value_t = 4, value_parser = parse_relays)]
    pub relays: usize,
    #[arg(long, value_delimiter = ',', default_value = "1")]
    pub amplitudes: Vec<f64>,
    /// Also write the codebook (symbol vectors and scales) as JSON.
    #[arg(long)]
    pub codebook_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Key-value (TOML) file with any of the options below; flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Number of relays R [default: 4].
    #[arg(long, value_parser = parse_relays)]
    pub relays: Option<usize>,
    /// Comma-separated P values in dB relative to unit noise variance [default: 10,15,20,25].
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub snr: Option<Vec<f64>>,
    /// Data codewords per SNR point [default: 10000].
    #[arg(long)]
    pub cycles: Option<u64>,
    /// Codewords per channel realization, including s0 [default: 20].
    #[arg(long)]
    pub frame_cycles: Option<usize>,
    /// Decoders to run, comma-separated [default: groupwise].
    #[arg(long, value_enum, value_delimiter = ',')]
    pub decoder: Option<Vec<DecoderKind>>,
    /// Scale tracking modes, comma-separated [default: decision-directed].
    #[arg(long, value_enum, value_delimiter = ',')]
    pub tracking: Option<Vec<ScaleTracking>>,
    /// Source power fraction π1 [default: 0.5].
    #[arg(long)]
    pub pi1: Option<f64>,
    /// Per-relay power fraction π2 [default: 1/(2R)].
    #[arg(long)]
    pub pi2: Option<f64>,
    /// RNG seed [default: 0].
    #[arg(long)]
    pub seed: Option<u64>,
    /// Amplitude levels of the axis signal sets [default: 1].
    #[arg(long, value_delimiter = ',')]
    pub amplitudes: Option<Vec<f64>>,
    /// CSV output file; standard output when omitted. A manifest is written next to it.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Run frames on one thread.
    #[arg(long)]
    pub sequential: bool,
    /// Zero all noise (debug).
    #[arg(long, hide = true)]
    pub noiseless: bool,
}

/// Contents of a `--config` file. Every key is optional.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateFile {
    pub relays: Option<usize>,
    pub snr: Option<Vec<f64>>,
    pub cycles: Option<u64>,
    pub frame_cycles: Option<usize>,
    pub decoder: Option<Vec<DecoderKind>>,
    pub tracking: Option<Vec<ScaleTracking>>,
    pub pi1: Option<f64>,
    pub pi2: Option<f64>,
    pub seed: Option<u64>,
    pub amplitudes: Option<Vec<f64>>,
}

/// Fully resolved `simulate` parameters.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SimulatePlan {
    pub base: SimConfig,
    pub decoders: Vec<DecoderKind>,
    pub trackings: Vec<ScaleTracking>,
    pub amplitudes: Vec<f64>,
}

/// Errors the CLI maps to exit codes.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Runtime(#[from] anyhow::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Runtime(_) => EXIT_FAILURE,
        }
    }
}

fn usage(e: impl ToString) -> CliError {
    CliError::Usage(e.to_string())
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidRelayCount(_)
            | Error::RelayCountTooLarge(..)
            | Error::InvalidConfig(_)
            | Error::InvalidSignalSet(_) => CliError::Usage(e.to_string()),
            other => CliError::Runtime(other.into()),
        }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Runtime(e.into())
    }
}

pub fn resolve_simulate(args: &SimulateArgs) -> Result<SimulatePlan, CliError> {
    let file = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
            toml::from_str::<SimulateFile>(&text)
                .map_err(|e| usage(format!("{}: {e}", path.display())))?
        }
        None => SimulateFile::default(),
    };
    let relays = args.relays.or(file.relays).unwrap_or(4);
    lambda_for_relays(relays)?;
    let mut base = SimConfig::new(relays);
    if let Some(v) = args.snr.clone().or(file.snr) {
        base.snr_db = v;
    }
    if let Some(v) = args.cycles.or(file.cycles) {
        base.total_cycles = v;
    }
    if let Some(v) = args.frame_cycles.or(file.frame_cycles) {
        base.frame_cycles = v;
    }
    if let Some(v) = args.pi1.or(file.pi1) {
        base.pi1 = v;
    }
    if let Some(v) = args.pi2.or(file.pi2) {
        base.pi2 = v;
    }
    if let Some(v) = args.seed.or(file.seed) {
        base.seed = v;
    }
    base.noiseless = args.noiseless;
    let decoders = args
        .decoder
        .clone()
        .or(file.decoder)
        .unwrap_or(vec![DecoderKind::Groupwise]);
    let trackings = args
        .tracking
        .clone()
        .or(file.tracking)
        .unwrap_or(vec![ScaleTracking::DecisionDirected]);
    let amplitudes = args
        .amplitudes
        .clone()
        .or(file.amplitudes)
        .unwrap_or(vec![1.0]);
    if decoders.is_empty() || trackings.is_empty() {
        return Err(usage("decoder and tracking lists must not be empty"));
    }
    if relays > crate::verify::MAX_CODEBOOK_RELAYS {
        return Err(usage(format!(
            "simulation enumerates the codebook; R must be ≤ {}",
            crate::verify::MAX_CODEBOOK_RELAYS
        )));
    }
    base.validate()?;
    Ok(SimulatePlan {
        base,
        decoders,
        trackings,
        amplitudes,
    })
}

fn write_output(out: Option<&Path>, contents: &[u8]) -> Result<(), CliError> {
    match out {
        Some(p) => fs::write(p, contents)
            .map_err(|e| CliError::Runtime(anyhow::anyhow!("cannot write {}: {e}", p.display()))),
        None => {
            io::stdout().write_all(contents)?;
            Ok(())
        }
    }
}

fn manifest_path(out: &Path) -> PathBuf {
    let mut name = out
        .file_name()
        .map(|n| n.to_os_string())
        .unwrap_or_default();
    name.push(".manifest.json");
    out.with_file_name(name)
}

fn cmd_construct(args: &ConstructArgs) -> Result<u8, CliError> {
    let started = unix_now();
    let mut export = construction_export(args.relays, args.linkers)?;
    export.manifest = Some(RunManifest::new(
        "construct",
        serde_json::json!({ "relays": args.relays, "linkers": args.linkers }),
        None,
        started,
    ));
    let mut json = serde_json::to_vec_pretty(&export).map_err(|e| CliError::Runtime(e.into()))?;
    json.push(b'\n');
    write_output(args.out.as_deref(), &json)?;
    Ok(EXIT_OK)
}

fn cmd_verify(args: &VerifyArgs) -> Result<u8, CliError> {
    let opts = VerifyOptions {
        relays: args.relays,
        trials: args.trials,
        seed: args.seed,
        amplitudes: args.amplitudes.clone(),
        linkers: args.linkers,
        corrupt_relay: args.corrupt_relay,
    };
    let checks = run_suite(&opts)?;
    println!(
        "verify R={} trials={} seed={}",
        args.relays, args.trials, args.seed
    );
    for c in &checks {
        println!("{c}");
    }
    match checks.iter().find(|c| c.outcome == Outcome::Fail) {
        Some(first) => {
            println!("FAILED: {} ({})", first.name, first.detail);
            Ok(EXIT_FAILURE)
        }
        None => {
            println!("all checks passed");
            Ok(EXIT_OK)
        }
    }
}

fn cmd_mindist(args: &MindistArgs) -> Result<u8, CliError> {
    let started = unix_now();
    let cb = default_codebook(args.relays, &args.amplitudes)?;
    let md = min_distance(&cb)?;
    println!("relays {}", args.relays);
    println!("codewords {}", cb.len());
    println!("min_distance {}", md.value);
    println!("witness {} {}", md.pair.0, md.pair.1);
    if let Some(path) = &args.codebook_out {
        let export = CodebookExport::from_codebook(&cb);
        let json = serde_json::to_vec_pretty(&export).map_err(|e| CliError::Runtime(e.into()))?;
        write_output(Some(path), &json)?;
        let manifest = RunManifest::new(
            "mindist",
            serde_json::json!({ "relays": args.relays, "amplitudes": args.amplitudes }),
            None,
            started,
        );
        let json = serde_json::to_vec_pretty(&manifest).map_err(|e| CliError::Runtime(e.into()))?;
        write_output(Some(&manifest_path(path)), &json)?;
    }
    Ok(EXIT_OK)
}

fn cmd_simulate(args: &SimulateArgs) -> Result<u8, CliError> {
    let started = unix_now();
    let plan = resolve_simulate(args)?;
    let ctx = RepContext::for_relays(plan.base.relays)?;
    let rs = build_relay_matrices(&ctx);
    let cb = default_codebook(plan.base.relays, &plan.amplitudes)?;
    let exec = if args.sequential {
        Execution::Sequential
    } else {
        Execution::default()
    };
    let mut records = Vec::new();
    for &decoder in &plan.decoders {
        for &tracking in &plan.trackings {
            let cfg = SimConfig {
                decoder,
                tracking,
                ..plan.base.clone()
            };
            let res = run_simulation_with(&cfg, &rs, &cb, exec)?;
            eprintln!(
                "{} / {}: {} points in {:.2?}",
                decoder.as_str(),
                tracking.as_str(),
                res.records.len(),
                res.runtime
            );
            records.extend(res.records);
        }
    }
    let mut csv = Vec::new();
    write_csv(&mut csv, &records, plan.base.seed)?;
    write_output(args.out.as_deref(), &csv)?;
    if let Some(out) = &args.out {
        let config = serde_json::to_value(&plan).map_err(|e| CliError::Runtime(e.into()))?;
        let manifest = RunManifest::new("simulate", config, Some(plan.base.seed), started);
        let json = serde_json::to_vec_pretty(&manifest).map_err(|e| CliError::Runtime(e.into()))?;
        write_output(Some(&manifest_path(out)), &json)?;
    }
    Ok(EXIT_OK)
}

pub fn run(cli: &Cli) -> Result<u8, CliError> {
    match &cli.command {
        Command::Construct(a) => cmd_construct(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Mindist(a) => cmd_mindist(a),
        Command::Simulate(a) => cmd_simulate(a),
    }
}
