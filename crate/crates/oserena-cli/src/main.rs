//! Command line front end: single runs, parameter sweeps, coloring
//! verification and the bad-scenario bound.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use oserena::analysis::bad_scenario_bound;
use oserena::engine::{run, Algorithm, LogLevel, RunConfig, RunResult};
use oserena::firstfit::{verify_coloring, Coloring, VerifyError};
use oserena::sweep::{rows_to_csv, rows_to_json, run_sweep, SweepSpec};
use oserena::topology::{generate_udg, Topology};
use oserena::wire::FieldSizes;

#[derive(Parser)]
#[command(name = "oserena", version, about = "Distributed 3-hop coloring simulator for wireless sensor networks")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Execute one coloring run and write a JSON artifact.
    Run(RunArgs),
    /// Average metrics over a (nodes x densities x algorithms) grid.
    Sweep(SweepArgs),
    /// Check a coloring file against a topology.
    Verify(VerifyArgs),
    /// Evaluate the closed-form bad-scenario probability bound.
    Bound(BoundArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Algorithm: serena, oserena or oracle.
    #[arg(long, default_value = "oserena")]
    algo: Algorithm,
    /// Node count for generated topologies.
    #[arg(long, default_value_t = 100)]
    nodes: usize,
    /// Target mean neighbor count for generated topologies.
    #[arg(long, default_value_t = 20.0)]
    density: f64,
    /// Load the topology from a file instead of generating one.
    #[arg(long)]
    topo: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Size of the max_prio1 list.
    #[arg(long, default_value_t = 4)]
    mp1: usize,
    /// Size of the max_prio2 list.
    #[arg(long, default_value_t = 3)]
    mp2: usize,
    /// Bernoulli loss probability per (message, receiver).
    #[arg(long, default_value_t = 0.0)]
    loss_rate: f64,
    /// Rule R6 miss threshold.
    #[arg(long = "r6-n", default_value_t = 12)]
    r6_n: u32,
    #[arg(long, default_value_t = 200)]
    max_attempts: u32,
    /// Abort after this many rounds (default 50 * n).
    #[arg(long)]
    round_cap: Option<u64>,
    /// Write the JSON run artifact here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long, value_delimiter = ',', default_values_t = vec![50usize, 100, 150, 200])]
    nodes: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_values_t = vec![8.0, 10.0, 15.0, 20.0, 25.0, 30.0, 35.0, 40.0, 45.0])]
    densities: Vec<f64>,
    /// Runs averaged per cell.
    #[arg(long, default_value_t = 10)]
    runs: u32,
    #[arg(long, value_delimiter = ',', default_values = ["serena", "oserena"])]
    algos: Vec<Algorithm>,
    /// Master seed: every cell derives its own stream from it.
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 4)]
    mp1: usize,
    #[arg(long, default_value_t = 3)]
    mp2: usize,
    #[arg(long, default_value_t = 0.0)]
    loss_rate: f64,
    #[arg(long, default_value_t = 200)]
    max_attempts: u32,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
    format: OutputFormat,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Csv,
    Json,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    topo: PathBuf,
    /// Coloring file: either `<address> <color>` lines or a run artifact.
    #[arg(long)]
    coloring: PathBuf,
    #[arg(long, default_value_t = 3)]
    hops: usize,
}

#[derive(Args)]
struct BoundArgs {
    /// Mean number of 1-hop neighbors.
    #[arg(long)]
    m: f64,
}

#[derive(Serialize)]
#[serde(tag = "source", rename_all = "lowercase")]
enum TopologyProvenance {
    Generated { n: usize, density: f64, seed: u64, attempts: u32, placement_seed: u64 },
    File { path: String },
}

#[derive(Serialize)]
struct RunArtifact {
    topology: TopologyProvenance,
    result: RunResult,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.cmd {
        Cmd::Run(args) => cmd_run(args),
        Cmd::Sweep(args) => cmd_sweep(args),
        Cmd::Verify(args) => cmd_verify(args),
        Cmd::Bound(args) => cmd_bound(args),
    };
    match code {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

/// OSERENA_SEED overrides the master seed from the command line.
fn master_seed(flag_value: u64) -> Result<u64, String> {
    match std::env::var("OSERENA_SEED") {
        Ok(raw) => raw
            .parse()
            .map_err(|e| format!("OSERENA_SEED must be an unsigned integer: {e}")),
        Err(_) => Ok(flag_value),
    }
}

fn cmd_run(args: RunArgs) -> Result<ExitCode, String> {
    let seed = master_seed(args.seed)?;
    let (topology, provenance) = match &args.topo {
        Some(path) => {
            let topo = Topology::load(path).map_err(|e| e.to_string())?;
            (topo, TopologyProvenance::File { path: path.display().to_string() })
        }
        None => {
            let generated = generate_udg(args.nodes, args.density, seed, args.max_attempts)
                .map_err(|e| e.to_string())?;
            let provenance = TopologyProvenance::Generated {
                n: args.nodes,
                density: args.density,
                seed,
                attempts: generated.attempts,
                placement_seed: generated.placement_seed,
            };
            (generated.topology, provenance)
        }
    };
    if !topology.is_connected() {
        eprintln!("warning: topology is not connected; running anyway");
    }
    let config = RunConfig {
        algorithm: args.algo,
        size_mp1: args.mp1,
        size_mp2: args.mp2,
        loss_rate: args.loss_rate,
        r6_threshold: args.r6_n,
        seed,
        field_sizes: FieldSizes::default(),
        round_cap: args.round_cap,
        instrument: true,
        log: LogLevel::Full,
    };
    let result = run(&topology, &config).map_err(|e| e.to_string())?;
    println!(
        "{} on {} nodes: {} colors, {} rounds to color ({} total), {:.2} msgs/node, {:.1} bytes/node, max message {} bytes",
        result.algorithm,
        result.n,
        result.colors_used,
        result.coloring_rounds,
        result.rounds,
        result.avg_messages_per_node,
        result.avg_bytes_per_node,
        result.max_message_bytes
    );
    if let Err(e) = verify_coloring(&topology, &result.coloring, 3) {
        eprintln!("error: produced coloring failed verification: {e}");
        return Ok(ExitCode::from(1));
    }
    println!("coloring verified valid at 3 hops");
    if let Some(out) = &args.out {
        let artifact = RunArtifact { topology: provenance, result };
        let json = serde_json::to_string_pretty(&artifact).map_err(|e| e.to_string())?;
        std::fs::write(out, json).map_err(|e| e.to_string())?;
        println!("wrote {}", out.display());
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_sweep(args: SweepArgs) -> Result<ExitCode, String> {
    let spec = SweepSpec {
        nodes: args.nodes,
        densities: args.densities,
        runs: args.runs,
        algorithms: args.algos,
        master_seed: master_seed(args.seed)?,
        size_mp1: args.mp1,
        size_mp2: args.mp2,
        loss_rate: args.loss_rate,
        max_attempts: args.max_attempts,
    };
    let rows = run_sweep(&spec).map_err(|e| e.to_string())?;
    let rendered = match args.format {
        OutputFormat::Csv => rows_to_csv(&rows),
        OutputFormat::Json => rows_to_json(&rows),
    };
    match &args.out {
        Some(path) => {
            std::fs::write(path, &rendered).map_err(|e| e.to_string())?;
            eprintln!("wrote {} rows to {}", rows.len(), path.display());
        }
        None => print!("{rendered}"),
    }
    Ok(ExitCode::SUCCESS)
}

/// Accept either a plain `<address> <color>` text file or a JSON run
/// artifact (the coloring sits under `result.coloring` or `coloring`).
fn load_coloring(path: &Path) -> Result<Coloring, String> {
    let text = std::fs::read_to_string(path).map_err(|e| e.to_string())?;
    let trimmed = text.trim_start();
    if trimmed.starts_with('{') {
        let value: serde_json::Value =
            serde_json::from_str(&text).map_err(|e| format!("bad JSON: {e}"))?;
        let map = value
            .pointer("/result/coloring")
            .or_else(|| value.pointer("/coloring"))
            .ok_or("JSON artifact has no `coloring` field")?;
        let parsed: BTreeMap<String, u32> =
            serde_json::from_value(map.clone()).map_err(|e| format!("bad coloring map: {e}"))?;
        return parsed
            .into_iter()
            .map(|(k, v)| {
                k.parse::<u32>()
                    .map(|addr| (addr, v))
                    .map_err(|e| format!("bad address `{k}`: {e}"))
            })
            .collect::<Result<Coloring, String>>();
    }
    let mut coloring = Coloring::new();
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut fields = line.split_whitespace();
        let addr: u32 = fields
            .next()
            .ok_or(format!("line {}: missing address", idx + 1))?
            .parse()
            .map_err(|e| format!("line {}: bad address: {e}", idx + 1))?;
        let color: u32 = fields
            .next()
            .ok_or(format!("line {}: missing color", idx + 1))?
            .parse()
            .map_err(|e| format!("line {}: bad color: {e}", idx + 1))?;
        coloring.insert(addr, color);
    }
    Ok(coloring)
}

fn cmd_verify(args: VerifyArgs) -> Result<ExitCode, String> {
    let topo = Topology::load(&args.topo).map_err(|e| e.to_string())?;
    let coloring = load_coloring(&args.coloring)?;
    match verify_coloring(&topo, &coloring, args.hops) {
        Ok(()) => {
            println!(
                "valid: {} nodes, {} colors, no conflicts within {} hops",
                coloring.len(),
                coloring.colors_used(),
                args.hops
            );
            Ok(ExitCode::SUCCESS)
        }
        Err(VerifyError::Conflicts { conflicts }) => {
            for c in &conflicts {
                println!(
                    "conflict: nodes {} and {} share color {} at {} hops",
                    c.a, c.b, c.color, c.hops
                );
            }
            Ok(ExitCode::from(1))
        }
        Err(other) => {
            println!("invalid: {other}");
            Ok(ExitCode::from(1))
        }
    }
}

fn cmd_bound(args: BoundArgs) -> Result<ExitCode, String> {
    let bound = bad_scenario_bound(args.m).map_err(|e| e.to_string())?;
    println!("{bound:.6}");
    Ok(ExitCode::SUCCESS)
}
