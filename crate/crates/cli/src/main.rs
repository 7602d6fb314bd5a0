//! `eonplan`: multi-period C+L network planning from the command line.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use eonplan_core::experiment::{
    demands_to_csv, generate_demands, parse_weights, read_text, Experiment, RunConfig, NOBEL_GERMANY_WEIGHTS,
};
use eonplan_core::netgraph::parse_topology;
use eonplan_core::report::{emit, FlowSummary};
use eonplan_core::xcvr::Catalog;
use eonplan_core::{Error, Result};

#[derive(Parser)]
#[command(name = "eonplan", version, about = "Multi-period C+L optical network planner")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run planning flows over traffic realizations and write reports.
    Plan(PlanArgs),
    /// Write a gravity-model demand matrix as `src,dst,gbps` CSV.
    GenDemands(GenArgs),
    /// Print nodes, links, lengths and span counts.
    DumpTopology(ConfigArg),
    /// Print the pre-selected transceiver configurations as CSV.
    DumpCatalog(ConfigArg),
}

#[derive(Args)]
struct ConfigArg {
    /// TOML run configuration; flags take precedence over its values.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct PlanArgs {
    #[command(flatten)]
    cfg: ConfigArg,
    /// all, proactive, incremental or incremental-max.
    #[arg(long)]
    flow: Option<String>,
    #[arg(long)]
    periods: Option<u32>,
    #[arg(long)]
    realizations: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Overhead on the final-period estimate of the proactive flow.
    #[arg(long)]
    oh: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; defaults to the available parallelism.
    #[arg(long)]
    jobs: Option<usize>,
    /// Also export every period's plan state under `<out>/snapshots`.
    #[arg(long)]
    snapshots: bool,
}

#[derive(Args)]
struct GenArgs {
    #[command(flatten)]
    cfg: ConfigArg,
    /// `node,weight` CSV; the configured or bundled weights if unset.
    #[arg(long)]
    weights: Option<PathBuf>,
    #[arg(long)]
    scale: Option<f64>,
    /// Output file; stdout if unset.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn load_config(arg: &ConfigArg) -> Result<RunConfig> {
    match &arg.config {
        Some(p) => RunConfig::load(p),
        None => Ok(RunConfig::default()),
    }
}

fn write_or_print(out: Option<&PathBuf>, body: &str) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, body).map_err(|e| Error::Io {
            path: p.clone(),
            source: e,
        }),
        None => {
            print!("{body}");
            Ok(())
        }
    }
}

fn plan(args: PlanArgs) -> Result<()> {
    let mut cfg = load_config(&args.cfg)?;
    if let Some(v) = args.flow {
        cfg.flow = v;
    }
    if let Some(v) = args.periods {
        cfg.periods = v;
    }
    if let Some(v) = args.realizations {
        cfg.realizations = v;
    }
    if let Some(v) = args.seed {
        cfg.seed = v;
    }
    if let Some(v) = args.oh {
        cfg.oh = v;
    }
    if let Some(v) = args.out {
        cfg.out = v;
    }
    let exp = Experiment::new(cfg)?;
    let out = exp.config.out.clone();
    let snaps = args.snapshots.then(|| out.join("snapshots"));
    let results = exp.run(args.jobs, snaps.as_deref())?;
    let pairs: Vec<_> = results.iter().map(|r| (r.flow, r.aggregate.clone())).collect();
    emit(&out, &pairs)?;
    for (flow, agg) in &pairs {
        println!("{}", FlowSummary::new(*flow, agg).line());
    }
    Ok(())
}

fn gen_demands(args: GenArgs) -> Result<()> {
    let cfg = load_config(&args.cfg)?;
    cfg.validate()?;
    let fiber = cfg.qot.fiber();
    let topo = match &cfg.topology.path {
        Some(p) => parse_topology(&read_text(p)?, &fiber)?,
        None => parse_topology(eonplan_core::experiment::NOBEL_GERMANY, &fiber)?,
    };
    let weights_text = match args.weights.as_ref().or(cfg.demands.weights.as_ref()) {
        Some(p) => read_text(p)?,
        None => NOBEL_GERMANY_WEIGHTS.to_string(),
    };
    let weights = parse_weights(&weights_text, &topo)?;
    let scale = args.scale.unwrap_or(cfg.demands.scale_gbps);
    if !(scale >= 0.0 && scale.is_finite()) {
        return Err(Error::Validation(format!("--scale must be >= 0, got {scale}")));
    }
    let demands = generate_demands(&topo, &weights, scale)?;
    write_or_print(args.out.as_ref(), &demands_to_csv(&topo, &demands))
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Plan(a) => plan(a),
        Command::GenDemands(a) => gen_demands(a),
        Command::DumpTopology(a) => {
            let cfg = load_config(&a)?;
            let fiber = cfg.qot.fiber();
            let topo = match &cfg.topology.path {
                Some(p) => parse_topology(&read_text(p)?, &fiber)?,
                None => parse_topology(eonplan_core::experiment::NOBEL_GERMANY, &fiber)?,
            };
            print!("{}", topo.dump());
            Ok(())
        }
        Command::DumpCatalog(a) => {
            let cfg = load_config(&a)?;
            print!("{}", Catalog::new(&cfg.xcvr)?.to_csv());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
