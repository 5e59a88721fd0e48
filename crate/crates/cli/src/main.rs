//! Command-line runner: loads a config, applies overrides, runs one scenario
//! and writes the report.

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::Parser;
use memnet_core::harness::{emit_report, run_scenario, ExperimentConfig, ScenarioId, PRESETS};

#[derive(Parser, Debug)]
#[command(name = "memnet-sim", version, about = "Simulate a heralded three-node memory network")]
struct Args {
    /// JSON experiment configuration.
    #[arg(long, conflicts_with = "preset")]
    config: Option<PathBuf>,

    /// Built-in configuration (ideal, single_pair, three_node_fit).
    #[arg(long)]
    preset: Option<String>,

    /// Scenario to run; overrides the config.
    #[arg(long)]
    scenario: Option<ScenarioId>,

    /// Master seed; overrides the config.
    #[arg(long)]
    seed: Option<u64>,

    /// Samples per setting or sweep point; overrides the config.
    #[arg(long)]
    samples: Option<u64>,

    /// Output directory; overrides the config.
    #[arg(long)]
    out: Option<PathBuf>,

    /// Worker threads (0 = all cores).
    #[arg(long, default_value_t = 0)]
    workers: usize,

    /// Log progress to stderr.
    #[arg(short, long)]
    verbose: bool,

    /// Print the resolved configuration and exit.
    #[arg(long)]
    print_config: bool,
}

fn load(args: &Args) -> Result<ExperimentConfig> {
    let mut cfg = match (&args.config, &args.preset) {
        (Some(path), _) => ExperimentConfig::load(path)
            .with_context(|| format!("loading {}", path.display()))?,
        (None, Some(name)) => ExperimentConfig::preset(name)
            .with_context(|| format!("known presets: {}", PRESETS.join(", ")))?,
        (None, None) => bail!("one of --config or --preset is required"),
    };
    if let Some(s) = args.scenario {
        cfg.scenario = Some(s);
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if let Some(n) = args.samples {
        cfg.samples = n;
    }
    if let Some(out) = &args.out {
        cfg.output_dir = Some(out.clone());
    }
    cfg.validate().context("invalid configuration")?;
    Ok(cfg)
}

fn run(args: Args) -> Result<()> {
    let cfg = load(&args)?;
    if args.print_config {
        println!("{}", cfg.to_json()?);
        return Ok(());
    }
    let out = cfg
        .output_dir
        .clone()
        .context("no output directory (use --out)")?;
    let report = run_scenario(&cfg, args.workers)?;
    let written = emit_report(&report, &out)?;
    log::info!(
        "{} finished in {:.2} s, {} files written",
        report.body.scenario,
        report.meta.wall_time_s,
        written.len()
    );
    for (key, value) in &report.body.derived {
        println!("{key} = {value}");
    }
    Ok(())
}

fn main() -> ExitCode {
    let args = Args::parse();
    let level = if args.verbose {
        log::LevelFilter::Info
    } else {
        log::LevelFilter::Warn
    };
    env_logger::Builder::new().filter_level(level).init();
    match run(args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
