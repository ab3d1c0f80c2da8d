use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use urllc_lab::presets::Bound;
use urllc_lab::{list_presets, parse_config, run_experiment, Experiment, Value};

#[derive(Parser)]
#[command(
    name = "urllc-lab",
    version,
    about = "Vehicular URLLC experiment driver"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Outage versus latency for MRC receivers.
    OutageSweep(RunArgs),
    /// Finite-blocklength rate over latency, error probability and SNR.
    FblSurface(RunArgs),
    /// Freeway downlink maximum latency versus traffic density.
    V2iLatency(RunArgs),
    /// Urban spectrum-sharing episode with latency histograms.
    V2vEpisode(RunArgs),
    /// Print the use-case requirement presets as CSV.
    Presets,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    /// Overrides the config seed.
    #[arg(long, env = "URLLC_LAB_SEED")]
    seed: Option<u64>,
    /// Overrides the config output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn bound(b: Option<Bound>) -> (String, String) {
    match b {
        Some(b) => (format!("{:?}", b.lower), format!("{:?}", b.upper)),
        None => (String::new(), String::new()),
    }
}

fn print_presets() {
    println!("name,pattern,latency_class,latency_min_s,latency_max_s,reliability_class,error_min,error_max,data_rate");
    for p in list_presets() {
        let (lmin, lmax) = bound(p.latency.bound());
        let (rmin, rmax) = bound(p.reliability.bound());
        println!(
            "{},{},{},{lmin},{lmax},{},{rmin},{rmax},{}",
            p.name,
            p.pattern.name(),
            p.latency.name(),
            p.reliability.name(),
            p.data_rate.name()
        );
    }
}

fn run(experiment: Experiment, args: RunArgs) -> anyhow::Result<()> {
    let text = fs::read_to_string(&args.config)
        .with_context(|| format!("reading {}", args.config.display()))?;
    let mut cfg = parse_config(&text).with_context(|| args.config.display().to_string())?;
    if cfg.experiment() != experiment {
        bail!(urllc_lab::Error::ExperimentMismatch {
            declared: cfg.experiment().to_string(),
            requested: experiment.to_string(),
        });
    }
    if let Some(seed) = args.seed {
        cfg.set("seed", Value::UInt(seed))?;
    }
    if let Some(out) = args.out {
        let out = out
            .to_str()
            .context("output directory must be valid UTF-8")?
            .to_string();
        cfg.set("output_dir", Value::Text(out))?;
    }
    let summary = run_experiment(&cfg).with_context(|| args.config.display().to_string())?;
    for f in summary.files {
        println!("{}", f.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::OutageSweep(a) => run(Experiment::OutageSweep, a),
        Command::FblSurface(a) => run(Experiment::FblSurface, a),
        Command::V2iLatency(a) => run(Experiment::V2iLatency, a),
        Command::V2vEpisode(a) => run(Experiment::V2vEpisode, a),
        Command::Presets => {
            print_presets();
            Ok(())
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
