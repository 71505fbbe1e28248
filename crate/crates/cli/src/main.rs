//! Scenario-driven GMTI pipeline runner.
//!
//! Exit codes: 0 success, 1 usage error, 2 data/config error, 3 internal.

mod config;
mod pipeline;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use pipeline::Method;
use rdgmti::Error;

#[derive(Parser)]
#[command(
    name = "rdgmti",
    about = "Dual-channel range-Doppler clutter suppression and moving-target imaging"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Proposed,
    Dpca,
    None,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Method {
        match m {
            MethodArg::Proposed => Method::Proposed,
            MethodArg::Dpca => Method::Dpca,
            MethodArg::None => Method::None,
        }
    }
}

#[derive(Args)]
struct SimulateArgs {
    /// Scenario config file
    #[arg(long)]
    config: PathBuf,
    /// Output cube file
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ProcessArgs {
    /// Input cube file (raw or range-compressed)
    #[arg(long = "in")]
    input: PathBuf,
    /// Scenario config (geometry, truth, and processing parameters)
    #[arg(long)]
    config: PathBuf,
    /// Suppression method
    #[arg(long, value_enum)]
    method: MethodArg,
    /// Output image base path (writes .csv and .pgm)
    #[arg(long)]
    out_image: PathBuf,
    /// Output JSON report path
    #[arg(long)]
    report: PathBuf,
}

#[derive(Args)]
struct ScanArgs {
    /// Input cube file
    #[arg(long = "in")]
    input: PathBuf,
    /// Scenario config
    #[arg(long)]
    config: PathBuf,
    /// Comma-separated assumed range velocities in m/s
    #[arg(long)]
    vy: String,
    /// Output CSV report path
    #[arg(long)]
    report: PathBuf,
}

#[derive(Args)]
struct E2eArgs {
    /// Scenario config
    #[arg(long)]
    config: PathBuf,
    /// Output directory
    #[arg(long)]
    out_dir: PathBuf,
    /// Overwrite a non-empty output directory
    #[arg(long)]
    force: bool,
    /// Override the simulation noise seed
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Synthesize the scenario into a cube file
    Simulate(SimulateArgs),
    /// Run one suppression method over a cube and write image + report
    Process(ProcessArgs),
    /// Score a list of assumed velocities with the proposed method
    Scan(ScanArgs),
    /// Simulate, run all methods, scan, and summarize into a directory
    E2e(E2eArgs),
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        // data and configuration problems
        Error::Config(_)
        | Error::BadMagic
        | Error::VersionMismatch(_)
        | Error::Truncated { .. }
        | Error::DimensionOverflow
        | Error::DomainMismatch { .. }
        | Error::DimensionMismatch(_)
        | Error::Degenerate(_)
        | Error::Io(_) => 2,
        // InvalidArgument covers both misuse and stage failures; stage
        // failures carry a "stage " prefix and count as data errors
        Error::InvalidArgument(msg) => {
            if msg.starts_with("stage ") {
                2
            } else {
                1
            }
        }
    }
}

fn parse_vy_list(text: &str) -> Result<Vec<f64>, Error> {
    let mut out = Vec::new();
    for part in text.split(',') {
        let part = part.trim();
        if part.is_empty() {
            continue;
        }
        out.push(
            part.parse::<f64>()
                .map_err(|_| Error::invalid(format!("bad velocity `{part}` in --vy")))?,
        );
    }
    if out.is_empty() {
        return Err(Error::invalid("--vy list is empty"));
    }
    Ok(out)
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Simulate(args) => {
            let scenario = config::load_scenario(&args.config)?;
            let digest = pipeline::run_simulate(&scenario, &args.out)?;
            println!("{digest}");
            Ok(())
        }
        Command::Process(args) => {
            let scenario = config::load_scenario(&args.config)?;
            pipeline::run_process(
                &scenario,
                &args.input,
                args.method.into(),
                &args.out_image,
                &args.report,
                false,
            )
        }
        Command::Scan(args) => {
            let scenario = config::load_scenario(&args.config)?;
            let velocities = parse_vy_list(&args.vy)?;
            let csv = pipeline::run_scan(&scenario, &args.input, &velocities)?;
            std::fs::write(&args.report, csv)?;
            Ok(())
        }
        Command::E2e(args) => {
            let mut scenario = config::load_scenario(&args.config)?;
            if let Some(seed) = args.seed {
                scenario.noise_seed = seed;
            }
            pipeline::run_e2e(&scenario, &args.out_dir, args.force)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // help/version are successful exits; real parse errors are usage
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
                    ExitCode::SUCCESS
                }
                _ => ExitCode::from(1),
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}
