//! Command-line driver: build and certify tables, run cone surveys and
//! Lyapunov estimates, scaling studies and exports.
//!
//! Exit codes: 0 pass, 1 usage or runtime error (or a failed
//! `--expect-positive`), 2 geometry certificate failure, 3 cone violations,
//! 4 escapes or capped flights above the anomaly threshold.

mod commands;
mod config;
mod output;
mod plot;
mod tables;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::Overrides;

#[derive(Parser)]
#[command(name = "flatfocus", version, about = "Billiard tables with nearly flat focusing walls")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a table and write table.json, table.svg and certificate.json.
    #[command(allow_negative_numbers = true)]
    Build(Overrides),
    /// Run the cone survey and write survey.json.
    #[command(allow_negative_numbers = true)]
    VerifyCones(Overrides),
    /// Estimate the Lyapunov exponent and write lyapunov.json and .csv.
    #[command(allow_negative_numbers = true)]
    Lyapunov(Overrides),
    /// Tabulate h_o, areas, diameters and spiral constants over kf_list.
    #[command(allow_negative_numbers = true)]
    ScalingStudy(Overrides),
    /// Write table.svg only.
    #[command(allow_negative_numbers = true)]
    ExportSvg(Overrides),
    /// Follow one orbit and write orbit.csv, orbit.json and orbit.svg.
    #[command(allow_negative_numbers = true)]
    OrbitDump(Overrides),
}

fn run(cli: Cli) -> anyhow::Result<u8> {
    let (args, f): (&Overrides, fn(&config::RunConfig) -> anyhow::Result<u8>) = match &cli.command {
        Command::Build(a) => (a, commands::cmd_build),
        Command::VerifyCones(a) => (a, commands::cmd_verify_cones),
        Command::Lyapunov(a) => (a, commands::cmd_lyapunov),
        Command::ScalingStudy(a) => (a, commands::cmd_scaling_study),
        Command::ExportSvg(a) => (a, commands::cmd_export_svg),
        Command::OrbitDump(a) => (a, commands::cmd_orbit_dump),
    };
    if let Some(n) = args.threads {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    f(&args.resolve()?)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            // Keep exit code 2 for certificate failures only.
            return ExitCode::from(if e.use_stderr() { commands::FAILED } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(commands::FAILED)
        }
    }
}
