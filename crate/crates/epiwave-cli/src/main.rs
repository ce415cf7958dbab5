//! `epiwave` binary: scenario subcommands over preset/config-driven runs.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 configuration/validation error,
//! 3 numerical failure.

use clap::{Args, Parser, Subcommand};
use epiwave_cli::config::{parse_config_with_base, preset, Scenario};
use epiwave_cli::run::run;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "epiwave",
    version,
    about = "SQIR-V epidemic model with distributed information delay: \
             simulation, equilibria, and Hopf stability analysis"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate the delay system and classify the long-run behaviour.
    Simulate(RunArgs),
    /// Reproduction number, prevalence cubic and every steady state.
    Equilibria(RunArgs),
    /// Critical reporting delays and stable/unstable delay intervals.
    Hopf(RunArgs),
    /// Critical-delay curves swept over q1, q2 or delta.
    StabilityMap(RunArgs),
    /// One run per initial infection level in a multi-equilibria regime.
    Multistability(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// TOML config; missing fields fall back to the preset.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Parameter preset used as the base
    /// (fig2|fig3|fig4|fig5|fig6|fig7|fig12|baseline).
    #[arg(long, default_value = "baseline")]
    preset: String,
    /// Directory the CSV files are written to.
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

const EXIT_IO: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (scenario, args) = match &cli.command {
        Command::Simulate(a) => (Scenario::Simulate, a),
        Command::Equilibria(a) => (Scenario::Equilibria, a),
        Command::Hopf(a) => (Scenario::Hopf, a),
        Command::StabilityMap(a) => (Scenario::StabilityMap, a),
        Command::Multistability(a) => (Scenario::Multistability, a),
    };

    let base = match preset(&args.preset) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    let text = match &args.config {
        Some(path) => match std::fs::read_to_string(path) {
            Ok(text) => text,
            Err(e) => {
                eprintln!("error: cannot read {}: {e}", path.display());
                return ExitCode::from(EXIT_IO);
            }
        },
        None => String::new(),
    };
    // The subcommand decides the scenario, overriding any `scenario` key
    // from the document; the merged config is revalidated afterwards.
    let mut cfg = match parse_config_with_base(&text, &base) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    if cfg.scenario != scenario {
        cfg.scenario = scenario;
        if let Err(e) = parse_config_with_base("", &cfg).map(|c| cfg = c) {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    }

    let report = match run(&cfg) {
        Ok(report) => report,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_NUMERICAL);
        }
    };

    if let Err(e) = std::fs::create_dir_all(&args.out) {
        eprintln!("error: cannot create {}: {e}", args.out.display());
        return ExitCode::from(EXIT_IO);
    }
    for (name, contents) in &report.files {
        let path = args.out.join(name);
        if let Err(e) = std::fs::write(&path, contents) {
            eprintln!("error: cannot write {}: {e}", path.display());
            return ExitCode::from(EXIT_IO);
        }
        println!("wrote {}", path.display());
    }
    print!("{}", report.summary);
    ExitCode::SUCCESS
}
