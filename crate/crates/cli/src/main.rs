use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use zitter_core::harness::{run_experiment, ExperimentConfig, Scenario, EXIT_USAGE};

#[derive(Parser)]
#[command(
    name = "zitter",
    version,
    about = "Two-sheeted causality and Dirac wave-packet experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Wave-packet runs: free_zitter, positive_energy, em_field, yukawa_field.
    Simulate(RunArgs),
    /// Pure-state causality scan (causal_decide).
    Causal(RunArgs),
    /// Weighted proper-time optimization (optimize).
    Optimize(RunArgs),
    /// Cone membership audit of one element (cone_audit).
    ConeAudit(RunArgs),
    /// Wave-packet run with the causal-evolution check forced on.
    VerifyEvolution(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Experiment config (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Output directory for artifacts and summary.json.
    #[arg(long)]
    out: PathBuf,
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
}

fn accepts(command: &Command, scenario: Scenario) -> bool {
    match command {
        Command::Simulate(_) | Command::VerifyEvolution(_) => scenario.evolves(),
        Command::Causal(_) => scenario == Scenario::CausalDecide,
        Command::Optimize(_) => scenario == Scenario::Optimize,
        Command::ConeAudit(_) => scenario == Scenario::ConeAudit,
    }
}

fn usage(message: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {message}");
    ExitCode::from(EXIT_USAGE as u8)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let args = match &cli.command {
        Command::Simulate(a)
        | Command::Causal(a)
        | Command::Optimize(a)
        | Command::ConeAudit(a)
        | Command::VerifyEvolution(a) => a,
    };
    let text = match std::fs::read_to_string(&args.config) {
        Ok(t) => t,
        Err(e) => return usage(format!("{}: {e}", args.config.display())),
    };
    let mut cfg = match ExperimentConfig::from_toml(&text) {
        Ok(c) => c,
        Err(e) => return usage(e),
    };
    if !accepts(&cli.command, cfg.scenario) {
        return usage(format!(
            "scenario: `{}` is not handled by this command",
            cfg.scenario.name()
        ));
    }
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if matches!(cli.command, Command::VerifyEvolution(_)) {
        cfg.verify.enabled = true;
    }
    match run_experiment(&cfg, &args.out) {
        Ok(summary) => {
            for c in &summary.checks {
                let mark = if c.passed { "pass" } else { "FAIL" };
                println!(
                    "{mark} {} = {} ({} {})",
                    c.name, c.value, c.relation, c.threshold
                );
            }
            println!("summary: {}", args.out.join("summary.json").display());
            ExitCode::from(summary.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
