use clap::{Parser, Subcommand};
use debond_cli::commands;
use debond_cli::config::PolicyTag;
use debond_cli::{CliError, ScenarioConfig};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "debond", version, about = "Simulate and steer a 1D dynamic debonding front")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Common {
    /// Scenario file (TOML)
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides [output] dir
    #[arg(long)]
    out: Option<PathBuf>,
    /// Time step; overrides [solver] h
    #[arg(long)]
    h: Option<f64>,
    /// Branch selection; overrides [branch] policy
    #[arg(long, value_enum)]
    policy: Option<PolicyTag>,
}

#[derive(Subcommand)]
enum Command {
    /// Run the forward solver with the configured control
    Simulate(Common),
    /// Compute the front up to the end of the initial branch
    InitialBranch(Common),
    /// Compute a final branch backward from T
    FinalBranch(Common),
    /// Check the target against the admissibility conditions
    CheckAdmissible(Common),
    /// Synthesize a control steering the initial state to the target
    Synthesize(Common),
    /// Synthesize (or replay a control) and compare the simulated terminal state with the target
    Verify {
        #[command(flatten)]
        common: Common,
        /// Replay this control.csv instead of synthesizing
        #[arg(long)]
        control: Option<PathBuf>,
    },
}

fn load(c: &Common) -> Result<(ScenarioConfig, PathBuf), CliError> {
    let mut cfg = ScenarioConfig::load(&c.config)?;
    if let Some(h) = c.h {
        cfg.solver.h = h;
    }
    if let Some(p) = c.policy {
        cfg.branch.policy = p;
    }
    let dir = c.out.clone().unwrap_or_else(|| cfg.output_dir());
    Ok((cfg, dir))
}

fn run(cli: Cli) -> Result<i32, CliError> {
    match cli.command {
        Command::Simulate(c) => load(&c).and_then(|(cfg, dir)| commands::simulate(&cfg, &dir)),
        Command::InitialBranch(c) => load(&c).and_then(|(cfg, dir)| commands::initial_branch(&cfg, &dir)),
        Command::FinalBranch(c) => load(&c).and_then(|(cfg, dir)| commands::final_branch(&cfg, &dir)),
        Command::CheckAdmissible(c) => load(&c).and_then(|(cfg, dir)| commands::check_admissible(&cfg, &dir)),
        Command::Synthesize(c) => load(&c).and_then(|(cfg, dir)| commands::synthesize(&cfg, &dir)),
        Command::Verify { common, control } => {
            load(&common).and_then(|(cfg, dir)| commands::verify(&cfg, &dir, control.as_deref()))
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
