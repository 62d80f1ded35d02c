use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use qwork_cli::{cmd_mf, cmd_oscillator, cmd_ttm, cmd_verify, CommandError, Outcome, Overrides, Preset, RunConfig};

/// Work statistics of driven quantum systems: two-time measurement and
/// measurement-free paradigms, fluctuation identities and bounds.
#[derive(Parser)]
#[command(name = "qwork", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Two-time measurement work distribution and Jarzynski check.
    Ttm(Common),
    /// Measurement-free work distribution, relative entropy and bounds.
    Mf(Common),
    /// Closed-form oscillator sweep (figure data).
    Oscillator(Common),
    /// Residual report over seeded random protocols.
    Verify(Common),
}

#[derive(Args)]
struct Common {
    /// TOML run configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory (default: current directory).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Oscillator parameter set.
    #[arg(long, value_enum)]
    preset: Option<Preset>,
}

fn load(c: &Common) -> Result<RunConfig, CommandError> {
    let mut config = match &c.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    config.apply(&Overrides {
        out: c.out.clone(),
        seed: c.seed,
        preset: c.preset,
    });
    Ok(config)
}

fn run(cli: Cli) -> Result<Outcome, CommandError> {
    match cli.command {
        Command::Ttm(c) => cmd_ttm(&load(&c)?),
        Command::Mf(c) => cmd_mf(&load(&c)?),
        Command::Oscillator(c) => cmd_oscillator(&load(&c)?),
        Command::Verify(c) => cmd_verify(&load(&c)?),
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
        Ok(outcome) => {
            for f in &outcome.files {
                eprintln!("wrote {}", f.display());
            }
            println!("{}", outcome.summary);
            ExitCode::from(outcome.status.exit_code())
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
