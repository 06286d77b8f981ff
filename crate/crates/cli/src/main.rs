use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod commands;
mod config;

/// Experiments with the Schwarzian derivative and its variational problem.
#[derive(Parser)]
#[command(name = "schwarz", version, about, allow_negative_numbers = true)]
struct Cli {
    /// JSON file with default values for the command's flags; flags take precedence
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate u'''' = F(u', u'', u''') from an initial jet and write the trajectory as CSV
    Integrate(commands::IntegrateArgs),
    /// Evaluate the contact invariants W0, W1 of a fourth-order equation at jets
    Invariants(commands::InvariantsArgs),
    /// Describe and check a closed-form solution (At+B)/(Ct+D) composed with the σ-family
    Family(commands::FamilyArgs),
    /// Coefficients of the linearized equation along a base solution
    Linearize(commands::LinearizeArgs),
    /// Probe whether a curve is critical for the Schwarzian functional
    Variation(commands::VariationArgs),
}

/// Exit codes.
pub const EXIT_INPUT: u8 = 1;
pub const EXIT_SINGULAR: u8 = 2;
pub const EXIT_EXPECTATION: u8 = 3;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("SCHWARZ_LOG", "warn"))
        .format_timestamp(None)
        .init();

    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            // Usage errors are input errors; --help and --version are not errors at all.
            return ExitCode::from(if e.use_stderr() { EXIT_INPUT } else { 0 });
        }
    };
    let result = config::load(cli.config.as_deref()).and_then(|cfg| match cli.command {
        Command::Integrate(a) => commands::integrate(a, &cfg),
        Command::Invariants(a) => commands::invariants(a, &cfg),
        Command::Family(a) => commands::family(a, &cfg),
        Command::Linearize(a) => commands::linearize(a, &cfg),
        Command::Variation(a) => commands::variation(a, &cfg),
    });
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &anyhow::Error) -> u8 {
    let singular = e.chain().any(|c| {
        matches!(
            c.downcast_ref::<schwarz_core::Error>(),
            Some(schwarz_core::Error::SingularTime { .. })
        )
    });
    if singular {
        EXIT_SINGULAR
    } else {
        EXIT_INPUT
    }
}
