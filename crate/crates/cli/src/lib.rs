//! Experiment runner for the adanorm optimizers.
//!
//! Four subcommands write CSV and SVG artifacts under `--out`:
//!
//! * `bench`: optimizers on analytic problems.
//! * `train`: the MLP on synthetic blobs, with gradient-norm telemetry.
//! * `regret`: online convex regret and its `c*sqrt(T)` fit.
//! * `sweep`: grids over optimizer, gamma, alpha, batch size and norm target.
//!
//! Every run directory holds a `manifest.txt` from which the run can be
//! repeated. Exit codes: 0 success, 1 a configuration diverged in every
//! repeat (or a runtime failure), 2 invalid input.

pub mod args;
pub mod bench;
pub mod common;
pub mod error;
pub mod regret;
pub mod replay;
pub mod sweep;
pub mod train;

use std::ffi::OsString;

use clap::{CommandFactory, Parser};

use args::{Cli, Command};
pub use error::{CliError, CliResult, EXIT_OK, EXIT_RUNTIME, EXIT_USAGE};

pub fn execute(command: &Command) -> CliResult<()> {
    match command {
        Command::Bench(a) => bench::run(a),
        Command::Train(a) => train::run(a),
        Command::Regret(a) => regret::run(a),
        Command::Sweep(a) => sweep::run(a),
    }
}

/// Parses `args` (including the program name), runs the subcommand and
/// returns the process exit code. Errors go to stderr.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let subcommand = args.get(1).map(|a| a.to_string_lossy().into_owned());
    let expanded = match args::expand_config(args) {
        Ok(a) => a,
        Err(e) => return report(&e, subcommand.as_deref()),
    };
    let cli = match Cli::try_parse_from(expanded) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(&cli.command) {
        Ok(()) => EXIT_OK,
        Err(e) => report(&e, Some(cli.command.name())),
    }
}

fn report(e: &CliError, subcommand: Option<&str>) -> i32 {
    eprintln!("error: {e}");
    let code = e.exit_code();
    if code == EXIT_USAGE {
        let mut cmd = Cli::command();
        cmd.build();
        let usage = match subcommand.and_then(|s| cmd.find_subcommand_mut(s)) {
            Some(sub) => sub.render_usage(),
            None => cmd.render_usage(),
        };
        eprintln!("\n{usage}");
        eprintln!("For more information, try '--help'.");
    }
    code
}
