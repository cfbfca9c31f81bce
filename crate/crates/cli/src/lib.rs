//! Command-line front end: generator specs, experiment drivers and subcommands.

pub mod commands;
pub mod error;
pub mod experiments;
pub mod io;
pub mod spec;

pub use commands::{Cli, Command};
pub use error::CliError;
pub use experiments::{exp_join_dependence, exp_join_normal, exp_measure_one, ExperimentConfig, ExperimentName};
pub use spec::GeneratorSpec;

use clap::Parser;

/// Parses arguments, runs the command and returns the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn std::io::Write, stderr: &mut dyn std::io::Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(stderr, "{}", e.render());
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match cli.command.execute(stdout) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}
