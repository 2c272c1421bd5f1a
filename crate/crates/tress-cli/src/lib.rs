//! Library surface of the `tress` command: argument definitions, file
//! formats, report writers, and the subcommand implementations. The binary in
//! `main.rs` is a thin wrapper around [`run`].

pub mod cli;
pub mod commands;
pub mod io;
pub mod report;

use clap::Parser;

use cli::{Cli, Command};
use commands::{cmd_benchmark, cmd_bootstrap, cmd_compare, cmd_ess, cmd_simulate, CmdError};

/// Parse arguments and dispatch; returns the process exit code.
///
/// Exit codes: 0 success, 1 usage error, 2 data error (unreadable or
/// malformed input, mismatched taxon sets), 3 degenerate statistics under
/// `--strict`.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return 1;
        }
    };
    let result = match &cli.command {
        Command::Ess(args) => cmd_ess(args),
        Command::Compare(args) => cmd_compare(args),
        Command::Simulate(args) => cmd_simulate(args),
        Command::Benchmark(args) => cmd_benchmark(args),
        Command::Bootstrap(args) => cmd_bootstrap(args),
    };
    match result {
        Ok(degenerate) => {
            if degenerate && cli.strict {
                3
            } else {
                0
            }
        }
        Err(CmdError::Usage(msg)) => {
            eprintln!("usage error: {msg}");
            1
        }
        Err(CmdError::Data(err)) => {
            eprintln!("error: {err:#}");
            2
        }
    }
}
