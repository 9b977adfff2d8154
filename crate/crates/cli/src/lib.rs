//! Command-line driver for `mafol-core`: sampling scans, leaf traces,
//! weight recovery, bidegree checks and the invariant suite.

pub mod args;
pub mod checks;
pub mod commands;
pub mod expectations;
pub mod session;
pub mod suite;

use std::io::Write;

use args::{Cli, Command};
use session::Session;

/// Process exit codes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Exit {
    Ok = 0,
    /// A check failed or an internal invariant was violated.
    CheckFailed = 1,
    /// Bad input or usage.
    InputError = 2,
}

fn dispatch(cli: &Cli, out: &mut dyn Write) -> anyhow::Result<Exit> {
    match &cli.command {
        Command::Analyze { potential, common } => commands::analyze(potential, &Session::from_args(common)?, out),
        Command::Trace {
            potential,
            base,
            t_min,
            t_max,
            t_points,
            s_min,
            s_max,
            s_points,
            common,
        } => {
            if *t_points == 0 || *s_points == 0 {
                anyhow::bail!("grids need at least one point");
            }
            let args = commands::TraceArgs {
                base,
                t: (*t_min, *t_max, *t_points),
                s: (*s_min, *s_max, *s_points),
            };
            commands::trace(potential, &args, &Session::from_args(common)?, out)
        }
        Command::Weights { potential, common } => commands::weights(potential, &Session::from_args(common)?, out),
        Command::Burns { potential, grid, common } => {
            commands::burns(potential, *grid, &Session::from_args(common)?, out)
        }
        Command::Suite {
            dir,
            expectations,
            checks,
            burns_grid,
            common,
        } => {
            let args = suite::SuiteArgs {
                dir,
                expectations: expectations.as_deref(),
                checks: checks.as_deref(),
                burns_grid: *burns_grid,
            };
            Ok(suite::run_suite(&args, &Session::from_args(common)?, out)?.1)
        }
        Command::List => commands::list(out),
    }
}

/// Runs a parsed command; every error is reported on stderr as an input
/// error.
pub fn run(cli: &Cli, out: &mut dyn Write) -> Exit {
    match dispatch(cli, out) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            Exit::InputError
        }
    }
}
