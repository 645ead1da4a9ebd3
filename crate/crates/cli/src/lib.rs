//! Command-line front end for `twistkit`: field evaluation, channel tables,
//! transition amplitudes, parameter scans and the verification battery.
//!
//! Exit codes: 0 success, 1 verification failure, 2 usage or configuration
//! error, 3 domain error, 4 disagreement between the two quadrature oracles.

// Domain guards are written `!(x > 0.0)` so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod args;
pub mod commands;
pub mod error;
pub mod scan;
pub mod table;
pub mod verify;

use std::io::Write;

use args::{Cli, Command};
use error::{CliError, CliResult};

fn jobs_or_default(jobs: Option<usize>) -> CliResult<usize> {
    match jobs {
        Some(0) => Err(CliError::Usage("jobs must be >= 1".into())),
        Some(n) => Ok(n),
        None => Ok(std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)),
    }
}

pub fn run(cli: &Cli) -> CliResult<()> {
    let stdout = std::io::stdout();
    match &cli.command {
        Command::Field(a) => commands::write_json(stdout.lock(), &commands::field_report(a)?),
        Command::Channels(a) => commands::write_table(&commands::channel_table(a)?, a.format, stdout.lock()),
        Command::Amplitude(a) => commands::write_json(stdout.lock(), &commands::amplitude_report(a)?),
        Command::Scan(a) => scan::run(a),
        Command::Verify(a) => {
            let jobs = jobs_or_default(a.jobs)?;
            let mut lock = stdout.lock();
            let outcomes = verify::run(a.only.as_deref(), a.seed, jobs, &mut lock)?;
            lock.flush().map_err(|e| CliError::io("stdout", e))?;
            let failed = outcomes.iter().filter(|o| !o.passed()).count();
            if failed > 0 {
                return Err(CliError::VerifyFailed { failed, total: outcomes.len() });
            }
            Ok(())
        }
    }
}
