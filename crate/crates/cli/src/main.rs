use std::process::ExitCode;

use clap::Parser;
use twistkit_cli::args::Cli;

fn main() -> ExitCode {
    let cli = Cli::try_parse().unwrap_or_else(|e| e.exit());
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    env_logger::Builder::new().filter_level(level).parse_default_env().target(env_logger::Target::Stderr).init();
    match twistkit_cli::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            log::error!("{e}");
            if log::max_level() < log::LevelFilter::Error {
                eprintln!("error: {e}");
            }
            ExitCode::from(e.exit_code())
        }
    }
}
