mod cli;

use std::process::ExitCode;

use clap::Parser;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().filter_or("KHAB_LOG_LEVEL", "warn"))
        .format_timestamp(None)
        .init();
    ExitCode::from(cli::run(cli::Cli::parse()))
}
