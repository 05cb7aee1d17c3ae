use std::process::ExitCode;

use capfair::cli::{run, Cli};
use capfair::Error;
use clap::Parser;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Some(n) = cli.command.options().workers.filter(|&n| n > 0) {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            eprintln!("error: cannot size worker pool: {e}");
            return ExitCode::FAILURE;
        }
    }
    match run(&cli.command) {
        Ok(_) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            // usage problems share clap's exit status
            ExitCode::from(if matches!(e, Error::InvalidArgument(_)) {
                2
            } else {
                1
            })
        }
    }
}
