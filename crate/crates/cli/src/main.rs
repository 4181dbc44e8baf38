use std::io::Write;
use std::process::ExitCode;

use binpack_cli::args::Cli;
use clap::Parser;

fn main() -> ExitCode {
    env_logger::init();
    let cli = Cli::parse();
    match binpack_cli::run(cli) {
        Ok(out) => {
            print!("{out}");
            std::io::stdout().flush().ok();
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code() as u8)
        }
    }
}
