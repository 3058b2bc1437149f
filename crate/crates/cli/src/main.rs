use std::io::{self, Write};
use std::process::ExitCode;

use clap::Parser;
use dtc_cli::Cli;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let stdout = io::stdout();
    let mut out = stdout.lock();
    let code = match dtc_cli::run(cli, &mut out) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.code
        }
    };
    let _ = out.flush();
    ExitCode::from(code as u8)
}
