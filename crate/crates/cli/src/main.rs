use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use sroel_cli::{run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut out = std::io::stdout().lock();
    let code = match run(&cli, &mut out) {
        Ok(status) => status.code(),
        Err(e) => {
            let _ = out.flush();
            eprintln!("error: {e}");
            2
        }
    };
    ExitCode::from(code)
}
