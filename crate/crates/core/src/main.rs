use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use levelwise::report::{run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (out, code) = run(&cli);
    let _ = std::io::stdout().write_all(out.as_bytes());
    ExitCode::from(code as u8)
}
