use std::io::{self, Write};
use std::process::ExitCode;

use clap::Parser;
use mafol::args::Cli;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let stdout = io::stdout();
    let mut out = stdout.lock();
    let code = mafol::run(&cli, &mut out);
    let _ = out.flush();
    ExitCode::from(code as u8)
}
