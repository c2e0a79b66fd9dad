use std::io::Write;
use std::process::ExitCode;

use anyhow::Context;
use asymqkd::Cli;
use clap::Parser;

fn run(cli: &Cli) -> anyhow::Result<()> {
    let text = asymqkd::execute(&cli.command)?;
    match &cli.out {
        Some(path) => {
            std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))?
        }
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
