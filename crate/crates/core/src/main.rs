use std::io::Write;
use std::process::ExitCode;

use clap::{CommandFactory, Parser};

use betacount::cli::{execute, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match cli.common.config() {
        Err(usage) => Cli::command().error(clap::error::ErrorKind::ArgumentConflict, usage).exit(),
        Ok(Err(e)) => return fail(&e),
        Ok(Ok(cfg)) => cfg,
    };
    let bytes = match execute(&cfg, &cli.command) {
        Ok(out) => out.render(cfg.format),
        Err(e) => return fail(&e),
    };
    let written = match &cfg.out {
        Some(path) => std::fs::write(path, &bytes),
        None => std::io::stdout().lock().write_all(&bytes),
    };
    match written {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(&e),
    }
}

fn fail(e: &dyn std::fmt::Display) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(1)
}
