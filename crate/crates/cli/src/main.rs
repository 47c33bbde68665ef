mod commands;
mod config;
mod grid;
mod output;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::process::ExitCode;

use anyhow::Context;
use clap::Parser;
use serde_json::json;

use config::{Cli, ConfigError, Format, RunConfig};

const EXIT_CONFIG: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;

fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<ConfigError>().is_some() {
        return EXIT_CONFIG;
    }
    if let Some(core) = err.downcast_ref::<cutoff_core::Error>() {
        use cutoff_core::Error as E;
        return match core {
            E::Domain { .. } | E::InvalidParameter { .. } | E::InvalidRange { .. } => EXIT_CONFIG,
            _ => EXIT_NUMERICAL,
        };
    }
    if err.downcast_ref::<io::Error>().is_some() {
        return EXIT_CONFIG;
    }
    EXIT_NUMERICAL
}

fn execute(cli: &Cli) -> anyhow::Result<()> {
    let cfg = RunConfig::resolve(cli)?;
    let table = commands::run(&cfg)?;
    let params = cfg.params();
    let mut sink: Box<dyn Write> = match &cfg.out {
        Some(path) => Box::new(BufWriter::new(
            File::create(path).with_context(|| format!("cannot create {}", path.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    };
    match cfg.format {
        Format::Csv => output::write_csv(&mut sink, &params, &table)?,
        Format::Json => output::write_json(&mut sink, &params, &table)?,
    }
    sink.flush()?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if e.use_stderr() => {
            let record = json!({ "error": "config", "message": e.to_string().trim_end(), "exit_code": EXIT_CONFIG });
            eprintln!("{record}");
            return ExitCode::from(EXIT_CONFIG);
        }
        Err(e) => {
            // --help and --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
    };
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            let code = exit_code(&err);
            let kind = if code == EXIT_CONFIG { "config" } else { "numerical" };
            let record = json!({ "error": kind, "message": format!("{err:#}"), "exit_code": code });
            eprintln!("{record}");
            ExitCode::from(code)
        }
    }
}
