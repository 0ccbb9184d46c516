#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod args;
mod commands;
mod error;
mod output;
mod settings;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use crate::args::Cli;
use crate::error::{validation, CliError, CliResult};
use crate::output::{check_writable, write, Format};
use crate::settings::Resolver;

fn run(cli: Cli) -> CliResult<()> {
    let mut r = Resolver::new(&cli.options)?;
    let format = match r.text("format", "csv").as_str() {
        "csv" => Format::Csv,
        "json" => Format::Json,
        other => {
            return Err(validation(format!(
                "--format: expected csv or json, got '{other}'"
            )))
        }
    };
    let out = r.optional_text("out").map(PathBuf::from);
    if let Some(path) = &out {
        check_writable(path)?;
    }
    let workers: Option<usize> = r.optional("workers")?;
    if workers == Some(0) {
        return Err(validation("--workers must be at least 1"));
    }
    let plan = commands::plan(cli.command, &mut r)?;

    if let Some(n) = workers {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| validation(format!("--workers: {e}")))?;
    }
    // Output metadata echoes everything except where it was written and how
    // many threads computed it, so identical jobs give identical files.
    let spec = r
        .echo()
        .into_iter()
        .filter(|(k, _)| k != "out" && k != "workers")
        .collect();
    let table = plan.execute(cli.command, spec)?;
    let text = table.render(format);
    match out {
        Some(path) => write(&path, &text),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| CliError::Io {
                path: "<stdout>".into(),
                message: e.to_string(),
            }),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
