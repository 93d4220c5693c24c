use std::fs::File;
use std::io::{self, Write};
use std::path::Path;

use serde::Serialize;

use crate::config::{CliError, Format, RunConfig};

#[derive(Serialize)]
struct JsonReport<'a, R: Serialize> {
    command: &'a str,
    rows: &'a [R],
}

/// Write `rows` as CSV (header plus one line per row) or as a JSON object with a `rows` array.
pub fn emit<R: Serialize>(config: &RunConfig, command: &str, rows: &[R]) -> Result<(), CliError> {
    let path = config.output_path(command);
    let sink: Box<dyn Write> = match &path {
        Some(p) => Box::new(create(p)?),
        None => Box::new(io::stdout().lock()),
    };
    let io_err = |e: &dyn std::fmt::Display| {
        CliError::Io(match &path {
            Some(p) => format!("{}: {e}", p.display()),
            None => format!("stdout: {e}"),
        })
    };
    match config.format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(sink);
            for r in rows {
                w.serialize(r).map_err(|e| io_err(&e))?;
            }
            w.flush().map_err(|e| io_err(&e))?;
        }
        Format::Json => {
            let mut sink = sink;
            serde_json::to_writer_pretty(&mut sink, &JsonReport { command, rows }).map_err(|e| io_err(&e))?;
            writeln!(sink).and_then(|_| sink.flush()).map_err(|e| io_err(&e))?;
        }
    }
    Ok(())
}

fn create(p: &Path) -> Result<File, CliError> {
    File::create(p).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))
}
