use std::path::Path;

use serde::Serialize;

use crate::config::OutputFormat;
use crate::error::CliError;

/// Renders `rows` as CSV, or `doc` as JSON, and writes it to `out` (stdout
/// when absent).
pub fn emit<R: Serialize, D: Serialize>(rows: &[R], doc: &D, format: OutputFormat, out: Option<&Path>) -> Result<(), CliError> {
    let text = match format {
        OutputFormat::Csv => cat_teleport::records::to_csv(rows)?,
        OutputFormat::Json => {
            let mut s = cat_teleport::records::to_json(doc)?;
            s.push('\n');
            s
        }
    };
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}
