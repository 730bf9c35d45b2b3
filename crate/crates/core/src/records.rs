//! Flat CSV rows and JSON documents for protocol runs.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::protocol::TeleportRun;

/// Value of the `branch` column on the per-run aggregate row.
pub const AGGREGATE_BRANCH: &str = "aggregate";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProtocolRecord {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub c_a_re: f64,
    pub c_a_im: f64,
    pub c_b_re: f64,
    pub c_b_im: f64,
    pub path: String,
    pub branch: String,
    pub probability: f64,
    pub fidelity: f64,
    pub avg_fidelity: f64,
    pub inconclusive_rate: f64,
    pub seed: u64,
}

/// One row per branch followed by the aggregate row.
pub fn run_records(run: &TeleportRun, seed: u64) -> Vec<ProtocolRecord> {
    let row = |branch: String, probability: f64, fidelity: f64| ProtocolRecord {
        alpha: run.alpha,
        beta: run.beta,
        gamma: run.target.gamma,
        c_a_re: run.target.c_a.re,
        c_a_im: run.target.c_a.im,
        c_b_re: run.target.c_b.re,
        c_b_im: run.target.c_b.im,
        path: run.path.name().to_string(),
        branch,
        probability,
        fidelity,
        avg_fidelity: run.average_fidelity,
        inconclusive_rate: run.inconclusive_rate,
        seed,
    };
    let mut rows: Vec<ProtocolRecord> = run
        .branches
        .iter()
        .map(|b| row(b.outcome.label.to_string(), b.outcome.probability, b.branch_fidelity))
        .collect();
    rows.push(row(AGGREGATE_BRANCH.to_string(), run.probabilities().iter().sum(), run.average_fidelity));
    rows
}

/// Serializes any row type as CSV: header row, `,` separator, `\n` line
/// endings, shortest round-trip float formatting.
pub fn to_csv<T: Serialize>(rows: &[T]) -> Result<String> {
    let mut writer = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    for r in rows {
        writer.serialize(r).map_err(|e| Error::InvalidArgument(format!("csv: {e}")))?;
    }
    let bytes = writer.into_inner().map_err(|e| Error::InvalidArgument(format!("csv: {e}")))?;
    String::from_utf8(bytes).map_err(|e| Error::InvalidArgument(format!("csv: {e}")))
}

pub fn to_json<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(value)?)
}
