use std::path::Path;

use cat_teleport::protocol::{sample_index, seeded_rng};
use cat_teleport::quasi_bell::{eigen_residual_with, BellLabel, CombinedOp, DisplacementQuantum};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{ExperimentConfig, SampleMode, SweepKind};
use crate::error::CliError;
use crate::output::emit;
use crate::run::protocol_run;

#[derive(Clone, Debug, Serialize)]
pub struct SweepRow {
    pub kind: SweepKind,
    pub index: usize,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    /// Largest eigen-residual, or `1 − average fidelity`.
    pub value: f64,
    pub avg_fidelity: Option<f64>,
    pub inconclusive_rate: Option<f64>,
    /// Mean branch fidelity over `trials` seeded draws (sample mode only).
    pub sampled_fidelity: Option<f64>,
    /// Least-squares slope of `log value` against `log amplitude` over the grid.
    pub log_log_slope: Option<f64>,
    pub seed: u64,
}

fn fitted_slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    if xs.len() < 2 || ys.iter().any(|&y| !(y > 0.0)) {
        return None;
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let num: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let den: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    (den > 0.0).then(|| num / den)
}

fn grid_point(cfg: &ExperimentConfig, kind: SweepKind, index: usize, a: f64) -> Result<SweepRow, CliError> {
    let mut row = SweepRow {
        kind,
        index,
        alpha: a,
        beta: a,
        gamma: a,
        value: 0.0,
        avg_fidelity: None,
        inconclusive_rate: None,
        sampled_fidelity: None,
        log_log_slope: None,
        seed: cfg.seed,
    };
    match kind {
        SweepKind::Residual => {
            let q = DisplacementQuantum::default();
            for label in BellLabel::ALL {
                for op in [CombinedOp::PbDa, CombinedOp::PaDb] {
                    row.value = row.value.max(eigen_residual_with(label, op, q, a, a, cfg.rule)?);
                }
            }
        }
        SweepKind::Fidelity => {
            let run = protocol_run(cfg, cfg.path, a, a, a, cfg.rule)?;
            row.value = 1.0 - run.average_fidelity;
            row.avg_fidelity = Some(run.average_fidelity);
            row.inconclusive_rate = Some(run.inconclusive_rate);
            if cfg.mode == SampleMode::Sample {
                let mut rng = seeded_rng(cfg.seed, index as u64);
                let p = run.probabilities();
                let mut total = 0.0;
                for _ in 0..cfg.trials {
                    total += run.branches[sample_index(&p, &mut rng)?].branch_fidelity;
                }
                row.sampled_fidelity = Some(total / cfg.trials as f64);
            }
        }
    }
    Ok(row)
}

/// Evaluates every grid point independently; point `k` draws from stream `k`
/// of the configured seed, so the output does not depend on scheduling.
pub fn sweep_rows(cfg: &ExperimentConfig) -> Result<Vec<SweepRow>, CliError> {
    let sweep = cfg.sweep.as_ref().ok_or_else(|| CliError::Config("sweep needs a `sweep` section with amplitudes".into()))?;
    if sweep.amplitudes.is_empty() {
        return Err(CliError::Config("sweep.amplitudes must not be empty".into()));
    }
    let mut rows = sweep
        .amplitudes
        .par_iter()
        .enumerate()
        .map(|(k, &a)| grid_point(cfg, sweep.kind, k, a))
        .collect::<Result<Vec<_>, _>>()?;
    let values: Vec<f64> = rows.iter().map(|r| r.value).collect();
    let slope = fitted_slope(&sweep.amplitudes, &values);
    for r in &mut rows {
        r.log_log_slope = slope;
    }
    Ok(rows)
}

pub fn cmd_sweep(cfg: &ExperimentConfig) -> Result<(), CliError> {
    let rows = sweep_rows(cfg)?;
    if let Some(s) = rows[0].log_log_slope {
        eprintln!("{} grid points, fitted log-log slope {s:.4}", rows.len());
    }
    emit(&rows, &rows, cfg.format, cfg.out.as_deref().map(Path::new))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::SweepConfig;

    fn cfg(kind: SweepKind, amplitudes: Vec<f64>) -> ExperimentConfig {
        ExperimentConfig { sweep: Some(SweepConfig { kind, amplitudes }), ..Default::default() }
    }

    #[test]
    fn residual_slope_is_minus_two() {
        let rows = sweep_rows(&cfg(SweepKind::Residual, vec![4.0, 8.0, 16.0, 32.0])).unwrap();
        assert_eq!(rows.len(), 4);
        let s = rows[0].log_log_slope.unwrap();
        assert!((s + 2.0).abs() < 0.1, "{s}");
    }

    #[test]
    fn fidelity_column_is_monotone() {
        let rows = sweep_rows(&cfg(SweepKind::Fidelity, vec![2.0, 4.0, 8.0])).unwrap();
        let f: Vec<f64> = rows.iter().map(|r| r.avg_fidelity.unwrap()).collect();
        assert!(f[0] < f[1] && f[1] < f[2], "{f:?}");
    }

    #[test]
    fn sampled_points_do_not_depend_on_order() {
        let mut c = cfg(SweepKind::Fidelity, vec![2.0, 3.0]);
        c.mode = SampleMode::Sample;
        c.trials = 200;
        let forward = sweep_rows(&c).unwrap();
        let single = grid_point(&c, SweepKind::Fidelity, 1, 3.0).unwrap();
        assert_eq!(forward[1].sampled_fidelity, single.sampled_fidelity);
    }

    #[test]
    fn single_point_has_no_slope() {
        assert!(sweep_rows(&cfg(SweepKind::Residual, vec![4.0])).unwrap()[0].log_log_slope.is_none());
    }
}
