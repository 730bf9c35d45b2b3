use std::path::Path;

use cat_teleport::protocol::{
    max_multinomial_z, run_teleport_homodyne, run_teleport_ideal, sample_counts, sample_index, seeded_rng, ProtocolPath, RunMode,
    TeleportRun,
};
use cat_teleport::quasi_bell::{
    eigen_expectation, gram_closed_form, measure_eigen_bits, predicted_eigenvalue, BellLabel, CombinedOp,
    DisplacementQuantum, QuantizationRule, QuasiBellSet,
};
use cat_teleport::records::{run_records, ProtocolRecord, AGGREGATE_BRANCH};
use serde::Serialize;

use crate::config::{ExperimentConfig, SampleMode};
use crate::error::CliError;
use crate::output::emit;

fn out_path(cfg: &ExperimentConfig) -> Option<&Path> {
    cfg.out.as_deref().map(Path::new)
}

#[derive(Debug, Serialize)]
struct GramRow {
    alpha: f64,
    beta: f64,
    bra: BellLabel,
    ket: BellLabel,
    re: f64,
    im: f64,
    closed_form: f64,
    abs_error: f64,
}

pub fn cmd_bell(cfg: &ExperimentConfig) -> Result<(), CliError> {
    let set = QuasiBellSet::new(cfg.alpha, cfg.beta)?;
    let mut rows = Vec::new();
    for j in BellLabel::ALL {
        for k in BellLabel::ALL {
            let g = set.gram()[(j.index(), k.index())];
            let closed_form = gram_closed_form(j, k, cfg.alpha, cfg.beta);
            rows.push(GramRow {
                alpha: cfg.alpha,
                beta: cfg.beta,
                bra: j,
                ket: k,
                re: g.re,
                im: g.im,
                closed_form,
                abs_error: (g - closed_form).norm(),
            });
        }
    }
    let worst = rows.iter().map(|r| r.abs_error).fold(0.0, f64::max);
    eprintln!("max off-diagonal overlap {:.3e}, worst closed-form deviation {worst:.3e}", set.max_off_diagonal());
    emit(&rows, &rows, cfg.format, out_path(cfg))
}

#[derive(Debug, Serialize)]
struct EigenRow {
    alpha: f64,
    beta: f64,
    state: BellLabel,
    operator: String,
    n: u32,
    m: u32,
    expectation_re: f64,
    expectation_im: f64,
    predicted_im: f64,
    residual: f64,
    bit_phi: u8,
    bit_plus: u8,
}

pub fn cmd_eigen(cfg: &ExperimentConfig) -> Result<(), CliError> {
    let q = DisplacementQuantum::default();
    let mut rows = Vec::new();
    for label in BellLabel::ALL {
        let (bit_phi, bit_plus) = measure_eigen_bits(label, q, cfg.alpha, cfg.beta, cfg.rule)?.as_pair();
        for op in [CombinedOp::PbDa, CombinedOp::PaDb] {
            let e = eigen_expectation(label, op, q, cfg.alpha, cfg.beta, cfg.rule)?;
            let eig = predicted_eigenvalue(label, op, q);
            rows.push(EigenRow {
                alpha: cfg.alpha,
                beta: cfg.beta,
                state: label,
                operator: format!("{op:?}"),
                n: q.n,
                m: q.m,
                expectation_re: e.re,
                expectation_im: e.im,
                predicted_im: eig.im,
                residual: (1.0 - (eig.conj() * e).norm()).max(0.0),
                bit_phi,
                bit_plus,
            });
        }
    }
    emit(&rows, &rows, cfg.format, out_path(cfg))
}

/// Runs the configured path once, without sampling.
pub fn protocol_run(cfg: &ExperimentConfig, path: ProtocolPath, alpha: f64, beta: f64, gamma: f64, rule: QuantizationRule) -> Result<TeleportRun, CliError> {
    let target = cfg.target_at(gamma)?;
    Ok(match path {
        ProtocolPath::Ideal => run_teleport_ideal(&target, alpha, beta, RunMode::Enumerate, rule)?,
        ProtocolPath::Homodyne => run_teleport_homodyne(&target, alpha, beta, &cfg.homodyne_settings(), rule)?,
    })
}

#[derive(Debug, Serialize)]
struct SampledDoc<'a> {
    run: &'a TeleportRun,
    trials: u64,
    counts: &'a [u64],
    max_z: f64,
}

pub fn cmd_teleport(cfg: &ExperimentConfig, path: ProtocolPath) -> Result<(), CliError> {
    let mut run = protocol_run(cfg, path, cfg.alpha, cfg.beta, cfg.gamma, cfg.rule)?;
    run.seed = Some(cfg.seed);
    let mut rows = run_records(&run, cfg.seed);
    eprintln!("path {path}: average fidelity {}, inconclusive rate {}", run.average_fidelity, run.inconclusive_rate);
    match cfg.mode {
        SampleMode::Enumerate => emit(&rows, &run, cfg.format, out_path(cfg)),
        SampleMode::Sample => {
            let p = run.probabilities();
            run.sampled = Some(sample_index(&p, &mut seeded_rng(cfg.seed, 0))?);
            let counts = sample_counts(&p, cfg.trials, &mut seeded_rng(cfg.seed, 1))?;
            let n = cfg.trials as f64;
            let mut empirical = 0.0;
            for (row, (&c, b)) in rows.iter_mut().zip(counts.iter().zip(&run.branches)) {
                row.probability = c as f64 / n;
                empirical += row.probability * b.branch_fidelity;
            }
            let aggregate: &mut ProtocolRecord = rows.last_mut().expect("aggregate row");
            debug_assert_eq!(aggregate.branch, AGGREGATE_BRANCH);
            aggregate.probability = 1.0;
            aggregate.fidelity = empirical;
            let max_z = max_multinomial_z(&counts, &p);
            eprintln!("{} samples: empirical fidelity {empirical}, largest deviation {max_z:.3} sigma", cfg.trials);
            let doc = SampledDoc { run: &run, trials: cfg.trials, counts: &counts, max_z };
            emit(&rows, &doc, cfg.format, out_path(cfg))
        }
    }
}
