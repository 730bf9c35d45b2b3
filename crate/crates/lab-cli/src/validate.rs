use std::f64::consts::TAU;

use cat_teleport::coherent::{fidelity, CoherentSuperposition, CoherentTerm, C64};
use cat_teleport::fock::{evolve, fock_displacement, fock_parity, to_fock, truncation_rule, DynamicsParams, FockVector};
use cat_teleport::protocol::{
    apply_correction, apply_correction_adjoint, derive_sign_corrections, homodyne_three_mode_state,
    reference_three_mode_state, seeded_rng, CorrectionLabel, HomodyneSettings, TargetState,
};
use cat_teleport::protocol::homodyne::REFERENCE_SIGN_CORRECTIONS;
use cat_teleport::quasi_bell::{
    frequency_row_label, generate_from_dynamics, gram_closed_form, make_quasi_bell, measure_eigen_bits,
    parity_action_overlap, parity_action_table, swap_identities, BellLabel, DisplacementQuantum, EigenBits, FieldMode,
    QuantizationRule, QuasiBellSet,
};
use rand::Rng;

use crate::config::ExperimentConfig;
use crate::error::CliError;

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn engine<T>(r: cat_teleport::error::Result<T>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn symbol(label: BellLabel) -> &'static str {
    match label {
        BellLabel::PhiPlus => "Φ+",
        BellLabel::PhiMinus => "Φ−",
        BellLabel::PsiPlus => "Ψ+",
        BellLabel::PsiMinus => "Ψ−",
    }
}

fn frequency_table(dims: Option<usize>) -> Outcome {
    let d = dims.unwrap_or_else(|| truncation_rule(1.0));
    let mut lines = Vec::new();
    let mut worst: f64 = 0.0;
    for (wa, wb) in [(2.0, 2.0), (2.0, 1.0), (1.0, 2.0), (1.0, 1.0)] {
        let label = engine(frequency_row_label(wa, wb))?;
        let (_, got) = engine(generate_from_dynamics(wa, wb, 1.0, 1.0))?;
        ensure(got == label, format!("row ({wa}χ, {wb}χ) produced {got}"))?;
        let input = engine(to_fock(&engine(CoherentSuperposition::coherent(&[c(1.0, 0.0), c(1.0, 0.0)]))?, &[d, d]))?;
        let evolved = engine(evolve(&input, &engine(DynamicsParams::at_pi_over_chi(wa, wb, 1.0))?))?;
        let want = engine(to_fock(&engine(make_quasi_bell(label, 1.0, 1.0))?, &[d, d]))?;
        let f = engine(evolved.fidelity(&want))?;
        worst = worst.max(1.0 - f);
        lines.push(format!("({wa}χ, {wb}χ) → {}", symbol(label)));
    }
    ensure(worst <= 1e-8, format!("Fock backend infidelity {worst:.2e}"))?;
    Ok(lines.join("; "))
}

fn gram_closed_forms(_: Option<usize>) -> Outcome {
    let mut worst: f64 = 0.0;
    for alpha in [1.0, 2.0, 4.0] {
        for beta in [1.0, 2.0, 4.0] {
            let set = engine(QuasiBellSet::new(alpha, beta))?;
            for j in BellLabel::ALL {
                for k in BellLabel::ALL {
                    worst = worst.max((set.gram()[(j.index(), k.index())] - gram_closed_form(j, k, alpha, beta)).norm());
                }
            }
        }
    }
    ensure(worst <= 1e-12, format!("deviation {worst:.2e}"))?;
    Ok(format!("worst deviation {worst:.1e}"))
}

fn random_amp<R: Rng>(rng: &mut R, max: f64) -> C64 {
    C64::from_polar(max * rng.random::<f64>().sqrt(), rng.random_range(0.0..TAU))
}

fn backend_equivalence(dims: Option<usize>) -> Outcome {
    let d = dims.unwrap_or_else(|| truncation_rule(3.0) + 6);
    let mut rng = seeded_rng(7, 0);
    let mut worst: f64 = 0.0;
    let n = 50;
    for _ in 0..n {
        let terms = (0..rng.random_range(1..=3))
            .map(|_| {
                let coeff = c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
                CoherentTerm::new(coeff, vec![random_amp(&mut rng, 1.5), random_amp(&mut rng, 1.5)])
            })
            .collect();
        let mut exact = engine(CoherentSuperposition::new(2, terms))?;
        let mut fock: FockVector = engine(to_fock(&exact, &[d, d]))?;
        let mut displacements = 0;
        for _ in 0..rng.random_range(1..=6) {
            let mode = rng.random_range(0..2);
            match rng.random_range(0..4) {
                0 if displacements < 3 => {
                    displacements += 1;
                    let e = random_amp(&mut rng, 0.5);
                    exact = engine(exact.displace(mode, e))?;
                    fock = engine(fock.apply_mode_operator(mode, &fock_displacement(d, e)))?;
                }
                0 | 1 => {
                    exact = engine(exact.parity(mode))?;
                    fock = engine(fock.apply_mode_operator(mode, &fock_parity(d)))?;
                }
                2 => {
                    let t = rng.random_range(0.0..TAU);
                    exact = engine(exact.rotate(mode, t))?;
                    fock = engine(fock.rotate(mode, t))?;
                }
                _ => {
                    exact = engine(exact.cross_kerr_pi(0, 1))?;
                    fock = engine(fock.cross_kerr(0, 1, std::f64::consts::PI))?;
                }
            }
        }
        worst = worst.max(1.0 - engine(engine(to_fock(&exact, &[d, d]))?.fidelity(&fock))?);
    }
    ensure(worst <= 1e-8, format!("worst infidelity {worst:.2e} at dims {d}"))?;
    Ok(format!("{n} random pipelines, worst 1-F {worst:.1e}"))
}

fn operator_identities(_: Option<usize>) -> Outcome {
    let (alpha, beta) = (1.3, 0.9);
    for label in BellLabel::ALL {
        for mode in [FieldMode::A, FieldMode::B] {
            let (image, sign) = parity_action_table(label, mode);
            let ov = engine(parity_action_overlap(label, mode, alpha, beta))?;
            ensure((ov - sign.as_f64()).norm() < 1e-12, format!("parity on {label} gives {ov}, table says {sign:?}{image}"))?;
        }
    }
    let s = engine(engine(TargetState::new(c(0.6, 0.0), c(0.0, 0.8), 1.1))?.realize())?;
    let (e1, e2) = (c(0.3, -0.4), c(-0.2, 0.7));
    let lhs = engine(engine(s.displace(0, e1))?.displace(0, e2))?;
    let rhs = engine(s.displace(0, e1 + e2))?.scale(C64::from_polar(1.0, (e2 * e1.conj()).im));
    ensure((engine(lhs.overlap(&rhs))? - 1.0).norm() < 1e-12, "displacement composition")?;
    let conj = engine(engine(engine(s.parity(0))?.displace(0, e1))?.parity(0))?;
    ensure((engine(conj.overlap(&engine(s.displace(0, -e1))?))? - 1.0).norm() < 1e-12, "parity conjugation")?;
    for label in CorrectionLabel::ALL {
        let back = engine(apply_correction_adjoint(&engine(apply_correction(&s, label, 2.0, QuantizationRule::Exact))?, label, 2.0, QuantizationRule::Exact))?;
        ensure((engine(s.overlap(&back))? - 1.0).norm() < 1e-12, format!("correction {label} not inverted"))?;
    }
    for row in engine(swap_identities(alpha, beta))? {
        ensure((row.fidelity - 1.0).abs() < 1e-12, format!("swap of {} is not {}", row.source, row.image))?;
    }
    Ok("parity table, displacement composition, parity conjugation, correction inverses, mode swap".into())
}

fn eigen_decoding(_: Option<usize>) -> Outcome {
    for label in BellLabel::ALL {
        let bits = engine(measure_eigen_bits(label, DisplacementQuantum::default(), 8.0, 8.0, QuantizationRule::Exact))?;
        ensure(bits == EigenBits::of_label(label), format!("{label} decoded as {bits:?}"))?;
    }
    Ok("all four states decoded at α = β = 8".into())
}

fn homodyne_structure(_: Option<usize>) -> Outcome {
    let settings = HomodyneSettings::default();
    let t = engine(TargetState::new(c(0.6, 0.0), c(0.0, 0.8), 1.2))?;
    let s = engine(homodyne_three_mode_state(&t, 1.5, 2.0, &settings))?;
    let f = engine(fidelity(&s, &engine(reference_three_mode_state(&t, 1.5, 2.0))?))?;
    ensure(f >= 1.0 - 1e-10, format!("three-mode fidelity {f}"))?;
    let table = engine(derive_sign_corrections(1.5, 2.0, 1.2, &settings))?;
    ensure(table == REFERENCE_SIGN_CORRECTIONS, format!("derived sign table {table:?}"))?;
    Ok(format!("three-mode 1-F {:.1e}, sign table matches", 1.0 - f))
}

fn fock_truncation(dims: Option<usize>) -> Outcome {
    let alpha = 2.0;
    let d = dims.unwrap_or_else(|| truncation_rule(alpha));
    let v = engine(to_fock(&engine(CoherentSuperposition::coherent(&[c(alpha, 0.0)]))?, &[d]))?;
    let leak = v.leakage();
    ensure(leak <= 1e-10, format!("leakage {leak:.3e} at α = {alpha} with dims {d}"))?;
    let input = engine(to_fock(&engine(CoherentSuperposition::coherent(&[c(alpha, 0.0), c(alpha, 0.0)]))?, &[d, d]))?;
    let evolved = engine(evolve(&input, &engine(DynamicsParams::at_pi_over_chi(2.0, 2.0, 1.0))?))?;
    let want = engine(to_fock(&engine(make_quasi_bell(BellLabel::PhiPlus, alpha, alpha))?, &[d, d]))?;
    let f = engine(evolved.fidelity(&want))?;
    ensure(f >= 1.0 - 1e-8, format!("Fock Φ+ fidelity {f} with dims {d}"))?;
    Ok(format!("dims {d}, leakage {leak:.1e}"))
}

type Check = (&'static str, fn(Option<usize>) -> Outcome);

const CHECKS: [Check; 7] = [
    ("frequency-table", frequency_table),
    ("gram-closed-forms", gram_closed_forms),
    ("backend-equivalence", backend_equivalence),
    ("operator-identities", operator_identities),
    ("eigen-decoding", eigen_decoding),
    ("homodyne-structure", homodyne_structure),
    ("fock-truncation", fock_truncation),
];

/// Runs every check and prints one line per check; returns the failing names.
pub fn run_checks(dims: Option<usize>, self_test: bool) -> Vec<String> {
    let mut runs: Vec<(String, Outcome)> = CHECKS.iter().map(|(name, f)| (name.to_string(), f(dims))).collect();
    if self_test {
        runs.push(("self-test: corrupted truncation (dims=3, α=2)".into(), fock_truncation(Some(3))));
    }
    let mut failed = Vec::new();
    for (name, outcome) in runs {
        match outcome {
            Ok(detail) => println!("PASS  {name:<22} {detail}"),
            Err(detail) => {
                println!("FAIL  {name:<22} {detail}");
                failed.push(name);
            }
        }
    }
    failed
}

pub fn cmd_validate(cfg: &ExperimentConfig, self_test: bool) -> Result<(), CliError> {
    let failed = run_checks(cfg.truncation, self_test);
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Check(failed.join(", ")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_passes_with_default_truncation() {
        assert!(run_checks(None, false).is_empty());
    }

    #[test]
    fn corrupted_truncation_is_named() {
        let failed = run_checks(None, true);
        assert_eq!(failed.len(), 1);
        assert!(failed[0].contains("corrupted truncation"));
    }
}
