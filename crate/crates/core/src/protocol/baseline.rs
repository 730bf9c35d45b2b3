//! Random-correction baseline: Bob guesses the correction without waiting for
//! Alice's two bits.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{apply_correction, run_teleport_ideal, sample_index, seeded_rng, CorrectionLabel, RunMode, TargetState};
use crate::coherent::{fidelity, C64};
use crate::error::{Error, Result};
use crate::quasi_bell::QuantizationRule;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BaselineResult {
    /// Fraction of trials in which the guessed correction was the right one.
    pub guess_rate: f64,
    pub avg_fidelity: f64,
    pub trials: u64,
    pub seed: u64,
}

/// Haar-random logical coefficients from four standard normals.
fn random_logical<R: Rng + ?Sized>(rng: &mut R) -> (C64, C64) {
    let mut g = || -> f64 { rng.sample(StandardNormal) };
    let (a, b) = (C64::new(g(), g()), C64::new(g(), g()));
    let n = (a.norm_sqr() + b.norm_sqr()).sqrt();
    (a / n, b / n)
}

/// Per-branch probabilities and the fidelity each of the four corrections
/// would reach on that branch.
fn branch_table(target: &TargetState, alpha: f64, beta: f64, rule: QuantizationRule) -> Result<(Vec<f64>, Vec<CorrectionLabel>, Vec<[f64; 4]>)> {
    let run = run_teleport_ideal(target, alpha, beta, RunMode::Enumerate, rule)?;
    let ideal = target.logical_at(beta)?;
    let mut fidelities = Vec::with_capacity(4);
    for b in &run.branches {
        let mut row = [0.0; 4];
        for (slot, label) in row.iter_mut().zip(CorrectionLabel::ALL) {
            *slot = fidelity(&apply_correction(&b.outcome.collapsed_bob, label, beta, rule)?, &ideal)?;
        }
        fidelities.push(row);
    }
    Ok((run.probabilities(), run.branches.iter().map(|b| b.correction).collect(), fidelities))
}

/// Monte-Carlo of the ideal protocol with a uniformly random correction.
/// With `randomize_target` each trial draws fresh logical coefficients at the
/// target's `γ`.
pub fn classical_baseline(
    target: &TargetState,
    alpha: f64,
    beta: f64,
    trials: u64,
    seed: u64,
    rule: QuantizationRule,
    randomize_target: bool,
) -> Result<BaselineResult> {
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be at least 1".into()));
    }
    let mut rng = seeded_rng(seed, 0);
    let fixed = if randomize_target { None } else { Some(branch_table(target, alpha, beta, rule)?) };
    let (mut hits, mut total_fidelity) = (0u64, 0.0);
    for _ in 0..trials {
        let fresh;
        let (probabilities, correct, fidelities) = match &fixed {
            Some(t) => t,
            None => {
                let (c_a, c_b) = random_logical(&mut rng);
                fresh = branch_table(&TargetState::new(c_a, c_b, target.gamma)?, alpha, beta, rule)?;
                &fresh
            }
        };
        let branch = sample_index(probabilities, &mut rng)?;
        let guess = rng.random_range(0..CorrectionLabel::ALL.len());
        hits += u64::from(CorrectionLabel::ALL[guess] == correct[branch]);
        total_fidelity += fidelities[branch][guess];
    }
    Ok(BaselineResult { guess_rate: hits as f64 / trials as f64, avg_fidelity: total_fidelity / trials as f64, trials, seed })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn guess_rate_is_a_quarter() {
        let t = TargetState::balanced(3.0).unwrap();
        let r = classical_baseline(&t, 3.0, 3.0, 10_000, 17, QuantizationRule::Exact, false).unwrap();
        assert!((r.guess_rate - 0.25).abs() < 0.01, "{}", r.guess_rate);
    }

    #[test]
    fn coherent_target_fidelity_is_about_half() {
        let t = TargetState::coherent(6.0).unwrap();
        let r = classical_baseline(&t, 6.0, 6.0, 4_000, 3, QuantizationRule::Exact, false).unwrap();
        assert!((r.avg_fidelity - 0.5).abs() < 0.03, "{}", r.avg_fidelity);
    }

    #[test]
    fn same_seed_same_result() {
        let t = TargetState::balanced(2.0).unwrap();
        let a = classical_baseline(&t, 2.0, 2.0, 50, 1, QuantizationRule::Exact, true).unwrap();
        let b = classical_baseline(&t, 2.0, 2.0, 50, 1, QuantizationRule::Exact, true).unwrap();
        assert_eq!(a, b);
        assert!(classical_baseline(&t, 2.0, 2.0, 0, 1, QuantizationRule::Exact, false).is_err());
    }
}
