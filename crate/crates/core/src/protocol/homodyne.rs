//! Homodyne variant: two cross-Kerr steps build a three-mode state on
//! `(T, A, B)` and the Bell measurement is replaced by the signs of the `X`
//! quadrature of modes T and A.

use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use super::{apply_correction, apply_correction_adjoint, check_amplitude, CorrectionLabel, MeasurementOutcome, OutcomeLabel};
use super::{ProtocolPath, ProtocolResult, SignErrorBound, TargetState, TeleportRun};
use crate::coherent::{fidelity, CoherentSuperposition, CoherentTerm, C64};
use crate::error::{Error, Result};
use crate::fock::{half_line_projector, to_fock, truncation_rule, FockVector, QuadratureSign};
use crate::quasi_bell::{evolve_pi_over_chi, frequency_row_label, QuantizationRule};

/// Mode frequencies, in units of χ, for one entangling step; the first entry
/// belongs to the first-named mode of the pair.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrequencyRow {
    pub first: f64,
    pub second: f64,
}

impl FrequencyRow {
    pub fn new(first: f64, second: f64) -> Self {
        Self { first, second }
    }
}

impl Default for FrequencyRow {
    fn default() -> Self {
        Self::new(2.0, 2.0)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CollapseMode {
    /// Half-line projectors in the number basis.
    Exact,
    /// Keep the coherent terms whose mean quadrature has the observed sign.
    Branch,
    /// `Exact` when every amplitude is at most [`AUTO_EXACT_LIMIT`].
    #[default]
    Auto,
}

/// Largest amplitude for which [`CollapseMode::Auto`] picks the exact collapse.
pub const AUTO_EXACT_LIMIT: f64 = 3.0;

impl CollapseMode {
    pub fn resolve(self, amplitudes: &[f64]) -> CollapseMode {
        match self {
            CollapseMode::Auto if amplitudes.iter().all(|&a| a <= AUTO_EXACT_LIMIT) => CollapseMode::Exact,
            CollapseMode::Auto => CollapseMode::Branch,
            other => other,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HomodyneSettings {
    /// A–B step; `first` is mode A.
    #[serde(default)]
    pub ab_row: FrequencyRow,
    /// T–A step; `first` is mode T.
    #[serde(default)]
    pub ta_row: FrequencyRow,
    #[serde(default)]
    pub collapse: CollapseMode,
    /// Number-basis cutoff for every mode, overriding the truncation rule.
    #[serde(default)]
    pub dims: Option<usize>,
}

/// `½ erfc(√2·|amp|)`: probability that `X` on `|amp⟩` (mean `2·amp`, unit
/// variance) has the opposite sign.
pub fn sign_error_probability(amp: f64) -> f64 {
    0.5 * erfc(std::f64::consts::SQRT_2 * amp.abs())
}

fn sign_error_bound(alpha: f64, gamma: f64) -> SignErrorBound {
    let target_mode = sign_error_probability(gamma);
    let alice_mode = sign_error_probability(alpha);
    SignErrorBound { target_mode, alice_mode, combined: 1.0 - (1.0 - target_mode) * (1.0 - alice_mode) }
}

fn real(x: f64) -> C64 {
    C64::new(x, 0.0)
}

fn entangle(state: &CoherentSuperposition, first: usize, second: usize, row: FrequencyRow) -> Result<CoherentSuperposition> {
    frequency_row_label(row.first, row.second)?;
    evolve_pi_over_chi(state, first, second, row.first, row.second)
}

/// `T_state ⊗ |α⟩_A|β⟩_B` after the A–B and then the T–A entangling steps.
fn entangle_with(t_state: &CoherentSuperposition, alpha: f64, beta: f64, settings: &HomodyneSettings) -> Result<CoherentSuperposition> {
    let resource = entangle(&CoherentSuperposition::coherent(&[real(alpha), real(beta)])?, 0, 1, settings.ab_row)?;
    entangle(&t_state.tensor(&resource), 0, 1, settings.ta_row)
}

/// The three-mode state on `(T, A, B)` produced by the two entangling steps.
pub fn homodyne_three_mode_state(
    target: &TargetState,
    alpha: f64,
    beta: f64,
    settings: &HomodyneSettings,
) -> Result<CoherentSuperposition> {
    check_amplitude("alpha", alpha)?;
    check_amplitude("beta", beta)?;
    entangle_with(&target.realize()?, alpha, beta, settings)
}

/// `½{|γ,α⟩(c_a|β⟩+c_b|−β⟩) + |γ,−α⟩(c_a|β⟩−c_b|−β⟩)
///  + |−γ,α⟩(c_a|−β⟩+c_b|β⟩) + |−γ,−α⟩(−c_a|−β⟩+c_b|β⟩)}`, not normalized.
pub fn reference_three_mode_state(target: &TargetState, alpha: f64, beta: f64) -> Result<CoherentSuperposition> {
    let (g, a, b) = (target.gamma, alpha, beta);
    let (ca, cb) = (target.c_a, target.c_b);
    let term = |coeff: C64, t: f64, x: f64, y: f64| CoherentTerm::new(coeff * 0.5, vec![real(t), real(x), real(y)]);
    CoherentSuperposition::new(
        3,
        vec![
            term(ca, g, a, b),
            term(cb, g, a, -b),
            term(ca, g, -a, b),
            term(-cb, g, -a, -b),
            term(ca, -g, a, -b),
            term(cb, -g, a, b),
            term(-ca, -g, -a, -b),
            term(cb, -g, -a, b),
        ],
    )
}

const SIGN_GROUPS: [(QuadratureSign, QuadratureSign); 4] = [
    (QuadratureSign::Positive, QuadratureSign::Positive),
    (QuadratureSign::Positive, QuadratureSign::Negative),
    (QuadratureSign::Negative, QuadratureSign::Positive),
    (QuadratureSign::Negative, QuadratureSign::Negative),
];

fn group_index(t: QuadratureSign, a: QuadratureSign) -> usize {
    SIGN_GROUPS.iter().position(|&g| g == (t, a)).expect("all sign pairs listed")
}

/// Terms of a `(T, A, B)` state split by the sign of `Re` of the T and A
/// amplitudes, in [`SIGN_GROUPS`] order.
fn split_by_sign(state: &CoherentSuperposition) -> Result<Vec<CoherentSuperposition>> {
    if state.num_modes() != 3 {
        return Err(Error::DimensionMismatch { expected: 3, found: state.num_modes() });
    }
    let mut groups: Vec<Vec<CoherentTerm>> = vec![Vec::new(); 4];
    for t in state.terms() {
        let k = group_index(QuadratureSign::of(t.amps[0].re), QuadratureSign::of(t.amps[1].re));
        groups[k].push(t.clone());
    }
    groups.into_iter().map(|terms| CoherentSuperposition::with_tol(3, terms, state.tol())).collect()
}

/// Bob's part of one sign group: `⟨t, a|_{TA}` of the group, where `(t, a)`
/// are the group's common T and A amplitudes.
fn group_bob(group: &CoherentSuperposition) -> Result<CoherentSuperposition> {
    let Some(first) = group.terms().first() else {
        return Err(Error::DegenerateState { norm: 0.0 });
    };
    let bra = CoherentSuperposition::coherent(&[first.amps[0], first.amps[1]])?;
    group.partial_overlap(&bra, &[0, 1])
}

/// Coefficients of `|β⟩` and `|−β⟩` in a single-mode state built from them.
fn cat_coefficients(bob: &CoherentSuperposition) -> [C64; 2] {
    let mut out = [C64::new(0.0, 0.0); 2];
    for t in bob.terms() {
        out[usize::from(t.amps[0].re < 0.0)] += t.coeff;
    }
    out
}

/// The correction assigned to one sign pair.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SignCorrection {
    pub target: QuadratureSign,
    pub alice: QuadratureSign,
    pub correction: CorrectionLabel,
}

/// The sign-pair table of the printed three-mode state.
pub const REFERENCE_SIGN_CORRECTIONS: [SignCorrection; 4] = [
    SignCorrection { target: QuadratureSign::Positive, alice: QuadratureSign::Positive, correction: CorrectionLabel::Identity },
    SignCorrection { target: QuadratureSign::Positive, alice: QuadratureSign::Negative, correction: CorrectionLabel::Disp },
    SignCorrection { target: QuadratureSign::Negative, alice: QuadratureSign::Positive, correction: CorrectionLabel::Parity },
    SignCorrection { target: QuadratureSign::Negative, alice: QuadratureSign::Negative, correction: CorrectionLabel::ParityDisp },
];

const CLASSIFY_TOL: f64 = 1e-6;

/// Reads Bob's linear map `(c_a, c_b) → (|β⟩, |−β⟩)` in each sign group from
/// the probes `|γ⟩` and `|−γ⟩`, and names the correction that undoes it.
pub fn derive_sign_corrections(alpha: f64, beta: f64, gamma: f64, settings: &HomodyneSettings) -> Result<[SignCorrection; 4]> {
    check_amplitude("gamma", gamma)?;
    let mut columns = Vec::with_capacity(2);
    for amp in [gamma, -gamma] {
        let probe = entangle_with(&CoherentSuperposition::coherent(&[real(amp)])?, alpha, beta, settings)?;
        let per_group = split_by_sign(&probe)?
            .iter()
            .map(|g| group_bob(g).map(|b| cat_coefficients(&b)))
            .collect::<Result<Vec<_>>>()?;
        columns.push(per_group);
    }
    let mut out = REFERENCE_SIGN_CORRECTIONS;
    for (k, slot) in out.iter_mut().enumerate() {
        let (m00, m10) = (columns[0][k][0], columns[0][k][1]);
        let (m01, m11) = (columns[1][k][0], columns[1][k][1]);
        let diagonal = m00.norm() + m11.norm();
        let anti = m01.norm() + m10.norm();
        let (ratio, parity) = if anti <= 1e-9 * diagonal {
            (m11 / m00, false)
        } else if diagonal <= 1e-9 * anti {
            (m01 / m10, true)
        } else {
            return Err(Error::Unsupported(format!("sign group {k} mixes |β⟩ and |−β⟩ non-trivially")));
        };
        let flip = if (ratio - 1.0).norm() < CLASSIFY_TOL {
            false
        } else if (ratio + 1.0).norm() < CLASSIFY_TOL {
            true
        } else {
            return Err(Error::Unsupported(format!("sign group {k} has relative phase {ratio}, not ±1")));
        };
        slot.correction = match (parity, flip) {
            (false, false) => CorrectionLabel::Identity,
            (false, true) => CorrectionLabel::Disp,
            (true, false) => CorrectionLabel::Parity,
            (true, true) => CorrectionLabel::ParityDisp,
        };
    }
    Ok(out)
}

struct FockContext {
    psi: FockVector,
    dims: [usize; 3],
}

impl FockContext {
    fn new(psi: &CoherentSuperposition, alpha: f64, beta: f64, gamma: f64, settings: &HomodyneSettings, rule: QuantizationRule) -> Result<Self> {
        let mu = rule.correction_displacement(real(beta))?.norm();
        let dims = match settings.dims {
            Some(d) => [d; 3],
            None => [truncation_rule(gamma), truncation_rule(alpha), truncation_rule(beta + mu)],
        };
        Ok(Self { psi: to_fock(psi, &dims)?, dims })
    }

    fn project(&self, v: &FockVector, t: QuadratureSign, a: QuadratureSign) -> Result<FockVector> {
        v.apply_mode_operator(0, &half_line_projector(self.dims[0], t))?
            .apply_mode_operator(1, &half_line_projector(self.dims[1], a))
    }

    fn probability(&self, t: QuadratureSign, a: QuadratureSign) -> Result<f64> {
        Ok(self.psi.inner(&self.project(&self.psi, t, a)?)?.re)
    }

    /// `⟨ψ|Π_T Π_A ⊗ |u⟩⟨u||ψ⟩` with `u` on mode B.
    fn weight_on(&self, u: &CoherentSuperposition, t: QuadratureSign, a: QuadratureSign) -> Result<f64> {
        let w = self.psi.partial_inner(&to_fock(u, &[self.dims[2]])?, &[2])?;
        let pw = w
            .apply_mode_operator(0, &half_line_projector(self.dims[0], t))?
            .apply_mode_operator(1, &half_line_projector(self.dims[1], a))?;
        Ok(w.inner(&pw)?.re)
    }
}

/// Homodyne-path protocol. Sign pairs are mapped to corrections with
/// [`derive_sign_corrections`]; the collapse is computed as chosen in
/// `settings.collapse`.
pub fn run_teleport_homodyne(
    target: &TargetState,
    alpha: f64,
    beta: f64,
    settings: &HomodyneSettings,
    rule: QuantizationRule,
) -> Result<TeleportRun> {
    let psi = homodyne_three_mode_state(target, alpha, beta, settings)?.normalize()?;
    let table = derive_sign_corrections(alpha, beta, target.gamma, settings)?;
    let ideal = target.logical_at(beta)?;
    let collapse = settings.collapse.resolve(&[alpha, beta, target.gamma]);
    let groups = split_by_sign(&psi)?;
    let fock = match collapse {
        CollapseMode::Exact => Some(FockContext::new(&psi, alpha, beta, target.gamma, settings, rule)?),
        _ => None,
    };
    let group_weight: f64 = groups.iter().map(|g| g.norm_sqr()).sum();
    let mut branches = Vec::with_capacity(4);
    for (k, entry) in table.iter().enumerate() {
        let collapsed_bob = group_bob(&groups[k])?.normalize()?;
        let bob_after = apply_correction(&collapsed_bob, entry.correction, beta, rule)?;
        let (probability, branch_fidelity) = match &fock {
            Some(ctx) => {
                let p = ctx.probability(entry.target, entry.alice)?;
                let u = apply_correction_adjoint(&ideal, entry.correction, beta, rule)?;
                let w = ctx.weight_on(&u, entry.target, entry.alice)?;
                (p, if p > 0.0 { (w / p).clamp(0.0, 1.0) } else { 0.0 })
            }
            None => (groups[k].norm_sqr() / group_weight, fidelity(&bob_after, &ideal)?),
        };
        branches.push(ProtocolResult {
            outcome: MeasurementOutcome {
                label: OutcomeLabel::Signs { target: entry.target, alice: entry.alice },
                eigen_bits: entry.correction.bits().as_pair(),
                probability,
                collapsed_bob,
            },
            correction: entry.correction,
            bob_after,
            branch_fidelity,
        });
    }
    let conclusive: f64 = branches.iter().map(|b| b.outcome.probability).sum();
    let average_fidelity = branches.iter().map(|b| b.outcome.probability * b.branch_fidelity).sum();
    Ok(TeleportRun {
        path: ProtocolPath::Homodyne,
        target: *target,
        alpha,
        beta,
        rule,
        branches,
        average_fidelity,
        inconclusive_rate: (1.0 - conclusive).max(0.0),
        sampled: None,
        seed: None,
        sign_error: Some(sign_error_bound(alpha, target.gamma)),
        collapse: Some(collapse),
    })
}
