//! The teleportation protocol: target encoding, quasi-Bell expansion, the
//! Löwdin Bell measurement, Bob's corrections and fidelity bookkeeping.
//!
//! Mode conventions: the ideal path works on `(a, T, b)` and measures the
//! pair `(a, T)` in the quasi-Bell basis built at amplitudes `(α, γ)`. The
//! homodyne path in [`homodyne`] works on `(T, A, B)`.

use std::fmt;

use nalgebra::DMatrix;
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::coherent::{fidelity, CoherentSuperposition, C64};
use crate::error::{Error, Result};
use crate::fock::QuadratureSign;
use crate::quasi_bell::{make_quasi_bell, measure_eigen_bits, BellLabel, DisplacementQuantum, EigenBits, QuantizationRule, QuasiBellSet};

pub mod baseline;
pub mod homodyne;

pub use baseline::{classical_baseline, BaselineResult};
pub use homodyne::{
    derive_sign_corrections, homodyne_three_mode_state, reference_three_mode_state, run_teleport_homodyne, sign_error_probability,
    CollapseMode, FrequencyRow, HomodyneSettings, SignCorrection,
};

/// Largest Gram condition number accepted before the basis is declared
/// degenerate.
pub const CONDITION_LIMIT: f64 = 1e12;

/// Tolerance on `|c_a|² + |c_b|² = 1`.
const LOGICAL_NORM_TOL: f64 = 1e-9;

fn real(x: f64) -> C64 {
    C64::new(x, 0.0)
}

fn check_amplitude(name: &str, x: f64) -> Result<()> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::InvalidArgument(format!("{name} must be a positive finite amplitude, got {x}")));
    }
    Ok(())
}

/// Logical qubit `c_a|0⟩ + c_b|1⟩` encoded as `c_a|γ⟩ + c_b|−γ⟩`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TargetState {
    pub c_a: C64,
    pub c_b: C64,
    pub gamma: f64,
}

impl TargetState {
    pub fn new(c_a: C64, c_b: C64, gamma: f64) -> Result<Self> {
        let n = c_a.norm_sqr() + c_b.norm_sqr();
        if !((n - 1.0).abs() <= LOGICAL_NORM_TOL) {
            return Err(Error::InvalidArgument(format!("|c_a|² + |c_b|² must be 1, got {n}")));
        }
        check_amplitude("gamma", gamma)?;
        Ok(Self { c_a, c_b, gamma })
    }

    /// `c_a = c_b = 1/√2`.
    pub fn balanced(gamma: f64) -> Result<Self> {
        let h = real(std::f64::consts::FRAC_1_SQRT_2);
        Self::new(h, h, gamma)
    }

    /// `c_a = 1, c_b = 0`: a plain coherent state.
    pub fn coherent(gamma: f64) -> Result<Self> {
        Self::new(real(1.0), real(0.0), gamma)
    }

    /// `c_a|amp⟩ + c_b|−amp⟩`, not normalized.
    pub fn encode(&self, amp: f64) -> CoherentSuperposition {
        let plus = CoherentSuperposition::coherent(&[real(amp)]).expect("finite amplitude");
        let minus = CoherentSuperposition::coherent(&[real(-amp)]).expect("finite amplitude");
        CoherentSuperposition::linear_combination(&[(self.c_a, &plus), (self.c_b, &minus)]).expect("single-mode states")
    }

    /// The physical state at amplitude `γ`, normalized exactly.
    pub fn realize(&self) -> Result<CoherentSuperposition> {
        self.encode(self.gamma).normalize()
    }

    /// The same logical state at another amplitude.
    pub fn logical_at(&self, amp: f64) -> Result<CoherentSuperposition> {
        check_amplitude("amplitude", amp)?;
        self.encode(amp).normalize()
    }
}

/// Bob's four corrections `{I, P, iD(μ), iPD(μ)}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CorrectionLabel {
    Identity,
    Parity,
    Disp,
    ParityDisp,
}

impl CorrectionLabel {
    pub const ALL: [CorrectionLabel; 4] =
        [CorrectionLabel::Identity, CorrectionLabel::Parity, CorrectionLabel::Disp, CorrectionLabel::ParityDisp];

    /// Decoding table: the first bit selects Φ/Ψ (displacement), the second
    /// `+`/`−` within the pair (parity).
    pub fn from_bits(bits: EigenBits) -> Self {
        match (bits.phi, bits.plus) {
            (true, true) => CorrectionLabel::Identity,
            (true, false) => CorrectionLabel::Parity,
            (false, true) => CorrectionLabel::Disp,
            (false, false) => CorrectionLabel::ParityDisp,
        }
    }

    pub fn bits(self) -> EigenBits {
        let (phi, plus) = match self {
            CorrectionLabel::Identity => (true, true),
            CorrectionLabel::Parity => (true, false),
            CorrectionLabel::Disp => (false, true),
            CorrectionLabel::ParityDisp => (false, false),
        };
        EigenBits { phi, plus }
    }

    pub fn has_parity(self) -> bool {
        matches!(self, CorrectionLabel::Parity | CorrectionLabel::ParityDisp)
    }

    pub fn has_displacement(self) -> bool {
        matches!(self, CorrectionLabel::Disp | CorrectionLabel::ParityDisp)
    }

    pub fn name(self) -> &'static str {
        match self {
            CorrectionLabel::Identity => "I",
            CorrectionLabel::Parity => "P",
            CorrectionLabel::Disp => "iD",
            CorrectionLabel::ParityDisp => "iPD",
        }
    }
}

impl fmt::Display for CorrectionLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

fn check_single_mode(s: &CoherentSuperposition) -> Result<()> {
    if s.num_modes() != 1 {
        return Err(Error::DimensionMismatch { expected: 1, found: s.num_modes() });
    }
    Ok(())
}

/// Applies the labelled unitary to Bob's mode. The displacement is applied
/// before the parity; the factor `i` is kept.
pub fn apply_correction(
    bob: &CoherentSuperposition,
    label: CorrectionLabel,
    beta: f64,
    rule: QuantizationRule,
) -> Result<CoherentSuperposition> {
    check_single_mode(bob)?;
    let mu = rule.correction_displacement(real(beta))?;
    let i = C64::new(0.0, 1.0);
    match label {
        CorrectionLabel::Identity => Ok(bob.clone()),
        CorrectionLabel::Parity => bob.parity(0),
        CorrectionLabel::Disp => Ok(bob.displace(0, mu)?.scale(i)),
        CorrectionLabel::ParityDisp => Ok(bob.displace(0, mu)?.parity(0)?.scale(i)),
    }
}

/// Inverse of [`apply_correction`].
pub fn apply_correction_adjoint(
    state: &CoherentSuperposition,
    label: CorrectionLabel,
    beta: f64,
    rule: QuantizationRule,
) -> Result<CoherentSuperposition> {
    check_single_mode(state)?;
    let mu = rule.correction_displacement(real(beta))?;
    let minus_i = C64::new(0.0, -1.0);
    match label {
        CorrectionLabel::Identity => Ok(state.clone()),
        CorrectionLabel::Parity => state.parity(0),
        CorrectionLabel::Disp => Ok(state.displace(0, -mu)?.scale(minus_i)),
        CorrectionLabel::ParityDisp => Ok(state.parity(0)?.displace(0, -mu)?.scale(minus_i)),
    }
}

/// `|ψ⟩_T ⊗ Φ⁺_{ab}` on modes `(a, T, b)`, normalized.
pub fn initial_state(target: &TargetState, alpha: f64, beta: f64) -> Result<CoherentSuperposition> {
    check_amplitude("alpha", alpha)?;
    check_amplitude("beta", beta)?;
    let resource = make_quasi_bell(BellLabel::PhiPlus, alpha, beta)?;
    target.realize()?.tensor(&resource).permute_modes(&[1, 0, 2])
}

fn hermitian_function(m: &DMatrix<C64>, f: impl Fn(f64) -> f64) -> (DMatrix<C64>, f64) {
    let eig = m.clone().symmetric_eigen();
    let (lo, hi) = eig.eigenvalues.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)));
    let condition = if lo > 0.0 { hi / lo } else { f64::INFINITY };
    let d = DMatrix::from_diagonal(&eig.eigenvalues.map(|x| real(f(x))));
    (&eig.eigenvectors * d * eig.eigenvectors.adjoint(), condition)
}

fn checked_function(gram: &DMatrix<C64>, f: impl Fn(f64) -> f64) -> Result<(DMatrix<C64>, f64)> {
    let (m, condition) = hermitian_function(gram, f);
    if !(condition <= CONDITION_LIMIT) {
        return Err(Error::DegenerateBasis { condition, limit: CONDITION_LIMIT });
    }
    Ok((m, condition))
}

/// One term `B_j ⊗ coefficient·bob` of the expansion.
#[derive(Clone, Debug, Serialize)]
pub struct BranchComponent {
    pub label: BellLabel,
    /// Normalized Bob state.
    pub bob: CoherentSuperposition,
    pub coefficient: C64,
}

#[derive(Clone, Debug, Serialize)]
pub struct Expansion {
    pub components: Vec<BranchComponent>,
    /// Norm of the initial state minus the reassembled expansion.
    pub residual: f64,
    pub condition: f64,
}

/// Decomposes `|ψ⟩_T ⊗ Φ⁺_{ab}` over the quasi-Bell basis of `(a, T)` at
/// amplitudes `(α, γ)` by solving the Gram system.
pub fn expand_initial(target: &TargetState, alpha: f64, beta: f64) -> Result<Expansion> {
    let total = initial_state(target, alpha, beta)?;
    let basis = QuasiBellSet::new(alpha, target.gamma)?;
    let (inverse, condition) = checked_function(basis.gram(), |x| 1.0 / x)?;
    let projections = basis
        .states()
        .iter()
        .map(|b| total.partial_overlap(b, &[0, 1]))
        .collect::<Result<Vec<_>>>()?;
    let mut components = Vec::with_capacity(4);
    let mut pieces = Vec::with_capacity(5);
    for label in BellLabel::ALL {
        let j = label.index();
        let weighted: Vec<(C64, &CoherentSuperposition)> = (0..4).map(|k| (inverse[(j, k)], &projections[k])).collect();
        let x = CoherentSuperposition::linear_combination(&weighted)?;
        pieces.push(basis.state(label).tensor(&x));
        let coefficient = real(x.norm());
        let bob = x.normalize().unwrap_or(x);
        components.push(BranchComponent { label, bob, coefficient });
    }
    let negated = total.scale(real(-1.0));
    let mut items: Vec<(C64, &CoherentSuperposition)> = pieces.iter().map(|p| (real(1.0), p)).collect();
    items.push((real(1.0), &negated));
    let residual = CoherentSuperposition::linear_combination(&items)?.norm();
    Ok(Expansion { components, residual, condition })
}

/// Symmetric orthonormalization `e_k = Σ_j B_j (S^{−1/2})_{jk}` of the four
/// quasi-Bell states; the fifth effect is the complement of their span.
#[derive(Clone, Debug)]
pub struct LowdinMeasurement {
    basis: QuasiBellSet,
    effects: Vec<CoherentSuperposition>,
    condition: f64,
}

impl LowdinMeasurement {
    pub fn new(basis: QuasiBellSet) -> Result<Self> {
        let (inv_sqrt, condition) = checked_function(basis.gram(), |x| 1.0 / x.sqrt())?;
        let effects = (0..4)
            .map(|k| {
                let items: Vec<(C64, &CoherentSuperposition)> =
                    basis.states().iter().enumerate().map(|(j, b)| (inv_sqrt[(j, k)], b)).collect();
                CoherentSuperposition::linear_combination(&items)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { basis, effects, condition })
    }

    pub fn basis(&self) -> &QuasiBellSet {
        &self.basis
    }

    /// Orthonormal effect vectors in [`BellLabel::ALL`] order.
    pub fn effects(&self) -> &[CoherentSuperposition] {
        &self.effects
    }

    pub fn effect(&self, label: BellLabel) -> &CoherentSuperposition {
        &self.effects[label.index()]
    }

    pub fn condition_number(&self) -> f64 {
        self.condition
    }

    /// `|⟨e_k|ψ⟩|²` for the four effects followed by the inconclusive weight
    /// `⟨ψ|ψ⟩ − Σ_k`. The state is used as given.
    pub fn outcome_probabilities(&self, state: &CoherentSuperposition) -> Result<[f64; 5]> {
        let mut p = [0.0; 5];
        for (k, e) in self.effects.iter().enumerate() {
            p[k] = e.overlap(state)?.norm_sqr();
        }
        p[4] = (state.norm_sqr() - p[..4].iter().sum::<f64>()).max(0.0);
        Ok(p)
    }

    /// Unnormalized `⟨e_k|_{modes}|ψ⟩` for each effect.
    pub fn conditional_states(&self, state: &CoherentSuperposition, modes: &[usize]) -> Result<Vec<CoherentSuperposition>> {
        self.effects.iter().map(|e| state.partial_overlap(e, modes)).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProtocolPath {
    Ideal,
    Homodyne,
}

impl ProtocolPath {
    pub fn name(self) -> &'static str {
        match self {
            ProtocolPath::Ideal => "ideal",
            ProtocolPath::Homodyne => "homodyne",
        }
    }
}

impl fmt::Display for ProtocolPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// What was read out: a Bell label, or the two quadrature signs `(T, A)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutcomeLabel {
    Bell(BellLabel),
    Signs { target: QuadratureSign, alice: QuadratureSign },
}

impl fmt::Display for OutcomeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = |q: QuadratureSign| if q == QuadratureSign::Positive { '+' } else { '-' };
        match self {
            OutcomeLabel::Bell(b) => write!(f, "{b}"),
            OutcomeLabel::Signs { target, alice } => write!(f, "T{}A{}", s(*target), s(*alice)),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct MeasurementOutcome {
    pub label: OutcomeLabel,
    pub eigen_bits: (u8, u8),
    pub probability: f64,
    /// Bob's normalized state right after the measurement.
    pub collapsed_bob: CoherentSuperposition,
}

#[derive(Clone, Debug, Serialize)]
pub struct ProtocolResult {
    pub outcome: MeasurementOutcome,
    pub correction: CorrectionLabel,
    pub bob_after: CoherentSuperposition,
    pub branch_fidelity: f64,
}

/// Error budget of the sign readout on the homodyne path.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SignErrorBound {
    /// Per-mode probability of reading the wrong sign, `½ erfc(√2·amp)`.
    pub target_mode: f64,
    pub alice_mode: f64,
    /// Probability that at least one sign is wrong.
    pub combined: f64,
}

/// All branches of one protocol run plus the aggregates.
#[derive(Clone, Debug, Serialize)]
pub struct TeleportRun {
    pub path: ProtocolPath,
    pub target: TargetState,
    pub alpha: f64,
    pub beta: f64,
    pub rule: QuantizationRule,
    pub branches: Vec<ProtocolResult>,
    /// `Σ p_k F_k` over the conclusive outcomes.
    pub average_fidelity: f64,
    pub inconclusive_rate: f64,
    /// Index into `branches` of the sampled outcome.
    pub sampled: Option<usize>,
    pub seed: Option<u64>,
    pub sign_error: Option<SignErrorBound>,
    pub collapse: Option<CollapseMode>,
}

impl TeleportRun {
    pub fn probabilities(&self) -> Vec<f64> {
        self.branches.iter().map(|b| b.outcome.probability).collect()
    }

    /// Conclusive probabilities plus the inconclusive weight.
    pub fn total_probability(&self) -> f64 {
        self.probabilities().iter().sum::<f64>() + self.inconclusive_rate
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RunMode {
    Enumerate,
    Sample { seed: u64 },
}

/// ChaCha8 generator for `seed` on an independent `stream`; grid point `k`
/// uses stream `k`.
pub fn seeded_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Draws one index with the given weights.
pub fn sample_index<R: Rng + ?Sized>(weights: &[f64], rng: &mut R) -> Result<usize> {
    let dist = WeightedIndex::new(weights).map_err(|e| Error::InvalidArgument(format!("invalid outcome weights: {e}")))?;
    Ok(dist.sample(rng))
}

/// Multinomial counts of `trials` draws.
pub fn sample_counts<R: Rng + ?Sized>(weights: &[f64], trials: u64, rng: &mut R) -> Result<Vec<u64>> {
    let dist = WeightedIndex::new(weights).map_err(|e| Error::InvalidArgument(format!("invalid outcome weights: {e}")))?;
    let mut counts = vec![0u64; weights.len()];
    for _ in 0..trials {
        counts[dist.sample(rng)] += 1;
    }
    Ok(counts)
}

/// Largest `|n_k − N p_k| / √(N p_k(1−p_k))` over the outcomes.
pub fn max_multinomial_z(counts: &[u64], probabilities: &[f64]) -> f64 {
    let n: u64 = counts.iter().sum();
    let n = n as f64;
    counts
        .iter()
        .zip(probabilities)
        .map(|(&c, &p)| {
            let sd = (n * p * (1.0 - p)).sqrt();
            let dev = (c as f64 - n * p).abs();
            if sd > 0.0 {
                dev / sd
            } else if dev == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        })
        .fold(0.0, f64::max)
}

/// Bits read from the eigenphases of the two combined operators on the
/// basis state for `label`.
fn decoded_bits(label: BellLabel, alpha: f64, gamma: f64) -> Result<EigenBits> {
    measure_eigen_bits(label, DisplacementQuantum::default(), alpha, gamma, QuantizationRule::Exact)
}

/// Ideal-path protocol with the Löwdin Bell measurement on `(a, T)`.
pub fn run_teleport_ideal(
    target: &TargetState,
    alpha: f64,
    beta: f64,
    mode: RunMode,
    rule: QuantizationRule,
) -> Result<TeleportRun> {
    let total = initial_state(target, alpha, beta)?;
    let measurement = LowdinMeasurement::new(QuasiBellSet::new(alpha, target.gamma)?)?;
    let conditionals = measurement.conditional_states(&total, &[0, 1])?;
    let ideal = target.logical_at(beta)?;
    let mut branches = Vec::with_capacity(4);
    for label in BellLabel::ALL {
        let cond = &conditionals[label.index()];
        let probability = cond.norm_sqr();
        let bits = decoded_bits(label, alpha, target.gamma)?;
        let correction = CorrectionLabel::from_bits(bits);
        let collapsed_bob = cond.normalize()?;
        let bob_after = apply_correction(&collapsed_bob, correction, beta, rule)?;
        let branch_fidelity = fidelity(&bob_after, &ideal)?;
        branches.push(ProtocolResult {
            outcome: MeasurementOutcome { label: OutcomeLabel::Bell(label), eigen_bits: bits.as_pair(), probability, collapsed_bob },
            correction,
            bob_after,
            branch_fidelity,
        });
    }
    let conclusive: f64 = branches.iter().map(|b| b.outcome.probability).sum();
    let average_fidelity = branches.iter().map(|b| b.outcome.probability * b.branch_fidelity).sum();
    let inconclusive_rate = (total.norm_sqr() - conclusive).max(0.0);
    let (sampled, seed) = match mode {
        RunMode::Enumerate => (None, None),
        RunMode::Sample { seed } => {
            let weights: Vec<f64> = branches.iter().map(|b| b.outcome.probability).collect();
            (Some(sample_index(&weights, &mut seeded_rng(seed, 0))?), Some(seed))
        }
    };
    Ok(TeleportRun {
        path: ProtocolPath::Ideal,
        target: *target,
        alpha,
        beta,
        rule,
        branches,
        average_fidelity,
        inconclusive_rate,
        sampled,
        seed,
        sign_error: None,
        collapse: None,
    })
}
