//! Entangled coherent ("quasi-Bell") states and the parity×displacement
//! operators that act as their Bell observables.
//!
//! With `|λ±⟩ = (|λ⟩ ± |−λ⟩)/2`:
//!
//! ```text
//! |Φ±⟩ = |α⟩|β+⟩ ± |−α⟩|β−⟩
//! |Ψ±⟩ = |α⟩|β−⟩ ± |−α⟩|β+⟩
//! ```
//!
//! For real `α, β` these are exactly normalized but only asymptotically
//! orthogonal; see [`QuasiBellSet::gram`].

use std::f64::consts::PI;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::coherent::{fidelity, gram_matrix, CoherentSuperposition, CoherentTerm, C64};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BellLabel {
    PhiPlus,
    PhiMinus,
    PsiPlus,
    PsiMinus,
}

impl BellLabel {
    pub const ALL: [BellLabel; 4] = [BellLabel::PhiPlus, BellLabel::PhiMinus, BellLabel::PsiPlus, BellLabel::PsiMinus];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn is_phi(self) -> bool {
        matches!(self, BellLabel::PhiPlus | BellLabel::PhiMinus)
    }

    pub fn is_plus(self) -> bool {
        matches!(self, BellLabel::PhiPlus | BellLabel::PsiPlus)
    }

    pub fn from_parts(phi: bool, plus: bool) -> Self {
        match (phi, plus) {
            (true, true) => BellLabel::PhiPlus,
            (true, false) => BellLabel::PhiMinus,
            (false, true) => BellLabel::PsiPlus,
            (false, false) => BellLabel::PsiMinus,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            BellLabel::PhiPlus => "PhiPlus",
            BellLabel::PhiMinus => "PhiMinus",
            BellLabel::PsiPlus => "PsiPlus",
            BellLabel::PsiMinus => "PsiMinus",
        }
    }
}

impl std::fmt::Display for BellLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn as_f64(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    pub fn of(x: f64) -> Self {
        if x >= 0.0 {
            Sign::Plus
        } else {
            Sign::Minus
        }
    }
}

/// Which of the two field modes an operator acts on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FieldMode {
    A,
    B,
}

impl FieldMode {
    pub fn index(self) -> usize {
        match self {
            FieldMode::A => 0,
            FieldMode::B => 1,
        }
    }
}

/// `(|λ⟩ ± |−λ⟩)/2`, not normalized.
pub fn make_cat(lam: C64, sign: Sign) -> CoherentSuperposition {
    let half = C64::new(0.5, 0.0);
    let terms = vec![
        CoherentTerm::new(half, vec![lam]),
        CoherentTerm::new(half * sign.as_f64(), vec![-lam]),
    ];
    CoherentSuperposition::new(1, terms).expect("finite single-mode terms")
}

/// The printed two-mode construction before normalization.
pub fn raw_quasi_bell(label: BellLabel, alpha: C64, beta: C64) -> Result<CoherentSuperposition> {
    let (first, second) = if label.is_phi() { (Sign::Plus, Sign::Minus) } else { (Sign::Minus, Sign::Plus) };
    let rel = if label.is_plus() { 1.0 } else { -1.0 };
    let a = CoherentSuperposition::coherent(&[alpha])?;
    let a_neg = CoherentSuperposition::coherent(&[-alpha])?;
    let left = a.tensor(&make_cat(beta, first));
    let right = a_neg.tensor(&make_cat(beta, second));
    CoherentSuperposition::linear_combination(&[(C64::new(1.0, 0.0), &left), (C64::new(rel, 0.0), &right)])
}

/// Normalized quasi-Bell state for real non-negative amplitudes.
pub fn make_quasi_bell(label: BellLabel, alpha: f64, beta: f64) -> Result<CoherentSuperposition> {
    if !(alpha >= 0.0 && beta >= 0.0) {
        return Err(Error::InvalidArgument(format!("amplitudes must be >= 0, got ({alpha}, {beta})")));
    }
    raw_quasi_bell(label, C64::new(alpha, 0.0), C64::new(beta, 0.0))?.normalize()
}

/// The four normalized states for fixed `(α, β)` and their Gram matrix,
/// indexed in [`BellLabel::ALL`] order.
#[derive(Clone, Debug)]
pub struct QuasiBellSet {
    alpha: f64,
    beta: f64,
    states: Vec<CoherentSuperposition>,
    gram: DMatrix<C64>,
}

impl QuasiBellSet {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha > 0.0 && beta > 0.0) {
            return Err(Error::InvalidArgument(format!("amplitudes must be > 0, got ({alpha}, {beta})")));
        }
        let states = BellLabel::ALL
            .iter()
            .map(|&l| make_quasi_bell(l, alpha, beta))
            .collect::<Result<Vec<_>>>()?;
        let gram = gram_matrix(&states)?;
        Ok(Self { alpha, beta, states, gram })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn state(&self, label: BellLabel) -> &CoherentSuperposition {
        &self.states[label.index()]
    }

    pub fn states(&self) -> &[CoherentSuperposition] {
        &self.states
    }

    pub fn gram(&self) -> &DMatrix<C64> {
        &self.gram
    }

    /// Largest off-diagonal `|G[j][k]|`.
    pub fn max_off_diagonal(&self) -> f64 {
        let mut m: f64 = 0.0;
        for j in 0..4 {
            for k in 0..4 {
                if j != k {
                    m = m.max(self.gram[(j, k)].norm());
                }
            }
        }
        m
    }
}

/// Closed-form `⟨j|k⟩` for real amplitudes.
pub fn gram_closed_form(j: BellLabel, k: BellLabel, alpha: f64, beta: f64) -> f64 {
    use BellLabel::*;
    let ea = (-2.0 * alpha * alpha).exp();
    let eb = (-2.0 * beta * beta).exp();
    match (j, k) {
        _ if j == k => 1.0,
        (PhiPlus, PhiMinus) | (PhiMinus, PhiPlus) => eb,
        (PsiPlus, PsiMinus) | (PsiMinus, PsiPlus) => -eb,
        (PhiPlus, PsiPlus) | (PsiPlus, PhiPlus) => ea,
        (PhiMinus, PsiMinus) | (PsiMinus, PhiMinus) => -ea,
        (PhiPlus, PsiMinus) | (PsiMinus, PhiPlus) => -ea * eb,
        (PhiMinus, PsiPlus) | (PsiPlus, PhiMinus) => ea * eb,
        _ => unreachable!(),
    }
}

/// `P_mode |label⟩ = sign |mapped⟩`, exact at every amplitude.
pub fn parity_action_table(label: BellLabel, mode: FieldMode) -> (BellLabel, Sign) {
    use BellLabel::*;
    match (mode, label) {
        (FieldMode::A, PhiPlus) => (PsiPlus, Sign::Plus),
        (FieldMode::A, PhiMinus) => (PsiMinus, Sign::Minus),
        (FieldMode::A, PsiPlus) => (PhiPlus, Sign::Plus),
        (FieldMode::A, PsiMinus) => (PhiMinus, Sign::Minus),
        (FieldMode::B, PhiPlus) => (PhiMinus, Sign::Plus),
        (FieldMode::B, PhiMinus) => (PhiPlus, Sign::Plus),
        (FieldMode::B, PsiPlus) => (PsiMinus, Sign::Minus),
        (FieldMode::B, PsiMinus) => (PsiPlus, Sign::Minus),
    }
}

/// Applies the parity to the constructed state and returns
/// `⟨mapped|P_mode|label⟩`; equals the table sign for every `α, β > 0`.
pub fn parity_action_overlap(label: BellLabel, mode: FieldMode, alpha: f64, beta: f64) -> Result<C64> {
    let (mapped, _) = parity_action_table(label, mode);
    let acted = make_quasi_bell(label, alpha, beta)?.parity(mode.index())?;
    make_quasi_bell(mapped, alpha, beta)?.overlap(&acted)
}

/// Exact `t = π/χ` evolution of two modes: cross-Kerr rewrite followed by the
/// free rotations `exp(-iπ ω/χ · n)`. Frequencies are in units of `χ`.
pub fn evolve_pi_over_chi(
    state: &CoherentSuperposition,
    mode_a: usize,
    mode_b: usize,
    omega_a: f64,
    omega_b: f64,
) -> Result<CoherentSuperposition> {
    state
        .cross_kerr_pi(mode_a, mode_b)?
        .rotate(mode_a, PI * omega_a)?
        .rotate(mode_b, PI * omega_b)
}

fn frequency_class(omega_over_chi: f64) -> Option<u8> {
    [1u8, 2].into_iter().find(|&k| (omega_over_chi - k as f64).abs() < 1e-12)
}

/// Label predicted for a row `(ω_a, ω_b) ∈ {χ, 2χ}²` (frequencies in units of χ).
pub fn frequency_row_label(omega_a: f64, omega_b: f64) -> Result<BellLabel> {
    match (frequency_class(omega_a), frequency_class(omega_b)) {
        (Some(2), Some(2)) => Ok(BellLabel::PhiPlus),
        (Some(2), Some(1)) => Ok(BellLabel::PhiMinus),
        (Some(1), Some(2)) => Ok(BellLabel::PsiPlus),
        (Some(1), Some(1)) => Ok(BellLabel::PsiMinus),
        _ => Err(Error::Unsupported(format!(
            "frequency row (ω_a, ω_b) = ({omega_a}χ, {omega_b}χ) is not one of χ or 2χ"
        ))),
    }
}

/// Evolves `|α⟩|β⟩` to `t = π/χ` and identifies the resulting quasi-Bell
/// state. The match is checked to fidelity `1 − 1e-10`.
pub fn generate_from_dynamics(
    omega_a: f64,
    omega_b: f64,
    alpha: f64,
    beta: f64,
) -> Result<(CoherentSuperposition, BellLabel)> {
    let label = frequency_row_label(omega_a, omega_b)?;
    let input = CoherentSuperposition::coherent(&[C64::new(alpha, 0.0), C64::new(beta, 0.0)])?;
    let out = evolve_pi_over_chi(&input, 0, 1, omega_a, omega_b)?;
    let f = fidelity(&out, &make_quasi_bell(label, alpha, beta)?)?;
    if f < 1.0 - 1e-10 {
        return Err(Error::Unsupported(format!("evolved state does not match {label}: fidelity {f}")));
    }
    Ok((out, label))
}

/// How the displacement size is tied to the field amplitude.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QuantizationRule {
    /// `Im(ε·conj(α)) = (n+½)π/2`: the displaced coherent component picks up
    /// the phase `exp(2i·Im(ε·conj(α))) = i(−1)ⁿ`, which is what makes the
    /// combined operators near-diagonal on the quasi-Bell states.
    #[default]
    Exact,
    /// `εα = (n+½)π` with `ε` imaginary. Ignores the phase of `⟨α|α+ε⟩`;
    /// the displacement then acts as ≈ −1 on both `|±α⟩`.
    Nominal,
}

impl QuantizationRule {
    fn phase_target(self, k: u32) -> f64 {
        let base = (k as f64 + 0.5) * PI;
        match self {
            QuantizationRule::Exact => base / 2.0,
            QuantizationRule::Nominal => base,
        }
    }

    /// Displacement orthogonal to `amp` with `Im(d·conj(amp)) = target`.
    fn displacement(self, amp: C64, k: u32) -> Result<C64> {
        let r = amp.norm();
        if !(r > 0.0) || !r.is_finite() {
            return Err(Error::InvalidArgument(format!("displacement quantum needs a nonzero amplitude, got {amp}")));
        }
        Ok(C64::new(0.0, 1.0) * (amp / r) * (self.phase_target(k) / r))
    }

    /// Bob's correction displacement; half-period of the quantized series.
    pub fn correction_displacement(self, beta: C64) -> Result<C64> {
        let r = beta.norm();
        if !(r > 0.0) || !r.is_finite() {
            return Err(Error::InvalidArgument(format!("correction needs a nonzero amplitude, got {beta}")));
        }
        let target = match self {
            QuantizationRule::Exact => PI / 4.0,
            QuantizationRule::Nominal => PI / 2.0,
        };
        Ok(C64::new(0.0, 1.0) * (beta / r) * (target / r))
    }
}

/// Integers `(n, m)` selecting `ε` on mode a and `λ` on mode b.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DisplacementQuantum {
    pub n: u32,
    pub m: u32,
}

impl DisplacementQuantum {
    pub fn new(n: u32, m: u32) -> Self {
        Self { n, m }
    }

    pub fn epsilon(&self, alpha: C64, rule: QuantizationRule) -> Result<C64> {
        rule.displacement(alpha, self.n)
    }

    pub fn lambda(&self, beta: C64, rule: QuantizationRule) -> Result<C64> {
        rule.displacement(beta, self.m)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CombinedOp {
    /// `P_b D_a(ε)`
    PbDa,
    /// `P_a D_b(λ)`
    PaDb,
}

/// Applies `P_b D_a(ε)` or `P_a D_b(λ)` exactly (displace first, then parity)
/// to a two-mode state.
pub fn combined_op(
    state: &CoherentSuperposition,
    which: CombinedOp,
    q: DisplacementQuantum,
    alpha: f64,
    beta: f64,
    rule: QuantizationRule,
) -> Result<CoherentSuperposition> {
    if state.num_modes() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, found: state.num_modes() });
    }
    match which {
        CombinedOp::PbDa => state.displace(0, q.epsilon(C64::new(alpha, 0.0), rule)?)?.parity(1),
        CombinedOp::PaDb => state.displace(1, q.lambda(C64::new(beta, 0.0), rule)?)?.parity(0),
    }
}

/// Asymptotic eigenvalue of `which` on `label`.
pub fn predicted_eigenvalue(label: BellLabel, which: CombinedOp, q: DisplacementQuantum) -> C64 {
    let i = C64::new(0.0, 1.0);
    let alt = |k: u32| if k % 2 == 0 { 1.0 } else { -1.0 };
    match which {
        CombinedOp::PbDa => i * alt(q.n) * if label.is_phi() { 1.0 } else { -1.0 },
        CombinedOp::PaDb => i * alt(q.m) * if label.is_plus() { 1.0 } else { -1.0 },
    }
}

/// `⟨s|Op|s⟩` for the normalized quasi-Bell state.
pub fn eigen_expectation(
    label: BellLabel,
    which: CombinedOp,
    q: DisplacementQuantum,
    alpha: f64,
    beta: f64,
    rule: QuantizationRule,
) -> Result<C64> {
    let s = make_quasi_bell(label, alpha, beta)?;
    s.overlap(&combined_op(&s, which, q, alpha, beta, rule)?)
}

/// `1 − |⟨s|conj(eig)·Op|s⟩|` under the default quantization rule.
pub fn eigen_residual(label: BellLabel, which: CombinedOp, q: DisplacementQuantum, alpha: f64, beta: f64) -> Result<f64> {
    eigen_residual_with(label, which, q, alpha, beta, QuantizationRule::Exact)
}

pub fn eigen_residual_with(
    label: BellLabel,
    which: CombinedOp,
    q: DisplacementQuantum,
    alpha: f64,
    beta: f64,
    rule: QuantizationRule,
) -> Result<f64> {
    let e = eigen_expectation(label, which, q, alpha, beta, rule)?;
    let eig = predicted_eigenvalue(label, which, q);
    Ok((1.0 - (eig.conj() * e).norm()).max(0.0))
}

/// Two classical bits read from the measured eigenphases.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct EigenBits {
    /// `true` when `P_b D_a` reads `+i(−1)ⁿ`, i.e. a Φ state.
    pub phi: bool,
    /// `true` when `P_a D_b` reads `+i(−1)ᵐ`.
    pub plus: bool,
}

impl EigenBits {
    pub fn label(self) -> BellLabel {
        BellLabel::from_parts(self.phi, self.plus)
    }

    pub fn of_label(label: BellLabel) -> Self {
        Self { phi: label.is_phi(), plus: label.is_plus() }
    }

    pub fn as_pair(self) -> (u8, u8) {
        (u8::from(!self.phi), u8::from(!self.plus))
    }
}

/// Decodes the bits from the two (near-imaginary) eigenvalue readings.
pub fn decode_eigen_bits(pbda: C64, padb: C64, q: DisplacementQuantum) -> EigenBits {
    let alt = |k: u32| if k % 2 == 0 { 1.0 } else { -1.0 };
    EigenBits { phi: pbda.im * alt(q.n) > 0.0, plus: padb.im * alt(q.m) > 0.0 }
}

/// Reads both combined operators on `label` and decodes.
pub fn measure_eigen_bits(
    label: BellLabel,
    q: DisplacementQuantum,
    alpha: f64,
    beta: f64,
    rule: QuantizationRule,
) -> Result<EigenBits> {
    let first = eigen_expectation(label, CombinedOp::PbDa, q, alpha, beta, rule)?;
    let second = eigen_expectation(label, CombinedOp::PaDb, q, alpha, beta, rule)?;
    Ok(decode_eigen_bits(first, second, q))
}

/// One row of the mode-swap identity report.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SwapIdentity {
    pub source: BellLabel,
    pub image: BellLabel,
    pub sign: Sign,
    pub fidelity: f64,
}

/// Exchanges the two modes of each state built at `(α, β)` and identifies it
/// among the states built at `(β, α)`.
pub fn swap_identities(alpha: f64, beta: f64) -> Result<Vec<SwapIdentity>> {
    let swapped = QuasiBellSet::new(beta, alpha)?;
    BellLabel::ALL
        .iter()
        .map(|&source| {
            let s = make_quasi_bell(source, alpha, beta)?.permute_modes(&[1, 0])?;
            let (image, ov) = BellLabel::ALL
                .iter()
                .map(|&l| (l, swapped.state(l).overlap(&s).unwrap_or_default()))
                .max_by(|a, b| a.1.norm().total_cmp(&b.1.norm()))
                .expect("four candidates");
            Ok(SwapIdentity { source, image, sign: Sign::of(ov.re), fidelity: ov.norm_sqr() })
        })
        .collect()
}
