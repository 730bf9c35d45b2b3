//! Exact multi-mode coherent-state algebra.
//!
//! A [`CoherentSuperposition`] is a finite sum `Σ_j c_j |a_j1⟩|a_j2⟩…` of
//! products of single-mode coherent states. Inner products use the Gaussian
//! kernel `⟨a|b⟩ = exp(-|a|²/2 - |b|²/2 + conj(a)·b)`, so every quantity here
//! is exact up to floating point: no number-basis truncation is involved.
//!
//! Displacement, parity, free rotation and the cross-Kerr interaction at
//! `t = π/χ` all map finite superpositions to finite superpositions and are
//! implemented as term rewrites.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Amplitude-tuple distance below which two terms are merged.
pub const DEFAULT_MERGE_TOL: f64 = 1e-9;

/// Relative size of the squared norm, compared with `(Σ|c_j|)²`, below which a
/// state is treated as numerically zero.
const DEGENERATE_REL: f64 = 1e-14;

#[derive(Clone, Debug, PartialEq)]
pub struct CoherentTerm {
    pub coeff: C64,
    pub amps: Vec<C64>,
}

impl CoherentTerm {
    pub fn new(coeff: C64, amps: Vec<C64>) -> Self {
        Self { coeff, amps }
    }

    fn distance(&self, other: &CoherentTerm) -> f64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }
}

#[derive(Clone, Debug)]
pub struct CoherentSuperposition {
    num_modes: usize,
    terms: Vec<CoherentTerm>,
    tol: f64,
}

fn finite(z: C64) -> bool {
    z.re.is_finite() && z.im.is_finite()
}

/// Log of the single-mode overlap kernel `⟨a|b⟩`.
#[inline]
fn log_kernel(a: C64, b: C64) -> C64 {
    -0.5 * a.norm_sqr() - 0.5 * b.norm_sqr() + a.conj() * b
}

/// `⟨a|b⟩` for two single-mode coherent states.
pub fn coherent_overlap(a: C64, b: C64) -> C64 {
    log_kernel(a, b).exp()
}

impl CoherentSuperposition {
    pub fn new(num_modes: usize, terms: Vec<CoherentTerm>) -> Result<Self> {
        Self::with_tol(num_modes, terms, DEFAULT_MERGE_TOL)
    }

    pub fn with_tol(num_modes: usize, terms: Vec<CoherentTerm>, tol: f64) -> Result<Self> {
        if num_modes == 0 {
            return Err(Error::InvalidArgument("a state needs at least one mode".into()));
        }
        if !(tol >= 0.0 && tol.is_finite()) {
            return Err(Error::InvalidArgument(format!("merge tolerance {tol} must be finite and >= 0")));
        }
        for t in &terms {
            if t.amps.len() != num_modes {
                return Err(Error::DimensionMismatch { expected: num_modes, found: t.amps.len() });
            }
            if !finite(t.coeff) || !t.amps.iter().copied().all(finite) {
                return Err(Error::InvalidArgument("non-finite coefficient or amplitude".into()));
            }
        }
        Ok(Self::assemble(num_modes, terms, tol))
    }

    /// Builds without validation; callers guarantee the invariants.
    fn assemble(num_modes: usize, terms: Vec<CoherentTerm>, tol: f64) -> Self {
        let mut s = Self { num_modes, terms, tol };
        s.consolidate_in_place();
        s
    }

    /// Product coherent state `|a_0⟩|a_1⟩…` with unit coefficient.
    pub fn coherent(amps: &[C64]) -> Result<Self> {
        Self::new(amps.len(), vec![CoherentTerm::new(C64::new(1.0, 0.0), amps.to_vec())])
    }

    pub fn vacuum(num_modes: usize) -> Self {
        Self::assemble(
            num_modes,
            vec![CoherentTerm::new(C64::new(1.0, 0.0), vec![C64::new(0.0, 0.0); num_modes])],
            DEFAULT_MERGE_TOL,
        )
    }

    pub fn num_modes(&self) -> usize {
        self.num_modes
    }

    pub fn terms(&self) -> &[CoherentTerm] {
        &self.terms
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Largest `|amplitude|` over all terms and modes.
    pub fn max_amplitude(&self) -> f64 {
        self.terms
            .iter()
            .flat_map(|t| t.amps.iter())
            .map(|a| a.norm())
            .fold(0.0, f64::max)
    }

    /// Merges terms whose amplitude tuples lie within `tol` of an earlier
    /// representative and drops exact zeros. Idempotent: representatives are
    /// pairwise further apart than `tol`.
    pub fn consolidate(&self) -> Self {
        let mut s = self.clone();
        s.consolidate_in_place();
        s
    }

    fn consolidate_in_place(&mut self) {
        let mut merged: Vec<CoherentTerm> = Vec::with_capacity(self.terms.len());
        for t in self.terms.drain(..) {
            match merged.iter_mut().find(|r| r.distance(&t) <= self.tol) {
                Some(r) => r.coeff += t.coeff,
                None => merged.push(t),
            }
        }
        merged.retain(|t| t.coeff != C64::new(0.0, 0.0));
        self.terms = merged;
    }

    fn check_mode(&self, mode: usize) -> Result<()> {
        if mode >= self.num_modes {
            return Err(Error::ModeOutOfRange { mode, num_modes: self.num_modes });
        }
        Ok(())
    }

    fn check_same_modes(&self, other: &Self) -> Result<()> {
        if self.num_modes != other.num_modes {
            return Err(Error::DimensionMismatch { expected: self.num_modes, found: other.num_modes });
        }
        Ok(())
    }

    fn map_terms(&self, f: impl FnMut(&CoherentTerm) -> CoherentTerm) -> Self {
        Self::assemble(self.num_modes, self.terms.iter().map(f).collect(), self.tol)
    }

    /// `⟨self|other⟩`.
    pub fn overlap(&self, other: &Self) -> Result<C64> {
        self.check_same_modes(other)?;
        let mut acc = C64::new(0.0, 0.0);
        for bra in &self.terms {
            for ket in &other.terms {
                let log: C64 = bra.amps.iter().zip(&ket.amps).map(|(&a, &b)| log_kernel(a, b)).sum();
                acc += bra.coeff.conj() * ket.coeff * log.exp();
            }
        }
        Ok(acc)
    }

    pub fn norm_sqr(&self) -> f64 {
        // overlap with itself cannot fail
        self.overlap(self).map(|z| z.re).unwrap_or(0.0).max(0.0)
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    fn coefficient_scale(&self) -> f64 {
        self.terms.iter().map(|t| t.coeff.norm()).sum()
    }

    pub fn normalize(&self) -> Result<Self> {
        let n2 = self.norm_sqr();
        let scale = self.coefficient_scale();
        if self.terms.is_empty() || n2 <= DEGENERATE_REL * scale * scale {
            return Err(Error::DegenerateState { norm: n2.sqrt() });
        }
        Ok(self.scale(C64::new(1.0 / n2.sqrt(), 0.0)))
    }

    pub fn scale(&self, factor: C64) -> Self {
        self.map_terms(|t| CoherentTerm::new(t.coeff * factor, t.amps.clone()))
    }

    /// `self + other` as vectors.
    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_modes(other)?;
        let terms = self.terms.iter().chain(&other.terms).cloned().collect();
        Ok(Self::assemble(self.num_modes, terms, self.tol))
    }

    /// `Σ_k w_k s_k`; all states must share a mode count.
    pub fn linear_combination(items: &[(C64, &Self)]) -> Result<Self> {
        let Some((_, first)) = items.first() else {
            return Err(Error::InvalidArgument("empty linear combination".into()));
        };
        let mut terms = Vec::new();
        for (w, s) in items {
            first.check_same_modes(s)?;
            terms.extend(s.terms.iter().map(|t| CoherentTerm::new(t.coeff * w, t.amps.clone())));
        }
        Ok(Self::assemble(first.num_modes, terms, first.tol))
    }

    /// `D(ε) = exp(ε a† − conj(ε) a)` on `mode`:
    /// `D(ε)|α⟩ = exp(i·Im(ε·conj(α))) |α+ε⟩`.
    pub fn displace(&self, mode: usize, eps: C64) -> Result<Self> {
        self.check_mode(mode)?;
        if !finite(eps) {
            return Err(Error::InvalidArgument("non-finite displacement".into()));
        }
        Ok(self.map_terms(|t| {
            let mut amps = t.amps.clone();
            let a = amps[mode];
            amps[mode] = a + eps;
            let phase = C64::from_polar(1.0, (eps * a.conj()).im);
            CoherentTerm::new(t.coeff * phase, amps)
        }))
    }

    /// Photon-number parity `exp(iπ a†a)`: `|α⟩ ↦ |−α⟩`.
    pub fn parity(&self, mode: usize) -> Result<Self> {
        self.check_mode(mode)?;
        Ok(self.map_terms(|t| {
            let mut amps = t.amps.clone();
            amps[mode] = -amps[mode];
            CoherentTerm::new(t.coeff, amps)
        }))
    }

    /// Free evolution `exp(-iθ a†a)`: `|α⟩ ↦ |α e^{-iθ}⟩`.
    pub fn rotate(&self, mode: usize, theta: f64) -> Result<Self> {
        self.check_mode(mode)?;
        if !theta.is_finite() {
            return Err(Error::InvalidArgument("non-finite rotation angle".into()));
        }
        let phase = C64::from_polar(1.0, -theta);
        Ok(self.map_terms(|t| {
            let mut amps = t.amps.clone();
            amps[mode] *= phase;
            CoherentTerm::new(t.coeff, amps)
        }))
    }

    /// Cross-Kerr evolution for `χt = π`, i.e. `exp(-iπ n_A n_B)`:
    ///
    /// `|α⟩_A|β⟩_B ↦ ½(|α⟩+|−α⟩)_A|β⟩_B + ½(|α⟩−|−α⟩)_A|−β⟩_B`
    ///
    /// The operator is symmetric in the two modes and squares to the identity.
    pub fn cross_kerr_pi(&self, mode_a: usize, mode_b: usize) -> Result<Self> {
        self.check_mode(mode_a)?;
        self.check_mode(mode_b)?;
        if mode_a == mode_b {
            return Err(Error::InvalidArgument("cross-Kerr needs two distinct modes".into()));
        }
        let half = C64::new(0.5, 0.0);
        let mut terms = Vec::with_capacity(4 * self.terms.len());
        for t in &self.terms {
            let (a, b) = (t.amps[mode_a], t.amps[mode_b]);
            for (sa, sb, sign) in [(1.0, 1.0, 1.0), (-1.0, 1.0, 1.0), (1.0, -1.0, 1.0), (-1.0, -1.0, -1.0)] {
                let mut amps = t.amps.clone();
                amps[mode_a] = a * sa;
                amps[mode_b] = b * sb;
                terms.push(CoherentTerm::new(t.coeff * half * sign, amps));
            }
        }
        Ok(Self::assemble(self.num_modes, terms, self.tol))
    }

    /// Tensor product; the modes of `other` follow those of `self`.
    pub fn tensor(&self, other: &Self) -> Self {
        let mut terms = Vec::with_capacity(self.terms.len() * other.terms.len());
        for a in &self.terms {
            for b in &other.terms {
                let mut amps = a.amps.clone();
                amps.extend_from_slice(&b.amps);
                terms.push(CoherentTerm::new(a.coeff * b.coeff, amps));
            }
        }
        Self::assemble(self.num_modes + other.num_modes, terms, self.tol.min(other.tol))
    }

    /// Reorders modes: mode `k` of the result is mode `order[k]` of `self`.
    pub fn permute_modes(&self, order: &[usize]) -> Result<Self> {
        let mut seen = vec![false; self.num_modes];
        if order.len() != self.num_modes {
            return Err(Error::DimensionMismatch { expected: self.num_modes, found: order.len() });
        }
        for &m in order {
            self.check_mode(m)?;
            if std::mem::replace(&mut seen[m], true) {
                return Err(Error::InvalidArgument(format!("mode {m} repeated in permutation")));
            }
        }
        Ok(self.map_terms(|t| CoherentTerm::new(t.coeff, order.iter().map(|&m| t.amps[m]).collect())))
    }

    /// Partial inner product `⟨bra|_{modes} |self⟩`, leaving the remaining
    /// modes in their original order. `bra.num_modes()` must equal
    /// `modes.len()` and at least one mode must remain.
    pub fn partial_overlap(&self, bra: &Self, modes: &[usize]) -> Result<Self> {
        if bra.num_modes != modes.len() {
            return Err(Error::DimensionMismatch { expected: modes.len(), found: bra.num_modes });
        }
        for &m in modes {
            self.check_mode(m)?;
        }
        let rest: Vec<usize> = (0..self.num_modes).filter(|m| !modes.contains(m)).collect();
        if rest.is_empty() || rest.len() + modes.len() != self.num_modes {
            return Err(Error::InvalidArgument("partial overlap must leave at least one mode and list each contracted mode once".into()));
        }
        let mut terms = Vec::with_capacity(self.terms.len() * bra.terms.len());
        for ket in &self.terms {
            for b in &bra.terms {
                let log: C64 = modes.iter().zip(&b.amps).map(|(&m, &a)| log_kernel(a, ket.amps[m])).sum();
                terms.push(CoherentTerm::new(
                    b.coeff.conj() * ket.coeff * log.exp(),
                    rest.iter().map(|&m| ket.amps[m]).collect(),
                ));
            }
        }
        Ok(Self::assemble(rest.len(), terms, self.tol))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&StateDoc::from(self))?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: StateDoc = serde_json::from_str(text)?;
        doc.try_into()
    }
}

/// Conjugate-symmetric `⟨s1|s2⟩`.
pub fn overlap(s1: &CoherentSuperposition, s2: &CoherentSuperposition) -> Result<C64> {
    s1.overlap(s2)
}

/// `|⟨ŝ1|ŝ2⟩|²` of the normalized states.
pub fn fidelity(s1: &CoherentSuperposition, s2: &CoherentSuperposition) -> Result<f64> {
    let a = s1.normalize()?;
    let b = s2.normalize()?;
    Ok(a.overlap(&b)?.norm_sqr().min(1.0))
}

/// `G[j][k] = ⟨s_j|s_k⟩`.
pub fn gram_matrix(states: &[CoherentSuperposition]) -> Result<DMatrix<C64>> {
    let n = states.len();
    let mut g = DMatrix::from_element(n, n, C64::new(0.0, 0.0));
    for j in 0..n {
        for k in j..n {
            let v = states[j].overlap(&states[k])?;
            g[(j, k)] = v;
            g[(k, j)] = v.conj();
        }
        g[(j, j)] = C64::new(g[(j, j)].re, 0.0);
    }
    Ok(g)
}

/// `exp(-iπ ω/χ · a†a)` angle for free evolution over `t = π/χ`, with `ω`
/// expressed in units of `χ`.
pub fn free_phase_angle(omega_over_chi: f64) -> f64 {
    PI * omega_over_chi
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TermDoc {
    coeff: [f64; 2],
    amps: Vec<[f64; 2]>,
}

/// Wire form: `{num_modes, terms:[{coeff:[re,im], amps:[[re,im],...]}]}`.
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StateDoc {
    num_modes: usize,
    terms: Vec<TermDoc>,
}

impl From<&CoherentSuperposition> for StateDoc {
    fn from(s: &CoherentSuperposition) -> Self {
        StateDoc {
            num_modes: s.num_modes,
            terms: s
                .terms
                .iter()
                .map(|t| TermDoc {
                    coeff: [t.coeff.re, t.coeff.im],
                    amps: t.amps.iter().map(|a| [a.re, a.im]).collect(),
                })
                .collect(),
        }
    }
}

impl TryFrom<StateDoc> for CoherentSuperposition {
    type Error = Error;

    fn try_from(doc: StateDoc) -> Result<Self> {
        let terms = doc
            .terms
            .into_iter()
            .map(|t| {
                CoherentTerm::new(
                    C64::new(t.coeff[0], t.coeff[1]),
                    t.amps.into_iter().map(|a| C64::new(a[0], a[1])).collect(),
                )
            })
            .collect();
        CoherentSuperposition::new(doc.num_modes, terms)
    }
}

impl Serialize for CoherentSuperposition {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        StateDoc::from(self).serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for CoherentSuperposition {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let doc = StateDoc::deserialize(deserializer)?;
        doc.try_into().map_err(serde::de::Error::custom)
    }
}
