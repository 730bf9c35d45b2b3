//! Truncated number-basis backend.
//!
//! Dense state vectors over `⊗_k span{|0⟩…|d_k−1⟩}` and the single-mode
//! operators used by the protocol. Everything here is brute force on purpose;
//! it is the oracle the exact coherent algebra is checked against, and it
//! handles what the coherent algebra cannot (generic evolution times, sharp
//! quadrature projections).

use nalgebra::{DMatrix, SymmetricEigen};

use crate::coherent::{CoherentSuperposition, C64};
use crate::error::{Error, Result};

const ZERO: C64 = C64::new(0.0, 0.0);

#[derive(Clone, Debug, PartialEq)]
pub struct FockVector {
    dims: Vec<usize>,
    data: Vec<C64>,
}

impl FockVector {
    pub fn zeros(dims: &[usize]) -> Result<Self> {
        check_dims(dims)?;
        Ok(Self { dims: dims.to_vec(), data: vec![ZERO; dims.iter().product()] })
    }

    pub fn from_data(dims: &[usize], data: Vec<C64>) -> Result<Self> {
        check_dims(dims)?;
        let len: usize = dims.iter().product();
        if data.len() != len {
            return Err(Error::DimensionMismatch { expected: len, found: data.len() });
        }
        Ok(Self { dims: dims.to_vec(), data })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn num_modes(&self) -> usize {
        self.dims.len()
    }

    fn stride(&self, mode: usize) -> usize {
        self.dims[mode + 1..].iter().product()
    }

    fn check_mode(&self, mode: usize) -> Result<()> {
        if mode >= self.dims.len() {
            return Err(Error::ModeOutOfRange { mode, num_modes: self.dims.len() });
        }
        Ok(())
    }

    pub fn norm_sqr(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }

    /// `|1 − ‖v‖²|`; meaningful for vectors converted from normalized states.
    pub fn leakage(&self) -> f64 {
        (1.0 - self.norm_sqr()).abs()
    }

    pub fn inner(&self, other: &Self) -> Result<C64> {
        if self.dims != other.dims {
            return Err(Error::InvalidArgument(format!("dims {:?} vs {:?}", self.dims, other.dims)));
        }
        Ok(self.data.iter().zip(&other.data).map(|(a, b)| a.conj() * b).sum())
    }

    pub fn fidelity(&self, other: &Self) -> Result<f64> {
        let (na, nb) = (self.norm_sqr(), other.norm_sqr());
        if na == 0.0 || nb == 0.0 {
            return Err(Error::DegenerateState { norm: na.min(nb).sqrt() });
        }
        Ok((self.inner(other)?.norm_sqr() / (na * nb)).min(1.0))
    }

    pub fn scale(&self, factor: C64) -> Self {
        Self { dims: self.dims.clone(), data: self.data.iter().map(|z| z * factor).collect() }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.dims != other.dims {
            return Err(Error::InvalidArgument(format!("dims {:?} vs {:?}", self.dims, other.dims)));
        }
        Ok(Self { dims: self.dims.clone(), data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect() })
    }

    /// Applies a `d×d` operator to one mode.
    pub fn apply_mode_operator(&self, mode: usize, op: &DMatrix<C64>) -> Result<Self> {
        self.check_mode(mode)?;
        let d = self.dims[mode];
        if op.nrows() != d || op.ncols() != d {
            return Err(Error::DimensionMismatch { expected: d, found: op.nrows() });
        }
        let inner = self.stride(mode);
        let outer = self.data.len() / (d * inner);
        let mut out = vec![ZERO; self.data.len()];
        let mut column = vec![ZERO; d];
        for o in 0..outer {
            for i in 0..inner {
                let base = o * d * inner + i;
                for (n, slot) in column.iter_mut().enumerate() {
                    *slot = self.data[base + n * inner];
                }
                for r in 0..d {
                    let mut acc = ZERO;
                    for (k, &v) in column.iter().enumerate() {
                        acc += op[(r, k)] * v;
                    }
                    out[base + r * inner] = acc;
                }
            }
        }
        Ok(Self { dims: self.dims.clone(), data: out })
    }

    /// Multiplies each basis coefficient by `phase(n_0, n_1, …)`.
    pub fn map_diagonal(&self, mut phase: impl FnMut(&[usize]) -> C64) -> Self {
        let mut idx = vec![0usize; self.dims.len()];
        let mut data = Vec::with_capacity(self.data.len());
        for &z in &self.data {
            data.push(z * phase(&idx));
            for k in (0..idx.len()).rev() {
                idx[k] += 1;
                if idx[k] < self.dims[k] {
                    break;
                }
                idx[k] = 0;
            }
        }
        Self { dims: self.dims.clone(), data }
    }

    /// `exp(-iθ n)` on `mode`.
    pub fn rotate(&self, mode: usize, theta: f64) -> Result<Self> {
        self.check_mode(mode)?;
        Ok(self.map_diagonal(|n| C64::from_polar(1.0, -theta * n[mode] as f64)))
    }

    /// `exp(-i·angle·n_A n_B)`; `angle = π` is the entangling step.
    pub fn cross_kerr(&self, mode_a: usize, mode_b: usize, angle: f64) -> Result<Self> {
        self.check_mode(mode_a)?;
        self.check_mode(mode_b)?;
        if mode_a == mode_b {
            return Err(Error::InvalidArgument("cross-Kerr needs two distinct modes".into()));
        }
        Ok(self.map_diagonal(|n| C64::from_polar(1.0, -angle * (n[mode_a] * n[mode_b]) as f64)))
    }

    /// Partial inner product `⟨bra|_{modes}|self⟩` over the listed modes; the
    /// remaining modes keep their order.
    pub fn partial_inner(&self, bra: &Self, modes: &[usize]) -> Result<Self> {
        if bra.dims.len() != modes.len() {
            return Err(Error::DimensionMismatch { expected: modes.len(), found: bra.dims.len() });
        }
        for (k, &m) in modes.iter().enumerate() {
            self.check_mode(m)?;
            if self.dims[m] != bra.dims[k] {
                return Err(Error::DimensionMismatch { expected: self.dims[m], found: bra.dims[k] });
            }
        }
        let rest: Vec<usize> = (0..self.dims.len()).filter(|m| !modes.contains(m)).collect();
        if rest.is_empty() || rest.len() + modes.len() != self.dims.len() {
            return Err(Error::InvalidArgument("partial inner product must leave at least one mode".into()));
        }
        let rest_dims: Vec<usize> = rest.iter().map(|&m| self.dims[m]).collect();
        let mut out = FockVector::zeros(&rest_dims)?;
        let bra_strides: Vec<usize> = (0..modes.len()).map(|k| bra.stride(k)).collect();
        let rest_strides: Vec<usize> = (0..rest.len()).map(|k| out.stride(k)).collect();
        let mut idx = vec![0usize; self.dims.len()];
        for &z in &self.data {
            let b: usize = modes.iter().zip(&bra_strides).map(|(&m, s)| idx[m] * s).sum();
            let r: usize = rest.iter().zip(&rest_strides).map(|(&m, s)| idx[m] * s).sum();
            out.data[r] += bra.data[b].conj() * z;
            for k in (0..idx.len()).rev() {
                idx[k] += 1;
                if idx[k] < self.dims[k] {
                    break;
                }
                idx[k] = 0;
            }
        }
        Ok(out)
    }
}

fn check_dims(dims: &[usize]) -> Result<()> {
    if dims.is_empty() || dims.contains(&0) {
        return Err(Error::InvalidArgument(format!("invalid truncation dims {dims:?}")));
    }
    Ok(())
}

/// Number-basis coefficients `e^{-|α|²/2} αⁿ/√(n!)` for `n < dim`.
pub fn coherent_coefficients(alpha: C64, dim: usize) -> Vec<C64> {
    let mut out = Vec::with_capacity(dim);
    let mut c = C64::new((-0.5 * alpha.norm_sqr()).exp(), 0.0);
    for n in 0..dim {
        if n > 0 {
            c = c * alpha / (n as f64).sqrt();
        }
        out.push(c);
    }
    out
}

/// Expands an exact superposition in the truncated number basis.
pub fn to_fock(s: &CoherentSuperposition, dims: &[usize]) -> Result<FockVector> {
    if dims.len() != s.num_modes() {
        return Err(Error::DimensionMismatch { expected: s.num_modes(), found: dims.len() });
    }
    let mut v = FockVector::zeros(dims)?;
    for term in s.terms() {
        let per_mode: Vec<Vec<C64>> =
            term.amps.iter().zip(dims).map(|(&a, &d)| coherent_coefficients(a, d)).collect();
        // running outer product, mode 0 slowest
        let mut acc = vec![term.coeff];
        for coeffs in &per_mode {
            let mut next = Vec::with_capacity(acc.len() * coeffs.len());
            for &a in &acc {
                next.extend(coeffs.iter().map(|&c| a * c));
            }
            acc = next;
        }
        for (slot, z) in v.data.iter_mut().zip(acc) {
            *slot += z;
        }
    }
    Ok(v)
}

/// Parameters of `H/ħ = ω_a a†a + ω_b b†b + χ a†a b†b`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DynamicsParams {
    pub omega_a: f64,
    pub omega_b: f64,
    pub chi: f64,
    pub t: f64,
}

impl DynamicsParams {
    pub fn new(omega_a: f64, omega_b: f64, chi: f64, t: f64) -> Result<Self> {
        if !(chi > 0.0) || ![omega_a, omega_b, chi, t].iter().all(|x| x.is_finite()) {
            return Err(Error::InvalidArgument(format!("need finite parameters and chi > 0, got chi = {chi}")));
        }
        Ok(Self { omega_a, omega_b, chi, t })
    }

    /// Interaction time `t = π/χ`.
    pub fn at_pi_over_chi(omega_a: f64, omega_b: f64, chi: f64) -> Result<Self> {
        Self::new(omega_a, omega_b, chi, std::f64::consts::PI / chi)
    }
}

/// `U(t) = exp(-iHt)`; diagonal in the number basis.
pub fn evolve(v: &FockVector, p: &DynamicsParams) -> Result<FockVector> {
    if v.num_modes() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, found: v.num_modes() });
    }
    Ok(v.map_diagonal(|n| {
        let (m, k) = (n[0] as f64, n[1] as f64);
        C64::from_polar(1.0, -(p.omega_a * m + p.omega_b * k + p.chi * m * k) * p.t)
    }))
}

pub fn annihilation(dim: usize) -> DMatrix<C64> {
    DMatrix::from_fn(dim, dim, |r, c| if c == r + 1 { C64::new((c as f64).sqrt(), 0.0) } else { ZERO })
}

/// `X = a + a†`.
pub fn quadrature_x(dim: usize) -> DMatrix<C64> {
    let a = annihilation(dim);
    &a + a.adjoint()
}

/// Diagonal `(−1)ⁿ`.
pub fn fock_parity(dim: usize) -> DMatrix<C64> {
    DMatrix::from_fn(dim, dim, |r, c| {
        if r == c {
            C64::new(if r % 2 == 0 { 1.0 } else { -1.0 }, 0.0)
        } else {
            ZERO
        }
    })
}

/// `exp(ε a† − conj(ε) a)` on the truncated ladder, via the Hermitian
/// eigendecomposition of `i(ε a† − conj(ε) a)`. Accurate on the low-energy
/// subspace only; unitary to rounding everywhere.
pub fn fock_displacement(dim: usize, eps: C64) -> DMatrix<C64> {
    let a = annihilation(dim);
    let generator = a.adjoint() * eps - a * eps.conj();
    let hermitian = generator * C64::new(0.0, 1.0);
    let eig = SymmetricEigen::new(hermitian);
    let phases = DMatrix::from_diagonal(&eig.eigenvalues.map(|h| C64::from_polar(1.0, -h)));
    &eig.eigenvectors * phases * eig.eigenvectors.adjoint()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QuadratureSign {
    Positive,
    Negative,
}

impl QuadratureSign {
    pub fn of(x: f64) -> Self {
        if x >= 0.0 {
            QuadratureSign::Positive
        } else {
            QuadratureSign::Negative
        }
    }

    pub fn as_f64(self) -> f64 {
        match self {
            QuadratureSign::Positive => 1.0,
            QuadratureSign::Negative => -1.0,
        }
    }

    pub fn flip(self) -> Self {
        match self {
            QuadratureSign::Positive => QuadratureSign::Negative,
            QuadratureSign::Negative => QuadratureSign::Positive,
        }
    }
}

/// Hermite functions `ψ_n(0)` and `ψ_n'(0)` for `n < dim`.
fn hermite_at_origin(dim: usize) -> (Vec<f64>, Vec<f64>) {
    let mut value = vec![0.0; dim + 1];
    value[0] = std::f64::consts::PI.powf(-0.25);
    for n in 1..=dim {
        // ψ_{n}(0) = −√((n−1)/n) ψ_{n−2}(0)
        value[n] = if n >= 2 { -(((n - 1) as f64) / n as f64).sqrt() * value[n - 2] } else { 0.0 };
    }
    let slope = (0..dim)
        .map(|n| {
            let down = if n > 0 { (n as f64 / 2.0).sqrt() * value[n - 1] } else { 0.0 };
            down - ((n + 1) as f64 / 2.0).sqrt() * value[n + 1]
        })
        .collect();
    value.truncate(dim);
    (value, slope)
}

/// Projector onto `X > 0` (or `X < 0`) with exact position-space matrix
/// elements `∫₀^∞ ψ_m ψ_n dx`, restricted to the first `dim` number states.
///
/// Off-diagonal elements come from the Wronskian identity
/// `(ψ_m ψ_n' − ψ_n ψ_m')' = 2(m−n) ψ_m ψ_n`. Expectation values on states
/// supported below `dim` are exact up to truncation leakage; `P⁺ + P⁻ = I`
/// holds exactly. A sharp half-line cut couples to arbitrarily high number
/// states, so `P² = P` holds only as `dim → ∞`.
pub fn half_line_projector(dim: usize, sign: QuadratureSign) -> DMatrix<C64> {
    let (psi, dpsi) = hermite_at_origin(dim);
    let positive = DMatrix::from_fn(dim, dim, |m, n| {
        if m == n {
            0.5
        } else {
            let w = psi[m] * dpsi[n] - psi[n] * dpsi[m];
            -w / (2.0 * (m as f64 - n as f64))
        }
    });
    let p = match sign {
        QuadratureSign::Positive => positive,
        QuadratureSign::Negative => DMatrix::identity(dim, dim) - positive,
    };
    p.map(|x| C64::new(x, 0.0))
}

/// Spectral projector onto the positive (negative) eigenspace of the
/// truncated `X`. Exactly idempotent in the truncated space, but its
/// expectation values are a Gauss–Hermite discretization of the half-line
/// integral and converge only slowly with `dim`. For odd `dim` the zero
/// eigenvector is split evenly between the two signs.
pub fn spectral_half_line_projector(dim: usize, sign: QuadratureSign) -> DMatrix<C64> {
    let x = quadrature_x(dim).map(|z| z.re);
    let eig = SymmetricEigen::new(x);
    let mut p = DMatrix::<f64>::zeros(dim, dim);
    for (k, &lambda) in eig.eigenvalues.iter().enumerate() {
        let weight = if lambda.abs() < 1e-12 {
            0.5
        } else if QuadratureSign::of(lambda) == sign {
            1.0
        } else {
            0.0
        };
        if weight > 0.0 {
            let v = eig.eigenvectors.column(k);
            p += weight * v * v.transpose();
        }
    }
    p.map(|x| C64::new(x, 0.0))
}

/// Truncation dimension `⌈|a|² + 6|a| + 10⌉`.
pub fn truncation_rule(max_abs_amplitude: f64) -> usize {
    let a = max_abs_amplitude.abs();
    (a * a + 6.0 * a + 10.0).ceil() as usize
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    /// Poisson tail `Σ_{n≥d} e^{-x} xⁿ/n!`, summed forward in log space.
    fn poisson_tail(x: f64, d: usize) -> f64 {
        let ln_fact = |n: usize| (1..=n).map(|k| (k as f64).ln()).sum::<f64>();
        (d..d + 400).map(|n| (-x + n as f64 * x.ln() - ln_fact(n)).exp()).sum()
    }

    fn max_abs_diff(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
        (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    #[test]
    fn vacuum_maps_to_unit_vector() {
        let v = to_fock(&CoherentSuperposition::vacuum(1), &[8]).unwrap();
        assert_eq!(v.data()[0], c(1.0, 0.0));
        assert!(v.data()[1..].iter().all(|z| *z == ZERO));
    }

    #[test]
    fn vacuum_component_of_unit_coherent_state() {
        let v = to_fock(&CoherentSuperposition::coherent(&[c(1.0, 0.0)]).unwrap(), &[20]).unwrap();
        assert!((v.data()[0].re - 0.6065306597126334).abs() < 1e-15);
    }

    #[test]
    fn leakage_matches_poisson_tail() {
        let s = CoherentSuperposition::coherent(&[c(2.0, 0.0)]).unwrap();
        assert!(to_fock(&s, &[40]).unwrap().leakage() < 1e-12);
        for a in [0.0, 1.0, 2.0, 3.0, 4.0, 6.0, 8.0] {
            let d = truncation_rule(a);
            let tail = if a == 0.0 { 0.0 } else { poisson_tail(a * a, d) };
            assert!(tail < 1e-10, "a={a} d={d} tail={tail}");
            let v = to_fock(&CoherentSuperposition::coherent(&[c(a, 0.0)]).unwrap(), &[d]).unwrap();
            assert!((v.leakage() - tail).abs() < 1e-13, "a={a}: {} vs {tail}", v.leakage());
        }
    }

    #[test]
    fn truncation_rule_values() {
        assert_eq!(truncation_rule(0.0), 10);
        assert_eq!(truncation_rule(2.0), 26);
        assert_eq!(truncation_rule(4.0), 50);
    }

    #[test]
    fn fock_inner_product_reproduces_kernel() {
        let a = to_fock(&CoherentSuperposition::coherent(&[c(1.0, 0.0)]).unwrap(), &[40]).unwrap();
        let b = to_fock(&CoherentSuperposition::coherent(&[c(-1.0, 0.0)]).unwrap(), &[40]).unwrap();
        assert!((a.inner(&b).unwrap().re - 0.1353352832366127).abs() < 1e-12);
        assert!((a.fidelity(&b).unwrap() - 0.01831563888873418).abs() < 1e-12);
    }

    #[test]
    fn evolve_identity_and_norm() {
        let s = CoherentSuperposition::coherent(&[c(1.0, 0.3), c(-0.5, 1.0)]).unwrap();
        let v = to_fock(&s, &[20, 20]).unwrap();
        let p = DynamicsParams::new(1.3, 0.4, 0.9, 0.0).unwrap();
        assert_eq!(evolve(&v, &p).unwrap(), v);
        let p = DynamicsParams::new(1.3, 0.4, 0.9, 2.7).unwrap();
        let w = evolve(&v, &p).unwrap();
        for (x, y) in v.data().iter().zip(w.data()) {
            assert!((x.norm() - y.norm()).abs() <= 4.0 * f64::EPSILON * x.norm().max(1e-300));
        }
        assert!(DynamicsParams::new(1.0, 1.0, 0.0, 1.0).is_err());
        let three = FockVector::zeros(&[2, 2, 2]).unwrap();
        assert!(evolve(&three, &p).is_err());
    }

    #[test]
    fn cross_kerr_matches_exact_rewrite() {
        let s = CoherentSuperposition::coherent(&[c(1.0, 0.0), c(1.0, 0.0)]).unwrap();
        let dims = [40, 40];
        let fock = to_fock(&s, &dims).unwrap().cross_kerr(0, 1, PI).unwrap();
        let exact = to_fock(&s.cross_kerr_pi(0, 1).unwrap(), &dims).unwrap();
        assert!(fock.fidelity(&exact).unwrap() > 1.0 - 1e-12);
    }

    #[test]
    fn parity_is_involution() {
        let p = fock_parity(9);
        assert_eq!(&p * &p, DMatrix::identity(9, 9));
    }

    #[test]
    fn displacement_agrees_with_exact_algebra() {
        let s = CoherentSuperposition::coherent(&[c(1.0, 0.0)]).unwrap();
        let eps = c(0.0, 0.3);
        let d = fock_displacement(40, eps);
        let fock = to_fock(&s, &[40]).unwrap().apply_mode_operator(0, &d).unwrap();
        let exact = to_fock(&s.displace(0, eps).unwrap(), &[40]).unwrap();
        assert!(fock.fidelity(&exact).unwrap() > 1.0 - 1e-8);
        // same global phase too
        assert!((fock.inner(&exact).unwrap() - c(1.0, 0.0)).norm() < 1e-8);
    }

    #[test]
    fn displacement_unitary_on_low_energy_block() {
        let dim = 30;
        let d = fock_displacement(dim, c(0.4, -0.7));
        let u = d.adjoint() * &d;
        let half = dim / 2;
        let block = u.view((0, 0), (half, half)).into_owned();
        assert!(max_abs_diff(&block, &DMatrix::identity(half, half)) < 1e-10);
    }

    #[test]
    fn first_order_quadrature_approximation() {
        // ‖(D(ε) − I − i|ε|X)|α⟩‖ ≤ |ε|²(2|α|+1)²/2
        let dim = 40;
        let eps = c(0.0, 0.01);
        let v = to_fock(&CoherentSuperposition::coherent(&[c(1.0, 0.0)]).unwrap(), &[dim]).unwrap();
        let op = fock_displacement(dim, eps) - DMatrix::identity(dim, dim) - quadrature_x(dim) * c(0.0, eps.norm());
        let r = v.apply_mode_operator(0, &op).unwrap().norm_sqr().sqrt();
        assert!(r <= 4.5e-4, "{r}");
    }

    #[test]
    fn half_line_projector_values() {
        let dim = 40;
        let plus = half_line_projector(dim, QuadratureSign::Positive);
        let minus = half_line_projector(dim, QuadratureSign::Negative);
        assert!(max_abs_diff(&(&plus + &minus), &DMatrix::identity(dim, dim)) == 0.0);
        assert!(max_abs_diff(&plus, &plus.adjoint()) == 0.0);

        let vac = to_fock(&CoherentSuperposition::vacuum(1), &[dim]).unwrap();
        let e = vac.inner(&vac.apply_mode_operator(0, &plus).unwrap()).unwrap();
        assert!((e.re - 0.5).abs() < 1e-12);

        let expect = |a: f64, p: &DMatrix<C64>| {
            let v = to_fock(&CoherentSuperposition::coherent(&[c(a, 0.0)]).unwrap(), &[dim]).unwrap();
            v.inner(&v.apply_mode_operator(0, p).unwrap()).unwrap().re
        };
        let minus_at_one = expect(1.0, &minus);
        assert!((minus_at_one - 0.022750131948179195).abs() < 1e-10, "{minus_at_one}");
        assert!((expect(-1.3, &minus) - expect(1.3, &plus)).abs() < 1e-10);
    }

    #[test]
    fn spectral_projector_is_idempotent() {
        let dim = 40;
        let plus = spectral_half_line_projector(dim, QuadratureSign::Positive);
        let minus = spectral_half_line_projector(dim, QuadratureSign::Negative);
        assert!(max_abs_diff(&(&plus * &plus), &plus) < 1e-10);
        assert!(max_abs_diff(&(&plus + &minus), &DMatrix::identity(dim, dim)) < 1e-10);
        assert!(max_abs_diff(&plus, &plus.adjoint()) < 1e-12);
        let vac = to_fock(&CoherentSuperposition::vacuum(1), &[dim]).unwrap();
        let e = vac.inner(&vac.apply_mode_operator(0, &plus).unwrap()).unwrap();
        assert!((e.re - 0.5).abs() < 1e-9);
    }

    #[test]
    fn exact_projector_idempotence_improves_with_dim() {
        let v = |dim| to_fock(&CoherentSuperposition::coherent(&[c(0.8, 0.0)]).unwrap(), &[dim]).unwrap();
        let defect = |dim: usize| {
            let p = half_line_projector(dim, QuadratureSign::Positive);
            let x = v(dim);
            let px = x.apply_mode_operator(0, &p).unwrap();
            (px.norm_sqr() - x.inner(&px).unwrap().re).abs()
        };
        assert!(defect(400) < defect(50));
    }

    #[test]
    fn partial_inner_contracts_modes() {
        let s = CoherentSuperposition::coherent(&[c(0.5, 0.0), c(-0.3, 0.2), c(1.0, 0.0)]).unwrap();
        let bra = CoherentSuperposition::coherent(&[c(0.4, 0.0), c(0.9, 0.0)]).unwrap();
        let dims = [20, 20, 20];
        let fock = to_fock(&s, &dims).unwrap().partial_inner(&to_fock(&bra, &[20, 20]).unwrap(), &[0, 2]).unwrap();
        let exact = to_fock(&s.partial_overlap(&bra, &[0, 2]).unwrap(), &[20]).unwrap();
        let diff: f64 = fock.data().iter().zip(exact.data()).map(|(a, b)| (a - b).norm()).sum();
        assert!(diff < 1e-12);
    }
}
