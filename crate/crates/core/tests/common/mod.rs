//! Independent number-basis oracle for the ideal protocol. Shares only the
//! truncated-Fock primitives with the crate; every state, the Bell basis, the
//! Löwdin step and the corrections are rebuilt here as dense vectors.

#![allow(dead_code)]

use cat_teleport::coherent::C64;
use cat_teleport::fock::{
    coherent_coefficients, evolve, fock_displacement, fock_parity, truncation_rule, DynamicsParams, FockVector,
};
use nalgebra::DMatrix;

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn normalized(v: FockVector) -> FockVector {
    let n = v.norm_sqr().sqrt();
    v.scale(c(1.0 / n, 0.0))
}

pub fn coherent_vec(amp: C64, dim: usize) -> FockVector {
    FockVector::from_data(&[dim], coherent_coefficients(amp, dim)).unwrap()
}

pub fn product(parts: &[&FockVector]) -> FockVector {
    let dims: Vec<usize> = parts.iter().flat_map(|p| p.dims().to_vec()).collect();
    let mut data = vec![c(1.0, 0.0)];
    for p in parts {
        let mut next = Vec::with_capacity(data.len() * p.data().len());
        for &a in &data {
            next.extend(p.data().iter().map(|&b| a * b));
        }
        data = next;
    }
    FockVector::from_data(&dims, data).unwrap()
}

/// Quasi-Bell state grown from `|x⟩|y⟩` by the Kerr dynamics for the row
/// that produces `label_index` (0..4 as Φ+, Φ−, Ψ+, Ψ−).
pub fn kerr_bell(label_index: usize, x: f64, y: f64, dims: [usize; 2]) -> FockVector {
    let (wa, wb) = [(2.0, 2.0), (2.0, 1.0), (1.0, 2.0), (1.0, 1.0)][label_index];
    let input = product(&[&coherent_vec(c(x, 0.0), dims[0]), &coherent_vec(c(y, 0.0), dims[1])]);
    normalized(evolve(&input, &DynamicsParams::at_pi_over_chi(wa, wb, 1.0).unwrap()).unwrap())
}

pub struct OracleBranch {
    pub probability: f64,
    pub fidelity: f64,
}

pub struct OracleRun {
    pub branches: Vec<OracleBranch>,
    pub inconclusive: f64,
}

/// Ideal protocol in the number basis on modes `(a, T, b)`.
pub fn fock_ideal_pipeline(c_a: C64, c_b: C64, alpha: f64, beta: f64, gamma: f64, mu: C64) -> OracleRun {
    let da = truncation_rule(alpha) + 6;
    let dt = truncation_rule(gamma) + 6;
    let db = truncation_rule(beta + mu.norm()) + 10;
    let target = normalized(coherent_vec(c(gamma, 0.0), dt).scale(c_a).add(&coherent_vec(c(-gamma, 0.0), dt).scale(c_b)).unwrap());
    let resource = kerr_bell(0, alpha, beta, [da, db]);
    // (a, T, b): interleave the target between the resource modes
    let mut total = FockVector::zeros(&[da, dt, db]).unwrap();
    let mut data = total.data().to_vec();
    for i in 0..da {
        for t in 0..dt {
            for k in 0..db {
                data[(i * dt + t) * db + k] = resource.data()[i * db + k] * target.data()[t];
            }
        }
    }
    total = FockVector::from_data(&[da, dt, db], data).unwrap();

    let basis: Vec<FockVector> = (0..4).map(|j| kerr_bell(j, alpha, gamma, [da, dt])).collect();
    let gram = DMatrix::from_fn(4, 4, |j, k| basis[j].inner(&basis[k]).unwrap());
    let eig = gram.symmetric_eigen();
    let d = DMatrix::from_diagonal(&eig.eigenvalues.map(|x| c(1.0 / x.sqrt(), 0.0)));
    let inv_sqrt = &eig.eigenvectors * d * eig.eigenvectors.adjoint();
    let effects: Vec<FockVector> = (0..4)
        .map(|k| {
            let mut acc = FockVector::zeros(&[da, dt]).unwrap();
            for (j, b) in basis.iter().enumerate() {
                acc = acc.add(&b.scale(inv_sqrt[(j, k)])).unwrap();
            }
            acc
        })
        .collect();

    let ideal = normalized(coherent_vec(c(beta, 0.0), db).scale(c_a).add(&coherent_vec(c(-beta, 0.0), db).scale(c_b)).unwrap());
    let parity = fock_parity(db);
    let disp = fock_displacement(db, mu) * c(0.0, 1.0);
    let corrections: [Option<DMatrix<C64>>; 4] = [None, Some(parity.clone()), Some(disp.clone()), Some(&parity * &disp)];
    let mut branches = Vec::new();
    for (k, e) in effects.iter().enumerate() {
        let cond = total.partial_inner(e, &[0, 1]).unwrap();
        let probability = cond.norm_sqr();
        let fixed = match &corrections[k] {
            Some(u) => cond.apply_mode_operator(0, u).unwrap(),
            None => cond.clone(),
        };
        let fidelity = ideal.inner(&fixed).unwrap().norm_sqr() / fixed.norm_sqr();
        branches.push(OracleBranch { probability, fidelity });
    }
    let inconclusive = total.norm_sqr() - branches.iter().map(|b| b.probability).sum::<f64>();
    OracleRun { branches, inconclusive }
}

/// Least-squares slope of `log y` against `log x`.
pub fn log_log_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let num: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let den: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    num / den
}

/// One step of a random two-mode operator pipeline.
#[derive(Clone, Copy, Debug)]
pub enum Op {
    Displace(usize, C64),
    Parity(usize),
    Rotate(usize, f64),
    CrossKerrPi,
}

pub fn apply_exact(
    s: &cat_teleport::coherent::CoherentSuperposition,
    op: Op,
) -> cat_teleport::coherent::CoherentSuperposition {
    match op {
        Op::Displace(m, e) => s.displace(m, e).unwrap(),
        Op::Parity(m) => s.parity(m).unwrap(),
        Op::Rotate(m, t) => s.rotate(m, t).unwrap(),
        Op::CrossKerrPi => s.cross_kerr_pi(0, 1).unwrap(),
    }
}

pub fn apply_fock(v: &FockVector, op: Op) -> FockVector {
    match op {
        Op::Displace(m, e) => v.apply_mode_operator(m, &fock_displacement(v.dims()[m], e)).unwrap(),
        Op::Parity(m) => v.apply_mode_operator(m, &fock_parity(v.dims()[m])).unwrap(),
        Op::Rotate(m, t) => v.rotate(m, t).unwrap(),
        Op::CrossKerrPi => v.cross_kerr(0, 1, std::f64::consts::PI).unwrap(),
    }
}

/// Fidelity between the exact pipeline output and the same pipeline run in
/// the number basis from the truncated input.
pub fn backend_fidelity(input: &cat_teleport::coherent::CoherentSuperposition, ops: &[Op], dim: usize) -> f64 {
    let dims = [dim, dim];
    let mut exact = input.clone();
    let mut fock = cat_teleport::fock::to_fock(input, &dims).unwrap();
    for &op in ops {
        exact = apply_exact(&exact, op);
        fock = apply_fock(&fock, op);
    }
    cat_teleport::fock::to_fock(&exact, &dims).unwrap().fidelity(&fock).unwrap()
}

/// Random pipeline: up to three input terms with `|amp| ≤ 1.5` and up to
/// three displacements of size `≤ 0.5`, so every amplitude stays `≤ 3`.
pub fn random_pipeline<R: rand::Rng>(rng: &mut R) -> (cat_teleport::coherent::CoherentSuperposition, Vec<Op>) {
    use cat_teleport::coherent::{CoherentSuperposition, CoherentTerm};
    let amp = |r: f64, rng: &mut R| C64::from_polar(r * rng.random::<f64>().sqrt(), rng.random_range(0.0..std::f64::consts::TAU));
    let n_terms = rng.random_range(1..=3);
    let terms = (0..n_terms)
        .map(|_| {
            let coeff = c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            CoherentTerm::new(coeff, vec![amp(1.5, rng), amp(1.5, rng)])
        })
        .collect();
    let input = CoherentSuperposition::new(2, terms).unwrap();
    let mut displacements = 0;
    let mut ops = Vec::new();
    for _ in 0..rng.random_range(1..=6) {
        let mode = rng.random_range(0..2);
        let op = match rng.random_range(0..4) {
            0 if displacements < 3 => {
                displacements += 1;
                Op::Displace(mode, amp(0.5, rng))
            }
            0 | 1 => Op::Parity(mode),
            2 => Op::Rotate(mode, rng.random_range(0.0..std::f64::consts::TAU)),
            _ => Op::CrossKerrPi,
        };
        ops.push(op);
    }
    (input, ops)
}
