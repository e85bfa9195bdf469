//! Joint statistics of two cycles with every cycle in between summed over.
//!
//! Summing a cycle over its syndromes forces `z′ = z` for that cycle. Its
//! couplings to operators outside its bra–ket sandwich then cancel, and so do
//! its couplings to other summed cycles; what is left is a purely imaginary
//! field `h` from the fixed cycles inside the sandwich, giving the factor
//! `M = 2^{1−n} Σ_z exp(Σ_j z_j h_j)`.

use num_complex::Complex64;
use serde::Serialize;

use super::engine::{configs, syndrome_masks, Geometry};
use super::QecSetup;
use crate::bath::{complex_expm1, complex_ln1p, Kernel};
use crate::error::{Error, Result};
use crate::stabilizer::Syndrome;
use crate::summation::ComplexNeumaier;

/// Two-cycle statistics for cycles `0` and `separation`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ConnectedPair {
    pub separation: usize,
    pub p_first: f64,
    pub p_second: f64,
    pub p_joint: f64,
    /// `p_joint − p_first·p_second`, evaluated without that subtraction.
    pub connected: f64,
}

/// `ln M_m` for a summed cycle `m` enclosing the fixed cycle `d` with bra and
/// ket configurations `zb`, `zk`.
fn log_marginal(g: &Geometry, zs: &[Vec<f64>], m: usize, d: usize, zb: &[f64], zk: &[f64]) -> Complex64 {
    let mut acc = ComplexNeumaier::new();
    for z in zs {
        let e = -(g.pair(d, zb, m, z) - g.pair(m, z, d, zb)) + (g.pair(d, zk, m, z) - g.pair(m, z, d, zk));
        acc.add(complex_expm1(e));
    }
    complex_ln1p(acc.value() / zs.len() as f64)
}

/// Statistics of syndrome `first` at cycle 0 and `second` at cycle
/// `separation ≥ 1`, all other cycles summed over.
pub fn marginal_pair(
    setup: &QecSetup,
    kernel: &dyn Kernel,
    separation: usize,
    first: &Syndrome,
    second: &Syndrome,
) -> Result<ConnectedPair> {
    setup.validate()?;
    if separation == 0 {
        return Err(Error::Domain("the two cycles must differ".into()));
    }
    let masks = syndrome_masks(setup)?;
    let find = |s: &Syndrome| {
        masks
            .iter()
            .find(|m| m.syndrome == *s)
            .map(|m| m.mask)
            .ok_or_else(|| Error::Domain(format!("syndrome {s} does not label a coset")))
    };
    let (ma, mb) = (find(first)?, find(second)?);
    let d = separation;
    let g = Geometry::new(setup, kernel, d + 1);
    let zs = configs(setup.code.n, false);
    let cc = zs.len();
    let norm = 1.0 / (cc * cc) as f64;
    let chi = |mask: u64, c: usize| if (mask & c as u64).count_ones() % 2 == 1 { -1.0 } else { 1.0 };
    // own exponent of a fixed cycle: bra and ket self terms, in-cycle phases
    // and the bra–ket pair
    let own = |k: usize, zb: &[f64], zk: &[f64]| {
        Complex64::new(g.self_term(k, zb) + g.self_term(k, zk), g.ising_phase(zk) - g.ising_phase(zb))
            - g.pair(k, zb, k, zk)
    };

    let mut first_terms = Vec::with_capacity(cc * cc);
    for cb in 0..cc {
        for ck in 0..cc {
            let w = chi(ma, cb) * chi(ma, ck) * norm;
            first_terms.push((cb, ck, w, own(0, &zs[cb], &zs[ck])));
        }
    }
    let p_first = first_terms.iter().map(|t| t.3.exp() * t.2).sum::<Complex64>().re;

    let (mut p_second, mut p_joint, mut connected) =
        (ComplexNeumaier::new(), ComplexNeumaier::new(), ComplexNeumaier::new());
    for cb in 0..cc {
        for ck in 0..cc {
            let (zb, zk) = (&zs[cb], &zs[ck]);
            let w_b = chi(mb, cb) * chi(mb, ck) * norm;
            if w_b == 0.0 {
                continue;
            }
            let e_b = own(d, zb, zk);
            let between: Complex64 = (1..d).map(|m| log_marginal(&g, &zs, m, d, zb, zk)).sum();
            let l0 = log_marginal(&g, &zs, 0, d, zb, zk);
            p_second.add((e_b + between + l0).exp() * w_b);
            for &(ab, ak, w_a, e_a) in &first_terms {
                let (za, zak) = (&zs[ab], &zs[ak]);
                // operator order: bra_0, bra_d, ket_d, ket_0
                let x = g.pair(0, za, d, zb) - g.pair(0, za, d, zk) - g.pair(d, zb, 0, zak) + g.pair(d, zk, 0, zak);
                let base = e_a + e_b + between;
                p_joint.add((base + x).exp() * (w_a * w_b));
                connected.add((base + l0).exp() * complex_expm1(x - l0) * (w_a * w_b));
            }
        }
    }
    Ok(ConnectedPair {
        separation,
        p_first,
        p_second: p_second.value().re,
        p_joint: p_joint.value().re,
        connected: connected.value().re,
    })
}

/// Connected correlation of the same single-qubit error (`σᶻ_j`) at cycle 0
/// and at cycle `separation`.
pub fn connected_pair(setup: &QecSetup, kernel: &dyn Kernel, separation: usize, qubit: usize) -> Result<ConnectedPair> {
    let z = crate::pauli::PauliOperator::z(setup.code.n, qubit)?;
    let s = setup.code.syndrome_of(&z)?;
    marginal_pair(setup, kernel, separation, &s, &s)
}
