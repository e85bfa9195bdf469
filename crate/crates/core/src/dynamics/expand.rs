//! The conditioned cycle evolution written out in `η_j = cos((λ/2)L_j)` and
//! `ν_j = sin((λ/2)L_j)` factors.

use num_complex::Complex64;

use super::{QecSetup, SyndromeHistory};
use crate::bath::Kernel;
use crate::error::{Error, Result};
use crate::stabilizer::{StabilizerCode, Syndrome};
use crate::summation::ComplexNeumaier;
use crate::vertex::{signed_sum, EngineOptions, Trig, TrigFactor, TrigProduct};

/// `coefficient · Π_{j∈sines} ν_j Π_{j∉sines} η_j`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CycleTerm {
    pub coefficient: Complex64,
    pub sines: u64,
}

/// `υ_m = identity · I + logical · Z̄`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CycleExpansion {
    pub identity: CycleTerm,
    pub logical: CycleTerm,
}

fn i_pow(k: u32) -> Complex64 {
    [Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0), Complex64::new(-1.0, 0.0), Complex64::new(0.0, -1.0)]
        [(k % 4) as usize]
}

/// Expansion of the evolution conditioned on `syndrome`, with recovery
/// `Z_S`: `i^{|S|} ν_S η_{S^c}` on the identity and `i^{n−|S|} η_S ν_{S^c}`
/// on `Z̄`.
pub fn expand_cycle(code: &StabilizerCode, syndrome: &Syndrome) -> Result<CycleExpansion> {
    if !code.is_dephasing_repetition() {
        return Err(Error::Structure(format!("code {} is not a dephasing repetition code", code.name)));
    }
    let partition = code.coset_partition()?;
    let class = partition
        .get(syndrome)
        .ok_or_else(|| Error::Domain(format!("syndrome {syndrome} does not label a coset")))?;
    let s = class.recovery.z_mask();
    let all = if code.n == 64 { u64::MAX } else { (1u64 << code.n) - 1 };
    let w = s.count_ones();
    Ok(CycleExpansion {
        identity: CycleTerm { coefficient: i_pow(w), sines: s },
        logical: CycleTerm { coefficient: i_pow(code.n as u32 - w), sines: all & !s },
    })
}

impl CycleTerm {
    /// Trig factors of this term for cycle `k`, all at one ordinal.
    pub fn factors(&self, setup: &QecSetup, k: usize, ordinal: usize) -> Vec<TrigFactor> {
        let half = 0.5 * setup.bath.lambda;
        (0..setup.code.n)
            .map(|j| TrigFactor {
                kind: if self.sines >> j & 1 == 1 { Trig::Sin } else { Trig::Cos },
                field: setup.increment_field(k, j).into_iter().map(|(p, w)| (p, half * w)).collect(),
                ordinal,
            })
            .collect()
    }
}

/// `⟨G_{bra}† G_{ket}⟩` for a history by expanding every cycle into trig
/// products, where `G_ℓ = Π_k (A_k + ℓ B_k)`. The in-cycle `σᶻσᶻ` phase is
/// not part of this expansion.
pub fn expansion_expectation(
    setup: &QecSetup,
    kernel: &dyn Kernel,
    history: &SyndromeHistory,
    bra_branch: f64,
    ket_branch: f64,
    opts: &EngineOptions,
) -> Result<Complex64> {
    let n_cyc = history.len();
    if 2 * n_cyc > 20 {
        return Err(Error::Size(format!("{n_cyc} cycles is too many for the trig expansion")));
    }
    let exps = history
        .syndromes
        .iter()
        .map(|s| expand_cycle(&setup.code, s))
        .collect::<Result<Vec<_>>>()?;
    let mut acc = ComplexNeumaier::new();
    for choice in 0..1u64 << (2 * n_cyc) {
        let mut prefactor = Complex64::new(1.0, 0.0);
        let mut factors = Vec::new();
        for k in 0..n_cyc {
            let logical = choice >> k & 1 == 1;
            let term = if logical { exps[k].logical } else { exps[k].identity };
            let sign = if logical { bra_branch } else { 1.0 };
            prefactor *= term.coefficient.conj() * sign;
            factors.extend(term.factors(setup, k, k));
        }
        for k in (0..n_cyc).rev() {
            let logical = choice >> (n_cyc + k) & 1 == 1;
            let term = if logical { exps[k].logical } else { exps[k].identity };
            let sign = if logical { ket_branch } else { 1.0 };
            prefactor *= term.coefficient * sign;
            factors.extend(term.factors(setup, k, 2 * n_cyc - 1 - k));
        }
        let product = TrigProduct { factors, prefactor };
        acc.add(signed_sum(kernel, &product, opts)?.value);
    }
    Ok(acc.value())
}
