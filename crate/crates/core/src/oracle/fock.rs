//! Dense simulation of qubits coupled to a few truncated oscillators, with
//! explicit syndrome projectors and recoveries.
//!
//! All qubits sit at the same point and couple through
//! `H = Σ_m ω_m a_m†a_m − (λ/2) Σ_j σᶻ_j Σ_m √w_m iω_m (a_m† − a_m)`, whose
//! interaction-picture coupling is `−(λ/2)σᶻ ∂_tθ` for the field of the
//! discrete bath. Logical NOT pulses flip every qubit.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;

use crate::bath::Mode;
use crate::dynamics::{CycleSchedule, SyndromeHistory};
use crate::error::{Error, Result};
use crate::stabilizer::StabilizerCode;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FockConfig {
    pub modes: Vec<Mode>,
    /// Fock states kept per mode.
    pub cutoff_dim: usize,
    pub n_qubits: usize,
    pub lambda: f64,
    /// Largest allowed `d^M · 2^n`.
    pub max_dim: usize,
}

impl FockConfig {
    pub fn new(modes: Vec<Mode>, cutoff_dim: usize, n_qubits: usize, lambda: f64) -> Self {
        Self { modes, cutoff_dim, n_qubits, lambda, max_dim: 4096 }
    }

    fn bath_dim(&self) -> Option<usize> {
        self.cutoff_dim.checked_pow(self.modes.len() as u32)
    }

    pub fn validate(&self) -> Result<()> {
        if self.cutoff_dim < 2 || self.modes.is_empty() || self.n_qubits == 0 || self.n_qubits > 12 {
            return Err(Error::Domain("need at least one mode, cutoff ≥ 2 and 1..=12 qubits".into()));
        }
        let total = self.bath_dim().and_then(|b| b.checked_mul(1 << self.n_qubits));
        match total {
            Some(t) if t <= self.max_dim => Ok(()),
            _ => Err(Error::Size(format!(
                "Fock space {}^{} x 2^{} exceeds the limit {}",
                self.cutoff_dim,
                self.modes.len(),
                self.n_qubits,
                self.max_dim
            ))),
        }
    }

    fn with_cutoff(&self, d: usize) -> Self {
        Self { cutoff_dim: d, max_dim: self.max_dim.max(d.pow(self.modes.len() as u32) << self.n_qubits), ..self.clone() }
    }
}

/// Propagators `exp(−iH(q)τ)` of the bath for total spin `q = Σ_j z_j`.
struct Propagators {
    eig: BTreeMap<i64, (DMatrix<Complex64>, Vec<f64>)>,
}

impl Propagators {
    fn new(cfg: &FockConfig) -> Result<Self> {
        let d = cfg.cutoff_dim;
        let dim = cfg.bath_dim().ok_or_else(|| Error::Size("bath dimension overflows".into()))?;
        let m = cfg.modes.len();
        // annihilation operator of mode `k` on the product space
        let lower = |k: usize| {
            let stride = d.pow((m - 1 - k) as u32);
            let mut a = DMatrix::<Complex64>::zeros(dim, dim);
            for col in 0..dim {
                let nk = col / stride % d;
                if nk > 0 {
                    a[(col - stride, col)] = Complex64::new((nk as f64).sqrt(), 0.0);
                }
            }
            a
        };
        let mut h0 = DMatrix::<Complex64>::zeros(dim, dim);
        let mut coupling = DMatrix::<Complex64>::zeros(dim, dim);
        for (k, mode) in cfg.modes.iter().enumerate() {
            let a = lower(k);
            let ad = a.adjoint();
            h0 += (&ad * &a) * Complex64::new(mode.omega, 0.0);
            let g = -0.5 * cfg.lambda * mode.weight.sqrt() * mode.omega;
            coupling += (&ad - &a) * Complex64::new(0.0, g);
        }
        let n = cfg.n_qubits as i64;
        let mut eig = BTreeMap::new();
        for q in (-n..=n).step_by(2) {
            let h = &h0 + &coupling * Complex64::new(q as f64, 0.0);
            let e = h.symmetric_eigen();
            eig.insert(q, (e.eigenvectors, e.eigenvalues.iter().copied().collect()));
        }
        Ok(Self { eig })
    }

    fn apply(&self, q: i64, tau: f64, v: &DVector<Complex64>) -> DVector<Complex64> {
        let (vecs, vals) = &self.eig[&q];
        let mut c = vecs.adjoint() * v;
        for (ci, e) in c.iter_mut().zip(vals) {
            *ci *= Complex64::from_polar(1.0, -e * tau);
        }
        vecs * c
    }
}

/// Register state: one bath vector per `σᶻ` configuration (bit `j` set
/// means `z_j = −1`).
type State = Vec<DVector<Complex64>>;

fn spin_sum(z: usize, n: usize) -> i64 {
    n as i64 - 2 * z.count_ones() as i64
}

fn evolve(props: &Propagators, state: &mut State, n: usize, tau: f64) {
    if tau == 0.0 {
        return;
    }
    for (z, v) in state.iter_mut().enumerate() {
        *v = props.apply(spin_sum(z, n), tau, v);
    }
}

fn flip_all(state: &mut State) {
    state.reverse();
}

fn run_cycle(props: &Propagators, state: &mut State, n: usize, sched: &CycleSchedule) {
    let mut t = 0.0;
    for &p in &sched.pulses {
        evolve(props, state, n, p - t);
        flip_all(state);
        t = p;
    }
    evolve(props, state, n, sched.delta - t);
    if sched.n_pulses() % 2 == 1 {
        flip_all(state);
    }
}

fn norm_sqr(state: &State) -> f64 {
    state.iter().map(|v| v.norm_squared()).sum()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FockHistory {
    pub history: SyndromeHistory,
    pub probability: f64,
    #[serde(skip)]
    pub rho: Option<[[Complex64; 2]; 2]>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FockRun {
    pub cutoff_dim: usize,
    pub histories: Vec<FockHistory>,
    /// Largest probability change between cutoffs `d` and `d + 2`.
    pub truncation_change: f64,
}

fn simulate(
    cfg: &FockConfig,
    code: &StabilizerCode,
    sched: &CycleSchedule,
    cycles: usize,
    alpha: Complex64,
    beta: Complex64,
) -> Result<Vec<FockHistory>> {
    cfg.validate()?;
    let n = cfg.n_qubits;
    if code.n != n || !code.is_dephasing_repetition() {
        return Err(Error::Dimension(format!("code {} does not match {n} Fock qubits", code.name)));
    }
    let props = Propagators::new(cfg)?;
    let dim = cfg.bath_dim().unwrap_or(0);
    let mut vac = DVector::<Complex64>::zeros(dim);
    vac[0] = Complex64::new(1.0, 0.0);
    let amp = (2f64).powf(-0.5 * (n as f64 - 1.0));
    let init: State = (0..1usize << n)
        .map(|z| &vac * (if z.count_ones() % 2 == 0 { alpha } else { beta } * amp))
        .collect();
    let partition = code.coset_partition()?;
    let mut classes: Vec<_> = partition.ordered().into_iter().cloned().collect();
    classes.sort_by_key(|c| c.syndrome.bits());

    let mut branches = vec![(Vec::new(), init)];
    for _ in 0..cycles {
        let mut next = Vec::with_capacity(branches.len() * classes.len());
        for (hist, mut state) in branches {
            run_cycle(&props, &mut state, n, sched);
            for class in &classes {
                let mut s = state.clone();
                for (i, g) in code.stabilizer_generators.iter().enumerate() {
                    let sign = if class.syndrome.bits() >> i & 1 == 1 { -1.0 } else { 1.0 };
                    let xm = g.x_mask() as usize;
                    s = (0..s.len()).map(|z| (&s[z] + &s[z ^ xm] * Complex64::from(sign)) * Complex64::from(0.5)).collect();
                }
                let r = class.recovery.z_mask() as usize;
                for (z, v) in s.iter_mut().enumerate() {
                    if (z & r).count_ones() % 2 == 1 {
                        *v = -&*v;
                    }
                }
                let mut h = hist.clone();
                h.push(class.syndrome);
                next.push((h, s));
            }
        }
        branches = next;
    }
    Ok(branches
        .into_iter()
        .map(|(h, s)| {
            let p = norm_sqr(&s);
            let logical = |parity: u32| {
                let mut acc = DVector::<Complex64>::zeros(dim);
                for (z, v) in s.iter().enumerate() {
                    if z.count_ones() % 2 == parity {
                        acc += v * Complex64::from(amp);
                    }
                }
                acc
            };
            let (c0, c1) = (logical(0), logical(1));
            let rho = (p > 1e-30).then(|| {
                let r01 = c1.dotc(&c0) / p;
                [[Complex64::new(c0.norm_squared() / p, 0.0), r01], [r01.conj(), Complex64::new(c1.norm_squared() / p, 0.0)]]
            });
            FockHistory { history: SyndromeHistory::new(h), probability: p, rho }
        })
        .collect())
}

/// All syndrome histories of `cycles` cycles at cutoff `d`, checked against
/// cutoff `d + 2`.
pub fn fock_evolve(
    cfg: &FockConfig,
    code: &StabilizerCode,
    sched: &CycleSchedule,
    cycles: usize,
    alpha: Complex64,
    beta: Complex64,
    tolerance: f64,
) -> Result<FockRun> {
    let base = simulate(cfg, code, sched, cycles, alpha, beta)?;
    let finer = simulate(&cfg.with_cutoff(cfg.cutoff_dim + 2), code, sched, cycles, alpha, beta)?;
    let change = base.iter().zip(&finer).map(|(a, b)| (a.probability - b.probability).abs()).fold(0.0, f64::max);
    if change > tolerance {
        return Err(Error::Truncation(format!(
            "probabilities move by {change:e} between cutoffs {} and {}",
            cfg.cutoff_dim,
            cfg.cutoff_dim + 2
        )));
    }
    Ok(FockRun { cutoff_dim: cfg.cutoff_dim, histories: base, truncation_change: change })
}

/// One cycle; see [`fock_evolve`].
pub fn fock_evolve_cycle(
    cfg: &FockConfig,
    code: &StabilizerCode,
    sched: &CycleSchedule,
    alpha: Complex64,
    beta: Complex64,
    tolerance: f64,
) -> Result<FockRun> {
    fock_evolve(cfg, code, sched, 1, alpha, beta, tolerance)
}

/// `ρ₀₁(t)/ρ₀₁(0)` of a single qubit coupled to the modes, without error
/// correction.
pub fn fock_free_coherence(cfg: &FockConfig, t: f64) -> Result<Complex64> {
    if cfg.n_qubits != 1 {
        return Err(Error::Dimension("free coherence is defined for one qubit".into()));
    }
    cfg.validate()?;
    let props = Propagators::new(cfg)?;
    let dim = cfg.bath_dim().unwrap_or(0);
    let mut vac = DVector::<Complex64>::zeros(dim);
    vac[0] = Complex64::new(1.0, 0.0);
    let up = props.apply(1, t, &vac);
    let down = props.apply(-1, t, &vac);
    Ok(down.dotc(&up))
}
