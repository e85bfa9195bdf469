//! Error-correction cycles in the correlated bath: conditioned cycle
//! evolutions, syndrome-history probabilities and the logical state left
//! behind.
//!
//! During a cycle each qubit picks up the phase `e^{i(λ/2)σᶻ_j L_j}` where
//! `L_j` is the increment of the field at the qubit over the cycle (with
//! sign flips after each logical NOT pulse). Because `σᶻ` is conserved, the
//! conditioned evolution for a syndrome with recovery `Z_S` acts on the
//! logical state `|ℓ̄⟩` as the bath operator
//!
//! ```text
//! 2^{1−n} Σ_{z : Π z = ℓ} χ_S(z) W(z),   W(z) = exp(i(λ/2) Σ_j z_j L_j)
//! ```
//!
//! and history probabilities are Gaussian expectations of ordered products
//! of such operators.

mod correlations;
mod engine;
mod expand;
mod sampling;
#[cfg(test)]
mod tests_engine;

use std::fmt;

use num_complex::Complex64;
use serde::Serialize;

use crate::bath::{BathSpec, Kernel, Point};
use crate::error::{Error, Result};
use crate::stabilizer::{StabilizerCode, Syndrome};

pub use correlations::{connected_pair, marginal_pair, ConnectedPair};
pub use engine::{
    enumerate_histories, history_probability, reduced_density_matrix, HistoryEngine, HistoryTable,
};
pub use expand::{expand_cycle, expansion_expectation, CycleExpansion, CycleTerm};
pub use sampling::{sample_histories, SampleStatistics};

/// Pulse timing inside one cycle `[0, Δ]`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CycleSchedule {
    pub delta: f64,
    /// Times of the logical NOT pulses, strictly inside `(0, Δ)`.
    pub pulses: Vec<f64>,
}

impl CycleSchedule {
    pub fn new(delta: f64, pulses: Vec<f64>) -> Result<Self> {
        if !(delta > 0.0) || !delta.is_finite() {
            return Err(Error::Domain(format!("cycle duration must be positive, got {delta}")));
        }
        let mut prev = 0.0;
        for &t in &pulses {
            if !(t > prev) || !(t < delta) {
                return Err(Error::Domain(format!("pulse times must increase strictly inside (0, {delta}): {pulses:?}")));
            }
            prev = t;
        }
        Ok(Self { delta, pulses })
    }

    pub fn unpulsed(delta: f64) -> Result<Self> {
        Self::new(delta, vec![])
    }

    /// One logical NOT at `Δ/2`.
    pub fn midpoint(delta: f64) -> Result<Self> {
        Self::new(delta, vec![0.5 * delta])
    }

    /// `n` pulses at `Δ sin²(πp/(2n+2))`, which cancel the first `n`
    /// moments of the switching function.
    pub fn uhrig(delta: f64, n: usize) -> Result<Self> {
        let pulses = (1..=n)
            .map(|p| {
                let a = (std::f64::consts::PI * p as f64 / (2 * n + 2) as f64).sin();
                delta * a * a
            })
            .collect();
        Self::new(delta, pulses)
    }

    pub fn n_pulses(&self) -> usize {
        self.pulses.len()
    }

    /// `(start, end, sign)` of every constant-sign stretch.
    pub fn segments(&self) -> Vec<(f64, f64, f64)> {
        let mut bounds = vec![0.0];
        bounds.extend(&self.pulses);
        bounds.push(self.delta);
        bounds
            .windows(2)
            .enumerate()
            .map(|(i, w)| (w[0], w[1], if i % 2 == 0 { 1.0 } else { -1.0 }))
            .collect()
    }

    /// `(τ, w)` with `L = Σ w θ(τ)`.
    pub fn point_weights(&self) -> Vec<(f64, f64)> {
        let segs = self.segments();
        let mut out = Vec::with_capacity(segs.len() + 1);
        for (i, &(a, _, s)) in segs.iter().enumerate() {
            let prev = if i == 0 { 0.0 } else { segs[i - 1].2 };
            out.push((a, prev - s));
        }
        out.push((self.delta, segs.last().map_or(0.0, |s| s.2)));
        out
    }
}

/// Everything that fixes the dynamics of one logical qubit.
#[derive(Clone, Debug)]
pub struct QecSetup {
    pub bath: BathSpec,
    pub code: StabilizerCode,
    pub positions: Vec<f64>,
    pub schedule: CycleSchedule,
    pub alpha: Complex64,
    pub beta: Complex64,
    /// Keep the `σᶻσᶻ` phase generated inside a cycle by the bath
    /// commutator.
    pub coherent_coupling: bool,
    /// Drop every correlation between different cycles.
    pub memoryless: bool,
    /// Largest number of summed configuration bits, `2N(n−1)`.
    pub max_bits: usize,
    /// Histories below this probability get no density matrix.
    pub probability_floor: f64,
}

impl QecSetup {
    /// Three-qubit code with qubits `spacing` apart, no pulses.
    pub fn three_qubit(bath: BathSpec, delta: f64, spacing: f64) -> Result<Self> {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        Ok(Self {
            bath,
            code: StabilizerCode::three_qubit(),
            positions: vec![0.0, spacing, 2.0 * spacing],
            schedule: CycleSchedule::unpulsed(delta)?,
            alpha: Complex64::new(s, 0.0),
            beta: Complex64::new(s, 0.0),
            coherent_coupling: true,
            memoryless: false,
            max_bits: 24,
            probability_floor: 1e-30,
        })
    }

    pub fn with_schedule(mut self, schedule: CycleSchedule) -> Self {
        self.schedule = schedule;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.bath.validate_ordered()?;
        if !self.code.is_dephasing_repetition() {
            return Err(Error::Structure(format!("code {} is not a dephasing repetition code", self.code.name)));
        }
        if self.positions.len() != self.code.n {
            return Err(Error::Dimension(format!(
                "{} qubit positions for a {}-qubit code",
                self.positions.len(),
                self.code.n
            )));
        }
        let norm = self.alpha.norm_sqr() + self.beta.norm_sqr();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(Error::Domain(format!("|alpha|² + |beta|² = {norm}, expected 1")));
        }
        Ok(())
    }

    /// Setup with the amplitudes rescaled to unit norm.
    pub fn normalized(mut self) -> Result<Self> {
        let norm = (self.alpha.norm_sqr() + self.beta.norm_sqr()).sqrt();
        if !(norm > 0.0) {
            return Err(Error::Domain("alpha and beta are both zero".into()));
        }
        self.alpha /= norm;
        self.beta /= norm;
        Ok(self)
    }

    /// Field points and weights of `L_j` for cycle `k`.
    pub(crate) fn increment_field(&self, k: usize, j: usize) -> Vec<(Point, f64)> {
        let t0 = k as f64 * self.schedule.delta;
        self.schedule
            .point_weights()
            .into_iter()
            .map(|(t, w)| (Point::new(j, self.positions[j], t0 + t), w))
            .collect()
    }

    /// `I_jk` in the in-cycle phase `exp(i(λ/2)² Σ_{j≠k} z_j z_k I_jk)`.
    pub fn ising_couplings(&self, kernel: &dyn Kernel) -> Vec<Vec<f64>> {
        let n = self.code.n;
        let segs = self.schedule.segments();
        let mut out = vec![vec![0.0; n]; n];
        for j in 0..n {
            for k in 0..n {
                if j == k {
                    continue;
                }
                let (xj, xk) = (self.positions[j], self.positions[k]);
                let f = |tau: f64| kernel.kernel(&Point::new(j, xj, tau), &Point::new(k, xk, 0.0)).im;
                let f1 = kernel.kernel_dt(&Point::new(j, xj, 0.0), &Point::new(k, xk, 0.0)).im;
                let mut acc = 0.0;
                for (i, &(a, b, si)) in segs.iter().enumerate() {
                    acc += (b - a) * f1 - (f(b - a) - f(0.0));
                    for &(c, d, sl) in &segs[..i] {
                        acc += si * sl * (f(b - d) - f(a - d) - f(b - c) + f(a - c));
                    }
                }
                out[j][k] = acc;
            }
        }
        out
    }
}

/// One syndrome per cycle.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct SyndromeHistory {
    #[serde(serialize_with = "serialize_syndromes")]
    pub syndromes: Vec<Syndrome>,
}

fn serialize_syndromes<S: serde::Serializer>(v: &[Syndrome], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(|x| x.to_string()))
}

impl SyndromeHistory {
    pub fn new(syndromes: Vec<Syndrome>) -> Self {
        Self { syndromes }
    }

    pub fn len(&self) -> usize {
        self.syndromes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.syndromes.is_empty()
    }
}

impl fmt::Display for SyndromeHistory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, s) in self.syndromes.iter().enumerate() {
            if i > 0 {
                f.write_str("-")?;
            }
            write!(f, "{s}")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HistoryResult {
    pub history: SyndromeHistory,
    pub probability: f64,
    /// Logical density matrix in the `|0̄⟩, |1̄⟩` basis; `None` below the
    /// probability floor.
    #[serde(skip)]
    pub rho: Option<[[Complex64; 2]; 2]>,
    /// Imaginary part left over in the probability sum.
    pub imag_residual: f64,
}

impl HistoryResult {
    pub fn off_diagonal(&self) -> Option<Complex64> {
        self.rho.map(|r| r[0][1])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schedule_validation() {
        assert!(CycleSchedule::new(1.0, vec![0.5, 0.4]).is_err());
        assert!(CycleSchedule::new(1.0, vec![1.0]).is_err());
        assert!(CycleSchedule::new(0.0, vec![]).is_err());
    }

    #[test]
    fn midpoint_weights_are_second_difference() {
        let s = CycleSchedule::midpoint(1.0).unwrap();
        assert_eq!(s.point_weights(), vec![(0.0, -1.0), (0.5, 2.0), (1.0, -1.0)]);
        let u = CycleSchedule::unpulsed(2.0).unwrap();
        assert_eq!(u.point_weights(), vec![(0.0, -1.0), (2.0, 1.0)]);
    }

    #[test]
    fn uhrig_one_pulse_is_midpoint() {
        let u = CycleSchedule::uhrig(1.0, 1).unwrap();
        assert!((u.pulses[0] - 0.5).abs() < 1e-15);
        let w: f64 = CycleSchedule::uhrig(1.0, 3).unwrap().point_weights().iter().map(|p| p.1).sum();
        assert_eq!(w, 0.0);
    }

    #[test]
    fn history_display() {
        let h = SyndromeHistory::new(vec![Syndrome::new(0, 2), Syndrome::new(1, 2)]);
        assert_eq!(h.to_string(), "00-10");
    }
}
