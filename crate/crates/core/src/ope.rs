//! Coarse-grained description of a cycle by local operators, and the
//! inter-cycle correlation laws that follow from it.
//!
//! Expanding the field around the cycle centre, the increment is
//! `L = Σ_m θ^{(m)} μ_m / m!` with moments `μ_m = Σ_p w_p (τ_p − Δ/2)^m` of
//! the pulse weights. The first non-vanishing moment fixes the gradient
//! order `k`, and the error probability of one qubit becomes
//! `const + g :(∂_t^k θ)²:` with `g = (πλ²/2)(μ_k/k!)²` when the field is
//! normalised as `θ/√(2π)`.
//!
//! Two such operators at separation `t` have the connected correlation
//! `2⟨∂^kθ(t) ∂^kθ(0)⟩²`, which for a spectral exponent `s` falls off as
//! `t^{−2(s−1+2k)}`.

use std::f64::consts::PI;

use serde::Serialize;
use statrs::function::gamma::gamma;

use crate::bath::{epsilon, quadrature_increment_re, BathSpec, QuadratureOptions};
use crate::dynamics::CycleSchedule;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum SyndromeClass {
    Trivial,
    Error,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EffectiveCycleOperator {
    /// Leading-logarithm constant, `(Σw²/2)·ε/2` per qubit (`ε/2`, `3ε/2`).
    pub const_part: f64,
    /// The same constant from the exact increment variance, `λ²⟨L²⟩/4`.
    pub const_part_exact: f64,
    pub grad_order: u32,
    /// Coefficient of `:(∂_t^k θ)²:`, negative and summed over qubits for
    /// the trivial class.
    pub grad_coefficient: f64,
}

fn moments(sched: &CycleSchedule, up_to: usize) -> Vec<f64> {
    let c = 0.5 * sched.delta;
    (0..=up_to)
        .map(|m| sched.point_weights().iter().map(|(t, w)| w * (t - c).powi(m as i32)).sum())
        .collect()
}

fn factorial(k: u32) -> f64 {
    (1..=k).map(f64::from).product()
}

/// Gradient order `k` and `μ_k/k!` for a schedule.
pub fn leading_gradient(sched: &CycleSchedule) -> Result<(u32, f64)> {
    let n = sched.n_pulses();
    let mu = moments(sched, n + 2);
    let scale = |m: usize| sched.delta.powi(m as i32);
    let k = (1..mu.len())
        .find(|&m| mu[m].abs() > 1e-9 * scale(m))
        .ok_or_else(|| Error::Numerical("every moment of the switching function vanishes".into()))?;
    if k != n + 1 {
        return Err(Error::NotImplemented(format!(
            "pulse schedule {:?} leaves gradient order {k}, not {}; only schedules cancelling the first {n} \
             moments (single mid-cycle pulse, Uhrig spacing) are supported",
            sched.pulses,
            n + 1
        )));
    }
    Ok((k as u32, mu[k] / factorial(k as u32)))
}

/// Exact `⟨L²⟩` of the increment of one qubit over one cycle.
pub fn increment_variance(bath: &BathSpec, sched: &CycleSchedule) -> Result<f64> {
    let pts = sched.point_weights();
    let mut acc = 0.0;
    for (ta, wa) in &pts {
        for (tb, wb) in &pts {
            let d = if bath.s > 0.0 {
                bath.increment(0.0, ta - tb).re
            } else {
                quadrature_increment_re(bath, 0.0, ta - tb, QuadratureOptions::default())?
            };
            acc -= wa * wb * d;
        }
    }
    Ok(acc)
}

/// Local operator content of one cycle of an `n_qubits` repetition code.
pub fn effective_coefficients(
    bath: &BathSpec,
    sched: &CycleSchedule,
    class: SyndromeClass,
    n_qubits: usize,
) -> Result<EffectiveCycleOperator> {
    bath.validate()?;
    let (k, ratio) = leading_gradient(sched)?;
    let eps = epsilon(bath, sched.delta)?;
    let w2: f64 = sched.point_weights().iter().map(|p| p.1 * p.1).sum();
    let lead = 0.5 * w2 * eps / 2.0;
    let exact = bath.lambda * bath.lambda * increment_variance(bath, sched)? / 4.0;
    let g = 0.5 * PI * bath.lambda * bath.lambda * ratio * ratio;
    let q = n_qubits as f64;
    Ok(match class {
        SyndromeClass::Error => {
            EffectiveCycleOperator { const_part: lead, const_part_exact: exact, grad_order: k, grad_coefficient: g }
        }
        SyndromeClass::Trivial => EffectiveCycleOperator {
            const_part: 1.0 - q * lead,
            const_part_exact: 1.0 - q * exact,
            grad_order: k,
            grad_coefficient: -q * g,
        },
    })
}

/// `⟨:(∂^kθ)²:(t) :(∂^kθ)²:(0)⟩` for the ohmic bath without cutoff, in the
/// `θ/√(2π)` normalisation: `2((2k−1)!)²/(4π² t^{4k})`.
pub fn pair_correlator(k: u32, t: f64) -> Result<f64> {
    if k == 0 {
        return Err(Error::Domain("gradient order must be at least 1".into()));
    }
    if t == 0.0 || !t.is_finite() {
        return Err(Error::Domain(format!("pair correlator is singular at t = {t}")));
    }
    let f = factorial(2 * k - 1);
    Ok(2.0 * f * f / (4.0 * PI * PI * t.abs().powi(4 * k as i32)))
}

/// The same correlator for a general bath with its cutoff, using the
/// symmetrised two-point function `Re⟨∂^kθ(t) ∂^kθ(0)⟩`.
pub fn pair_correlator_bath(bath: &BathSpec, k: u32, t: f64) -> Result<f64> {
    bath.validate_ordered()?;
    if k == 0 || t == 0.0 {
        return Err(Error::Domain(format!("need k ≥ 1 and t ≠ 0, got k = {k}, t = {t}")));
    }
    let g = bath.spectral_moment_cos(k, t);
    Ok(2.0 * g * g / (4.0 * PI * PI))
}

fn pair_for(bath: &BathSpec, k: u32, t: f64) -> Result<f64> {
    if bath.s == 1.0 {
        pair_correlator(k, t)
    } else {
        pair_correlator_bath(bath, k, t)
    }
}

/// `t^{−2(s+1+2n)}` law of the connected correlation.
pub fn decay_exponent(s: f64, n: usize) -> Result<f64> {
    if !(s > -1.0) {
        return Err(Error::Domain(format!("spectral exponent s = {s} must exceed -1")));
    }
    Ok(2.0 * (s + 1.0 + 2.0 * n as f64))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CorrelationPrediction {
    /// `(ε/2)²`-type product of single-cycle error probabilities.
    pub uncorrelated_part: f64,
    /// Prefactor `A` of `A t^{−p}`.
    pub amplitude: f64,
    pub decay_exponent: f64,
}

/// Connected same-qubit two-error correlation predicted for separations
/// `t ≫ Δ` (ohmic: `λ⁴Δ⁴/8`, single mid pulse: `9λ⁴Δ⁸/512`).
pub fn predict_correlation(bath: &BathSpec, sched: &CycleSchedule) -> Result<CorrelationPrediction> {
    let op = effective_coefficients(bath, sched, SyndromeClass::Error, 1)?;
    let k = op.grad_order;
    let nu = bath.s - 1.0 + 2.0 * k as f64;
    let amp = if bath.s == 1.0 {
        op.grad_coefficient.powi(2) * pair_correlator(k, 1.0)?
    } else {
        let g = gamma(nu) * bath.omega_c.powf(1.0 - bath.s) * (0.5 * PI * nu).cos();
        op.grad_coefficient.powi(2) * 2.0 * g * g / (4.0 * PI * PI)
    };
    Ok(CorrelationPrediction {
        uncorrelated_part: op.const_part * op.const_part,
        amplitude: amp,
        decay_exponent: decay_exponent(bath.s, sched.n_pulses())?,
    })
}

/// Probability of one error in the cycle starting at `t1` and one in the
/// cycle starting at `t2`.
pub fn two_error_probability(bath: &BathSpec, sched: &CycleSchedule, t1: f64, t2: f64) -> Result<f64> {
    let sep = (t1 - t2).abs();
    if sep < 2.0 * sched.delta {
        return Err(Error::Domain(format!(
            "cycles at {t1} and {t2} are closer than 2Δ = {}; the expansion needs separated cycles",
            2.0 * sched.delta
        )));
    }
    if bath.lambda == 0.0 {
        return Ok(0.0);
    }
    let op = effective_coefficients(bath, sched, SyndromeClass::Error, 1)?;
    Ok(op.const_part * op.const_part + op.grad_coefficient.powi(2) * pair_for(bath, op.grad_order, sep)?)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TwoErrorTotal {
    /// `(ε/2)² N²/2`.
    pub uncorrelated: f64,
    /// `λ⁴N/8` for the unpulsed ohmic bath.
    pub correlated: f64,
    pub total: f64,
}

/// Probability of two errors anywhere among `cycles` cycles, split into the
/// independent and the correlated contribution.
pub fn p2_total(bath: &BathSpec, sched: &CycleSchedule, cycles: usize) -> Result<TwoErrorTotal> {
    let op = effective_coefficients(bath, sched, SyndromeClass::Error, 1)?;
    let n = cycles as f64;
    let uncorrelated = op.const_part * op.const_part * n * n / 2.0;
    let correlated = n * op.grad_coefficient.powi(2) * pair_for(bath, op.grad_order, sched.delta)?;
    Ok(TwoErrorTotal { uncorrelated, correlated, total: uncorrelated + correlated })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PowerLawFit {
    /// `p` in `value ≈ A t^{−p}`.
    pub exponent: f64,
    pub uncertainty: f64,
    pub amplitude: f64,
    pub r_squared: f64,
}

/// Least-squares line through `(ln t, ln value)`.
pub fn fit_decay_exponent(series: &[(f64, f64)]) -> Result<PowerLawFit> {
    if series.len() < 4 {
        return Err(Error::Domain(format!("need at least 4 points, got {}", series.len())));
    }
    if let Some(p) = series.iter().find(|p| !(p.0 > 0.0) || !(p.1 > 0.0)) {
        return Err(Error::Domain(format!("point ({}, {}) is not positive", p.0, p.1)));
    }
    let pts: Vec<(f64, f64)> = series.iter().map(|&(t, v)| (t.ln(), v.ln())).collect();
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Domain("all separations are equal".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = pts.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    let se = (rss / (m - 2.0) / sxx).sqrt();
    let r_squared = if syy == 0.0 { 1.0 } else { 1.0 - rss / syy };
    Ok(PowerLawFit { exponent: -slope, uncertainty: se, amplitude: intercept.exp(), r_squared })
}

/// Prefactor `A` of `value = A t^{−p}` at a fixed exponent, as the geometric
/// mean of `value·t^p`.
pub fn amplitude_at_exponent(series: &[(f64, f64)], exponent: f64) -> Result<f64> {
    if series.is_empty() || series.iter().any(|p| !(p.0 > 0.0) || !(p.1 > 0.0)) {
        return Err(Error::Domain("series must be non-empty and positive".into()));
    }
    let m = series.len() as f64;
    Ok((series.iter().map(|&(t, v)| v.ln() + exponent * t.ln()).sum::<f64>() / m).exp())
}
