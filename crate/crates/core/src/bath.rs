//! The bosonic environment at zero temperature.
//!
//! The bath is described by its spectral weight
//! `f_s(ω) = ω^(s−2) ω_c^(1−s) e^(−ω/ω_c)` and the Wightman function
//! `C(x, t) = ∫ f_s(ω) cos(ωx/v_b) e^(−iωt) dω`. The raw function is infrared
//! divergent for `s ≤ 1`, so everything downstream works with the increment
//!
//! ```text
//! K(a, b) = ½[C(a, a) + C(b, b)] − C(a, b)
//! ```
//!
//! which for a translation-invariant bath is `D(dx, dt) = C(0, 0) − C(dx, dt)`.
//! For `s = 1`, `Re D(0, t) = ½ ln(1 + ω_c² t²)`; with vertex charge `λ` this
//! makes a single-qubit coherence decay as `e^{−ε}` with
//! `ε = (λ²/2) ln(1 + (ω_c Δ)²)`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::error::{Error, Result};
use crate::quadrature::{gauss_legendre, integrate_panels};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BathSpec {
    /// Spectral exponent; `s = 1` is ohmic.
    pub s: f64,
    /// Dimensionless qubit–bath coupling.
    pub lambda: f64,
    /// Cutoff frequency `Λ v_b`.
    pub omega_c: f64,
    /// Mode velocity.
    pub v_b: f64,
}

impl Default for BathSpec {
    fn default() -> Self {
        Self { s: 1.0, lambda: 0.05, omega_c: 100.0, v_b: 1.0 }
    }
}

/// A field argument `θ(x, t)` tagged with the qubit it couples to.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Point {
    pub site: usize,
    pub x: f64,
    pub t: f64,
}

impl Point {
    pub fn new(site: usize, x: f64, t: f64) -> Self {
        Self { site, x, t }
    }
}

/// Increment kernel of a Gaussian bath.
pub trait Kernel: Sync {
    /// `K(a, b)`; `Im K(a, b) = −Im⟨θ(a)θ(b)⟩` carries the commutator.
    fn kernel(&self, a: &Point, b: &Point) -> Complex64;

    /// `∂K(a, b)/∂t_a`.
    fn kernel_dt(&self, a: &Point, b: &Point) -> Complex64;
}

impl BathSpec {
    pub fn ohmic(lambda: f64, omega_c: f64) -> Self {
        Self { s: 1.0, lambda, omega_c, v_b: 1.0 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.s > -1.0) {
            return Err(Error::Divergence(format!("spectral exponent s = {} must exceed -1", self.s)));
        }
        if !(self.lambda >= 0.0) || !self.lambda.is_finite() {
            return Err(Error::Domain(format!("coupling λ = {} must be finite and non-negative", self.lambda)));
        }
        if !(self.omega_c > 0.0) || !self.omega_c.is_finite() {
            return Err(Error::Domain(format!("cutoff ω_c = {} must be positive", self.omega_c)));
        }
        if !(self.v_b > 0.0) || !self.v_b.is_finite() {
            return Err(Error::Domain(format!("velocity v_b = {} must be positive", self.v_b)));
        }
        Ok(())
    }

    /// Checks the bath can be used for operator-ordered products, which need
    /// the commutator part of the kernel and therefore `s > 0`.
    pub fn validate_ordered(&self) -> Result<()> {
        self.validate()?;
        if self.s <= 0.0 {
            return Err(Error::Divergence(format!(
                "the commutator part of the kernel diverges for s = {} <= 0",
                self.s
            )));
        }
        Ok(())
    }

    /// UV time scale `1/ω_c`.
    pub fn t_uv(&self) -> f64 {
        1.0 / self.omega_c
    }

    /// Closed-form `D(dx, dt)` for `s > 0`.
    pub fn increment(&self, dx: f64, dt: f64) -> Complex64 {
        let y = dx / self.v_b;
        let g = gamma(self.s);
        let half = 0.5 * (log_weighted(self.s, self.omega_c * (dt - y)) + log_weighted(self.s, self.omega_c * (dt + y)));
        half * g
    }

    /// `∂D(dx, dt)/∂dt`.
    pub fn increment_dt(&self, dx: f64, dt: f64) -> Complex64 {
        let y = dx / self.v_b;
        let am = Complex64::new(1.0, self.omega_c * (dt - y));
        let ap = Complex64::new(1.0, self.omega_c * (dt + y));
        let s = Complex64::new(-self.s, 0.0);
        Complex64::new(0.0, 0.5 * self.omega_c * gamma(self.s)) * (am.powc(s) + ap.powc(s))
    }

    /// `(−1)^k ∂_t^{2k} Re D(0, t)`-style spectral moment
    /// `∫ f_s(ω) ω^{2k} cos(ωt) dω` in closed form.
    pub fn spectral_moment_cos(&self, k: u32, t: f64) -> f64 {
        let nu = self.s - 1.0 + 2.0 * k as f64;
        let a = Complex64::new(1.0 / self.omega_c, t);
        (gamma(nu) * self.omega_c.powf(1.0 - self.s) * a.powc(Complex64::new(-nu, 0.0))).re
    }
}

/// `Γ(s−1)(1 − a^{1−s})/Γ(s)` with `a = 1 + i y`, written through `ln a` so
/// the ohmic limit is continuous.
fn log_weighted(s: f64, y: f64) -> Complex64 {
    let ln_a = Complex64::new(0.5 * (y * y).ln_1p(), y.atan());
    ln_a * expm1_over(ln_a * (1.0 - s))
}

/// `(e^w − 1)/w`, finite at `w = 0`.
fn expm1_over(w: Complex64) -> Complex64 {
    if w.norm() < 1e-5 {
        return Complex64::new(1.0, 0.0) + w * 0.5 + w * w / 6.0;
    }
    complex_expm1(w) / w
}

/// `e^w − 1` without cancellation for small `|w|`.
pub(crate) fn complex_expm1(w: Complex64) -> Complex64 {
    let half = (0.5 * w.im).sin();
    Complex64::new(w.re.exp_m1() * w.im.cos() - 2.0 * half * half, w.re.exp() * w.im.sin())
}

/// `ln(1 + w)` without cancellation for small `|w|`.
pub(crate) fn complex_ln1p(w: Complex64) -> Complex64 {
    Complex64::new(0.5 * (2.0 * w.re + w.norm_sqr()).ln_1p(), w.im.atan2(1.0 + w.re))
}

impl Kernel for BathSpec {
    fn kernel(&self, a: &Point, b: &Point) -> Complex64 {
        self.increment(a.x - b.x, a.t - b.t)
    }

    fn kernel_dt(&self, a: &Point, b: &Point) -> Complex64 {
        self.increment_dt(a.x - b.x, a.t - b.t)
    }
}

#[derive(Clone, Copy, Debug)]
pub struct QuadratureOptions {
    /// Lower integration limit `ω_min` (0 means none).
    pub ir_cutoff: f64,
    pub rel_tol: f64,
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        Self { ir_cutoff: 0.0, rel_tol: 1e-11 }
    }
}

/// `D(dx, dt)` by direct quadrature of the spectral integral. The imaginary
/// part is only finite for `s > 0` or with an infrared cutoff.
pub fn quadrature_increment(bath: &BathSpec, dx: f64, dt: f64, opts: QuadratureOptions) -> Result<Complex64> {
    let re = quadrature_part(bath, dx, dt, opts, false)?;
    let im = if dt == 0.0 {
        0.0
    } else if bath.s > 0.0 || opts.ir_cutoff > 0.0 {
        quadrature_part(bath, dx, dt, opts, true)?
    } else {
        return Err(Error::Divergence(format!("Im D diverges for s = {} without an infrared cutoff", bath.s)));
    };
    Ok(Complex64::new(re, im))
}

/// `Re D(dx, dt)` by quadrature; finite for every `s > −1`.
pub fn quadrature_increment_re(bath: &BathSpec, dx: f64, dt: f64, opts: QuadratureOptions) -> Result<f64> {
    quadrature_part(bath, dx, dt, opts, false)
}

fn quadrature_part(bath: &BathSpec, dx: f64, dt: f64, opts: QuadratureOptions, imag: bool) -> Result<f64> {
    bath.validate()?;
    let s = bath.s;
    let x = bath.omega_c * dx / bath.v_b;
    let t = bath.omega_c * dt;
    let u_min = opts.ir_cutoff / bath.omega_c;
    let u_max = 60.0 + 2.0 * s.max(0.0);
    let panel = (PI / (x.abs() + t.abs()).max(1.0)).min(1.0);
    let weight = move |u: f64| u.powf(s - 2.0) * (-u).exp();
    let r = if imag {
        integrate_panels(&|u: f64| weight(u) * (u * x).cos() * (u * t).sin(), u_min, u_max, panel, 0.0, opts.rel_tol)?
    } else {
        let f = |u: f64| {
            let a = (0.5 * u * (x - t)).sin();
            let b = (0.5 * u * (x + t)).sin();
            weight(u) * (a * a + b * b)
        };
        integrate_panels(&f, u_min, u_max, panel, 0.0, opts.rel_tol)?
    };
    Ok(r.value)
}

/// `C(dx, dt) − C(0, 0)` of the bath, evaluated by quadrature. This is the
/// Wightman function fixed by its value at coincident points; only neutral
/// combinations of it are physical.
pub fn correlation_kernel(bath: &BathSpec, dx: f64, dt: f64) -> Result<Complex64> {
    Ok(-quadrature_increment(bath, dx, dt, QuadratureOptions::default())?)
}

/// Single-cycle error exponent `ε = λ² Re D(0, Δ)`.
pub fn epsilon(bath: &BathSpec, delta: f64) -> Result<f64> {
    bath.validate()?;
    if !(delta > 0.0) {
        return Err(Error::Domain(format!("cycle duration must be positive, got {delta}")));
    }
    if bath.lambda == 0.0 {
        return Ok(0.0);
    }
    let d = if bath.s > 0.0 {
        bath.increment(0.0, delta).re
    } else {
        quadrature_increment_re(bath, 0.0, delta, QuadratureOptions::default())?
    };
    Ok(bath.lambda * bath.lambda * d)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Mode {
    pub omega: f64,
    pub weight: f64,
}

/// A bath reduced to finitely many modes; its kernel is
/// `Σ_m w_m (1 − cos(ω_m dx/v_b) e^{−iω_m dt})`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiscreteBath {
    pub modes: Vec<Mode>,
    pub v_b: f64,
}

/// Composite Gauss–Legendre discretization of `f_s` on `(0, ω_max]`.
/// `M` nodes are grouped into panels of 8, 4, 2 or 1 nodes, whichever
/// divides `M`.
pub fn mode_discretize(bath: &BathSpec, m: usize, omega_max: f64) -> Result<DiscreteBath> {
    bath.validate()?;
    if m == 0 {
        return Err(Error::Domain("at least one mode is required".into()));
    }
    if !(omega_max > 0.0) {
        return Err(Error::Domain(format!("omega_max must be positive, got {omega_max}")));
    }
    let per = [8, 4, 2, 1].into_iter().find(|q| m % q == 0).unwrap_or(1);
    let panels = m / per;
    let width = omega_max / panels as f64;
    let (nodes, weights) = if per == 1 { (vec![0.0], vec![2.0]) } else { gauss_legendre(per) };
    let f = |w: f64| w.powf(bath.s - 2.0) * bath.omega_c.powf(1.0 - bath.s) * (-w / bath.omega_c).exp();
    let mut modes = Vec::with_capacity(m);
    for p in 0..panels {
        let c = (p as f64 + 0.5) * width;
        for (x, w) in nodes.iter().zip(&weights) {
            let omega = c + 0.5 * width * x;
            modes.push(Mode { omega, weight: 0.5 * width * w * f(omega) });
        }
    }
    Ok(DiscreteBath { modes, v_b: bath.v_b })
}

impl DiscreteBath {
    pub fn single(omega: f64, weight: f64) -> Self {
        Self { modes: vec![Mode { omega, weight }], v_b: 1.0 }
    }

    pub fn increment(&self, dx: f64, dt: f64) -> Complex64 {
        let y = dx / self.v_b;
        let (mut re, mut im) = (0.0, 0.0);
        for m in &self.modes {
            let a = (0.5 * m.omega * (y - dt)).sin();
            let b = (0.5 * m.omega * (y + dt)).sin();
            re += m.weight * (a * a + b * b);
            im += m.weight * (m.omega * y).cos() * (m.omega * dt).sin();
        }
        Complex64::new(re, im)
    }
}

impl Kernel for DiscreteBath {
    fn kernel(&self, a: &Point, b: &Point) -> Complex64 {
        self.increment(a.x - b.x, a.t - b.t)
    }

    fn kernel_dt(&self, a: &Point, b: &Point) -> Complex64 {
        let y = (a.x - b.x) / self.v_b;
        let dt = a.t - b.t;
        self.modes
            .iter()
            .map(|m| Complex64::new(0.0, m.omega) * (m.weight * (m.omega * y).cos()) * Complex64::from_polar(1.0, -m.omega * dt))
            .sum()
    }
}

/// CSV dump of `C − C(0,0)` on a grid: columns `dx,dt,ReC,ImC`.
pub fn kernel_table_csv(bath: &BathSpec, dxs: &[f64], dts: &[f64]) -> Result<String> {
    bath.validate_ordered()?;
    let mut out = String::from("dx,dt,ReC,ImC\n");
    for &dx in dxs {
        for &dt in dts {
            let c = -bath.increment(dx, dt);
            out.push_str(&format!("{dx:.9e},{dt:.9e},{:.12e},{:.12e}\n", c.re, c.im));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn coincident_increment_vanishes() {
        let b = BathSpec::default();
        assert_eq!(b.increment(0.0, 0.0), Complex64::new(0.0, 0.0));
        let q = quadrature_increment(&b, 0.0, 0.0, QuadratureOptions::default()).unwrap();
        assert_eq!(q.norm(), 0.0);
    }

    #[test]
    fn ohmic_closed_form() {
        let b = BathSpec::ohmic(0.1, 1.0);
        for t in [0.01, 1.0, 100.0, 1e4] {
            let d = b.increment(0.0, t);
            assert!(rel(d.re, 0.5 * (t * t).ln_1p()) < 1e-14);
            assert!(rel(d.im, t.atan()) < 1e-14);
        }
    }

    #[test]
    fn quadrature_agrees_with_closed_form_ohmic() {
        let b = BathSpec::ohmic(0.1, 1.0);
        for t in [0.01, 0.3, 1.0, 10.0, 100.0, 1e3, 1e4] {
            let q = quadrature_increment(&b, 0.0, t, QuadratureOptions::default()).unwrap();
            assert!(rel(q.re, 0.5 * (t * t).ln_1p()) < 1e-6, "t={t} {}", q.re);
            assert!(rel(q.im, t.atan()) < 1e-6, "t={t} {}", q.im);
        }
        let d = quadrature_increment(&b, 0.0, 100.0, QuadratureOptions::default()).unwrap();
        assert!((d.re - 4.605_220_1).abs() < 1e-6);
    }

    #[test]
    fn quadrature_agrees_with_closed_form_general_s() {
        for s in [0.3, 0.5, 1.5, 2.0, 3.0] {
            let b = BathSpec { s, lambda: 0.1, omega_c: 2.0, v_b: 1.5 };
            for (dx, dt) in [(0.0, 0.7), (3.0, 1.0), (-2.0, 5.0), (4.0, 0.0)] {
                let q = quadrature_increment(&b, dx, dt, QuadratureOptions::default()).unwrap();
                let a = b.increment(dx, dt);
                assert!((q - a).norm() < 1e-7 * a.norm().max(1e-3), "s={s} dx={dx} dt={dt}: {q} vs {a}");
            }
        }
    }

    #[test]
    fn increment_derivative_matches_finite_difference() {
        for s in [0.5, 1.0, 2.0] {
            let b = BathSpec { s, lambda: 0.1, omega_c: 3.0, v_b: 1.0 };
            for (dx, dt) in [(0.0, 0.4), (2.0, 1.3), (1.0, -0.7)] {
                let h = 1e-5;
                let fd = (b.increment(dx, dt + h) - b.increment(dx, dt - h)) / (2.0 * h);
                let an = b.increment_dt(dx, dt);
                assert!((fd - an).norm() < 1e-6 * an.norm().max(1.0), "s={s}: {fd} vs {an}");
            }
        }
    }

    #[test]
    fn near_ohmic_is_continuous() {
        let one = BathSpec::ohmic(0.1, 10.0).increment(0.5, 2.0);
        let near = BathSpec { s: 1.0 + 1e-9, ..BathSpec::ohmic(0.1, 10.0) }.increment(0.5, 2.0);
        assert!((one - near).norm() < 1e-7);
    }

    #[test]
    fn epsilon_values() {
        assert_eq!(epsilon(&BathSpec::ohmic(0.0, 100.0), 1.0).unwrap(), 0.0);
        let e = epsilon(&BathSpec::ohmic(0.1, 100.0), 1.0).unwrap();
        assert!((e - 0.005 * 10001f64.ln()).abs() < 1e-15);
        assert!((e - 0.046_052_2).abs() < 1e-7);
        assert!(matches!(epsilon(&BathSpec::default(), 0.0), Err(Error::Domain(_))));
        assert!(matches!(
            epsilon(&BathSpec { s: -1.0, ..BathSpec::default() }, 1.0),
            Err(Error::Divergence(_))
        ));
    }

    #[test]
    fn epsilon_log_asymptote() {
        let b = BathSpec::ohmic(0.2, 1e3);
        let e = epsilon(&b, 1.0).unwrap();
        let asym = b.lambda * b.lambda * 1e3f64.ln();
        assert!(rel(asym, e) < 0.01);
    }

    #[test]
    fn epsilon_for_negative_s_uses_quadrature() {
        let b = BathSpec { s: -0.5, lambda: 0.1, omega_c: 1.0, v_b: 1.0 };
        let e = epsilon(&b, 2.0).unwrap();
        assert!(e > 0.0 && e.is_finite());
        assert!(b.validate_ordered().is_err());
    }

    #[test]
    fn discretized_bath_converges() {
        let b = BathSpec::ohmic(0.1, 1.0);
        let disc = mode_discretize(&b, 2000, 20.0).unwrap();
        assert!(disc.modes.iter().all(|m| m.weight >= 0.0));
        let exact = b.increment(0.0, 10.0).re;
        assert!(rel(disc.increment(0.0, 10.0).re, exact) < 1e-4);
    }

    #[test]
    fn single_mode_is_one_term() {
        let b = BathSpec::ohmic(0.1, 1.0);
        let disc = mode_discretize(&b, 1, 4.0).unwrap();
        let m = disc.modes[0];
        assert_eq!(m.omega, 2.0);
        let t = 0.8;
        assert!((disc.increment(0.0, t).re - m.weight * (1.0 - (m.omega * t).cos())).abs() < 1e-15);
    }

    #[test]
    fn infrared_cutoff_independence() {
        let b = BathSpec::ohmic(0.1, 1.0);
        // second difference θ(2) − 2θ(1) + θ(0): neutral
        let neutral = |w: f64| {
            let o = QuadratureOptions { ir_cutoff: w, rel_tol: 1e-12 };
            let d1 = quadrature_increment(&b, 0.0, 1.0, o).unwrap().re;
            let d2 = quadrature_increment(&b, 0.0, 2.0, o).unwrap().re;
            4.0 * d1 - d2
        };
        let a = neutral(1e-6);
        let c = neutral(5e-7);
        assert!((a - c).abs() < 1e-8, "{a} {c}");
    }

    #[test]
    fn kernel_table_has_header_and_rows() {
        let csv = kernel_table_csv(&BathSpec::default(), &[0.0, 1.0], &[0.0, 0.5]).unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "dx,dt,ReC,ImC");
        assert_eq!(lines.len(), 5);
    }
}
