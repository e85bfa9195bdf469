//! Adaptive Gauss–Kronrod (7/15) integration on finite intervals.

use crate::error::{Error, Result};
use crate::summation::Neumaier;

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

/// Outcome of an integration: value, error estimate and evaluation count.
#[derive(Clone, Copy, Debug)]
pub struct Integral {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
}

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for (i, &x) in XGK[..7].iter().enumerate() {
        let dx = h * x;
        let pair = f(c - dx) + f(c + dx);
        kronrod += WGK[i] * pair;
        if i % 2 == 1 {
            gauss += WG[i / 2] * pair;
        }
    }
    (kronrod * h, ((kronrod - gauss) * h).abs())
}

/// Integrates `f` over `[a, b]` by recursive bisection until the local
/// Kronrod–Gauss difference meets `max(abs_tol, rel_tol·|I|)`.
pub fn integrate<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, abs_tol: f64, rel_tol: f64) -> Result<Integral> {
    const MAX_INTERVALS: usize = 20_000;
    let (v, e) = gk15(f, a, b);
    let mut evals = 15;
    // max-heap on error estimate
    let mut pieces: Vec<(f64, f64, f64, f64)> = vec![(a, b, v, e)];
    loop {
        let total: f64 = pieces.iter().map(|p| p.2).sum();
        let err: f64 = pieces.iter().map(|p| p.3).sum();
        if err <= abs_tol.max(rel_tol * total.abs()) {
            let mut acc = Neumaier::new();
            pieces.iter().for_each(|p| acc.add(p.2));
            return Ok(Integral { value: acc.value(), error: err, evaluations: evals });
        }
        if pieces.len() >= MAX_INTERVALS {
            return Err(Error::Numerical(format!(
                "quadrature on [{a}, {b}] did not converge: estimate {total:e}, error {err:e} after {evals} evaluations"
            )));
        }
        let (idx, _) = pieces
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .expect("non-empty");
        let (lo, hi, _, _) = pieces.swap_remove(idx);
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            return Err(Error::Numerical(format!("interval around {lo} cannot be bisected further")));
        }
        let (v1, e1) = gk15(f, lo, mid);
        let (v2, e2) = gk15(f, mid, hi);
        evals += 30;
        pieces.push((lo, mid, v1, e1));
        pieces.push((mid, hi, v2, e2));
    }
}

/// Integrates over `[a, b]` split into panels no wider than `panel`, each
/// handled adaptively. Suited to integrands oscillating with period about
/// `2·panel` or longer. The relative tolerance is measured against `∫|f|`,
/// so panels where `f` is negligible do not force endless refinement.
pub fn integrate_panels<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    panel: f64,
    abs_tol: f64,
    rel_tol: f64,
) -> Result<Integral> {
    let count = (((b - a) / panel).ceil() as usize).max(1);
    let width = (b - a) / count as f64;
    let mut l1 = Neumaier::new();
    for i in 0..count {
        let lo = a + i as f64 * width;
        l1.add(gk15(&|x: f64| f(x).abs(), lo, lo + width).0);
    }
    let per_panel = abs_tol.max(rel_tol * l1.value()) / count as f64;
    let mut acc = Neumaier::new();
    let mut error = 0.0;
    let mut evaluations = 0;
    for i in 0..count {
        let lo = a + i as f64 * width;
        let hi = if i + 1 == count { b } else { lo + width };
        let r = integrate(f, lo, hi, per_panel, rel_tol)?;
        acc.add(r.value);
        error += r.error;
        evaluations += r.evaluations;
    }
    Ok(Integral { value: acc.value(), error, evaluations })
}

/// Gauss–Legendre nodes and weights on `[-1, 1]` by Newton iteration.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let p = if n == 0 { 1.0 } else if n == 1 { x } else { p1 };
            let pm1 = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (x * p - pm1) / (x * x - 1.0);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrates_polynomials_and_exponentials() {
        let r = integrate(&|x: f64| x * x, 0.0, 3.0, 1e-14, 1e-14).unwrap();
        assert!((r.value - 9.0).abs() < 1e-12);
        let r = integrate(&|x: f64| (-x).exp(), 0.0, 40.0, 1e-14, 1e-13).unwrap();
        assert!((r.value - (1.0 - (-40f64).exp())).abs() < 1e-12);
    }

    #[test]
    fn handles_endpoint_singularity() {
        let r = integrate(&|x: f64| 1.0 / x.sqrt(), 0.0, 1.0, 1e-10, 1e-10).unwrap();
        assert!((r.value - 2.0).abs() < 1e-8, "{}", r.value);
    }

    #[test]
    fn oscillatory_panels() {
        let w = 500.0;
        let r = integrate_panels(&|x: f64| (w * x).cos(), 0.0, 1.0, std::f64::consts::PI / w, 1e-13, 1e-12)
            .unwrap();
        assert!((r.value - (w.sin() / w)).abs() < 1e-12);
    }

    #[test]
    fn legendre_rules_are_exact_to_degree() {
        for n in [1, 2, 4, 8] {
            let (x, w) = gauss_legendre(n);
            let s: f64 = w.iter().sum();
            assert!((s - 2.0).abs() < 1e-13);
            let deg = 2 * n - 1;
            let m: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(deg as i32 - 1)).sum();
            let exact = if (deg - 1) % 2 == 0 { 2.0 / deg as f64 } else { 0.0 };
            assert!((m - exact).abs() < 1e-13, "n={n}");
        }
    }
}
