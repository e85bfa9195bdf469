//! Vacuum expectations of operator-ordered products of vertex operators
//! `e^{i c θ(x, t)}` in a Gaussian bath.
//!
//! For a neutral product (`Σ c = 0`) written left to right,
//!
//! ```text
//! ⟨Π_p e^{i c_p θ_p}⟩ = exp Σ_{p<q} c_p c_q [Re K(p, q) + i Im K(p, q)]
//! ```
//!
//! where `p` is the left member of each pair. Insertions sharing an ordinal
//! belong to one exponential and contribute no commutator term.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bath::{Kernel, Point};
use crate::error::{Error, Result};
use crate::summation::ComplexNeumaier;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VertexInsertion {
    pub point: Point,
    /// Coefficient `c` of `e^{i c θ}`, coupling included.
    pub charge: f64,
    /// Position in the operator product, left to right.
    pub ordinal: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct VertexProduct {
    pub insertions: Vec<VertexInsertion>,
    pub prefactor: Complex64,
}

impl VertexProduct {
    pub fn new(insertions: Vec<VertexInsertion>) -> Self {
        Self { insertions, prefactor: Complex64::new(1.0, 0.0) }
    }

    pub fn validate(&self) -> Result<()> {
        for w in self.insertions.windows(2) {
            if w[1].ordinal < w[0].ordinal {
                return Err(Error::Structure(format!(
                    "insertion ordinals must not decrease: {} follows {}",
                    w[1].ordinal, w[0].ordinal
                )));
            }
        }
        for ins in &self.insertions {
            if !ins.charge.is_finite() || !ins.point.x.is_finite() || !ins.point.t.is_finite() {
                return Err(Error::Domain("non-finite insertion".into()));
            }
        }
        Ok(())
    }

    /// The Hermitian conjugate: reversed order, negated charges.
    pub fn adjoint(&self) -> Self {
        let last = self.insertions.iter().map(|i| i.ordinal).max().unwrap_or(0);
        let insertions = self
            .insertions
            .iter()
            .rev()
            .map(|i| VertexInsertion { point: i.point, charge: -i.charge, ordinal: last - i.ordinal })
            .collect();
        Self { insertions, prefactor: self.prefactor.conj() }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct EngineOptions {
    /// Insertions farther apart than this (in `x`) are treated as
    /// uncorrelated; each resulting cluster must then be neutral by itself.
    pub factorization_radius: Option<f64>,
    /// Relative tolerance on net charge.
    pub neutrality_tol: f64,
    /// Largest number of trig factors summed exactly per cluster.
    pub max_trig_factors: usize,
}

impl Default for EngineOptions {
    fn default() -> Self {
        Self { factorization_radius: None, neutrality_tol: 1e-12, max_trig_factors: 24 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Evaluation {
    pub value: Complex64,
    pub diagnostics: Vec<String>,
}

/// Cluster label per position, splitting the sorted `x` values wherever the
/// gap exceeds `radius`.
fn spatial_clusters(xs: &[f64], radius: Option<f64>) -> Vec<usize> {
    let Some(r) = radius else {
        return vec![0; xs.len()];
    };
    let mut idx: Vec<usize> = (0..xs.len()).collect();
    idx.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
    let mut label = vec![0; xs.len()];
    let mut current = 0;
    for w in 0..idx.len() {
        if w > 0 && xs[idx[w]] - xs[idx[w - 1]] > r {
            current += 1;
        }
        label[idx[w]] = current;
    }
    label
}

fn is_neutral(charges: impl Iterator<Item = f64>, tol: f64) -> bool {
    let (mut net, mut scale) = (0.0, 0.0);
    for c in charges {
        net += c;
        scale += c.abs();
    }
    net.abs() <= tol * scale.max(1e-300)
}

/// `ln⟨Π e^{i c θ}⟩` or `None` when a cluster is not neutral.
pub fn log_expectation(kernel: &dyn Kernel, insertions: &[VertexInsertion], opts: &EngineOptions) -> Option<Complex64> {
    let xs: Vec<f64> = insertions.iter().map(|i| i.point.x).collect();
    let label = spatial_clusters(&xs, opts.factorization_radius);
    let clusters = label.iter().copied().max().map_or(0, |m| m + 1);
    for c in 0..clusters {
        let charges = insertions.iter().zip(&label).filter(|(_, &l)| l == c).map(|(i, _)| i.charge);
        if !is_neutral(charges, opts.neutrality_tol) {
            return None;
        }
    }
    let mut acc = ComplexNeumaier::new();
    for (p, a) in insertions.iter().enumerate() {
        for (q, b) in insertions.iter().enumerate().skip(p + 1) {
            if label[p] != label[q] {
                continue;
            }
            let k = kernel.kernel(&a.point, &b.point);
            let cc = a.charge * b.charge;
            if a.ordinal == b.ordinal {
                acc.add(Complex64::new(cc * k.re, 0.0));
            } else {
                acc.add(k * cc);
            }
        }
    }
    Some(acc.value())
}

fn exp_saturating(e: Complex64, diagnostics: &mut Vec<String>) -> Complex64 {
    if !e.re.is_finite() || !e.im.is_finite() || e.re > 700.0 {
        diagnostics.push(format!("exponent {e} out of range; result saturated to 0"));
        return Complex64::new(0.0, 0.0);
    }
    e.exp()
}

/// `prefactor · ⟨Π e^{i c θ}⟩`.
pub fn ordered_expectation(kernel: &dyn Kernel, product: &VertexProduct, opts: &EngineOptions) -> Result<Evaluation> {
    product.validate()?;
    let mut diagnostics = Vec::new();
    let value = match log_expectation(kernel, &product.insertions, opts) {
        None => {
            diagnostics.push("charge neutrality violated; expectation is 0".to_string());
            Complex64::new(0.0, 0.0)
        }
        Some(e) => product.prefactor * exp_saturating(e, &mut diagnostics),
    };
    Ok(Evaluation { value, diagnostics })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Trig {
    Cos,
    Sin,
}

/// `cos` or `sin` of `Σ_i c_i θ(point_i)`, occupying one slot of the
/// operator order.
#[derive(Clone, Debug, PartialEq)]
pub struct TrigFactor {
    pub kind: Trig,
    pub field: Vec<(Point, f64)>,
    pub ordinal: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrigProduct {
    pub factors: Vec<TrigFactor>,
    pub prefactor: Complex64,
}

/// Pairwise data for a set of trig factors: `block[k][l]` is the exponent
/// coefficient of `σ_k σ_l`.
struct Blocks {
    pair: Vec<Vec<Complex64>>,
    charge: Vec<f64>,
}

fn blocks(kernel: &dyn Kernel, factors: &[&TrigFactor]) -> Blocks {
    let k = factors.len();
    let mut pair = vec![vec![Complex64::new(0.0, 0.0); k]; k];
    for a in 0..k {
        for b in a..k {
            let (fa, fb) = (factors[a], factors[b]);
            let mut acc = ComplexNeumaier::new();
            for (i, (pa, ca)) in fa.field.iter().enumerate() {
                let start = if a == b { i + 1 } else { 0 };
                for (pb, cb) in &fb.field[start..] {
                    let cc = ca * cb;
                    if fa.ordinal == fb.ordinal {
                        acc.add(Complex64::new(cc * kernel.kernel(pa, pb).re, 0.0));
                    } else if fa.ordinal < fb.ordinal {
                        acc.add(kernel.kernel(pa, pb) * cc);
                    } else {
                        acc.add(kernel.kernel(pb, pa) * cc);
                    }
                }
            }
            pair[a][b] = acc.value();
        }
    }
    let charge = factors.iter().map(|f| f.field.iter().map(|(_, c)| c).sum()).collect();
    Blocks { pair, charge }
}

fn pattern_term(b: &Blocks, kinds: &[Trig], sigma: u64, opts: &EngineOptions, diag: &mut Vec<String>) -> Complex64 {
    let k = kinds.len();
    let s = |i: usize| if sigma >> i & 1 == 1 { -1.0 } else { 1.0 };
    let charges = (0..k).map(|i| s(i) * b.charge[i]);
    if !is_neutral(charges, opts.neutrality_tol) {
        return Complex64::new(0.0, 0.0);
    }
    let mut e = Complex64::new(0.0, 0.0);
    let mut weight = Complex64::new(1.0, 0.0);
    for i in 0..k {
        e += b.pair[i][i];
        for j in i + 1..k {
            e += b.pair[i][j] * (s(i) * s(j));
        }
        weight *= match kinds[i] {
            Trig::Cos => Complex64::new(0.5, 0.0),
            Trig::Sin => Complex64::new(0.0, -0.5 * s(i)),
        };
    }
    weight * exp_saturating(e, diag)
}

fn factor_clusters(factors: &[TrigFactor], radius: Option<f64>) -> Vec<Vec<usize>> {
    let mut xs = Vec::new();
    let mut owner = Vec::new();
    for (k, f) in factors.iter().enumerate() {
        for (p, _) in &f.field {
            xs.push(p.x);
            owner.push(k);
        }
    }
    let label = spatial_clusters(&xs, radius);
    // merge clusters that share a factor
    let mut parent: Vec<usize> = (0..factors.len()).collect();
    fn find(p: &mut Vec<usize>, i: usize) -> usize {
        let mut r = i;
        while p[r] != r {
            r = p[r];
        }
        p[i] = r;
        r
    }
    let mut first_of_label = std::collections::BTreeMap::new();
    for (i, &l) in label.iter().enumerate() {
        let k = owner[i];
        let rep = *first_of_label.entry(l).or_insert(k);
        let (a, b) = (find(&mut parent, rep), find(&mut parent, k));
        if a != b {
            parent[a.max(b)] = a.min(b);
        }
    }
    let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for k in 0..factors.len() {
        let r = find(&mut parent, k);
        groups.entry(r).or_default().push(k);
    }
    groups.into_values().collect()
}

/// Exact expectation of a product of `cos`/`sin` factors, expanded over the
/// `2^K` sign patterns of the exponentials. Spatially separated clusters
/// are summed independently and multiplied.
pub fn signed_sum(kernel: &dyn Kernel, product: &TrigProduct, opts: &EngineOptions) -> Result<Evaluation> {
    let mut diagnostics = Vec::new();
    let mut value = product.prefactor;
    for group in factor_clusters(&product.factors, opts.factorization_radius) {
        if group.len() > opts.max_trig_factors {
            return Err(Error::Size(format!(
                "{} trig factors in one cluster exceed the exact limit {}; use signed_sum_monte_carlo",
                group.len(),
                opts.max_trig_factors
            )));
        }
        let fs: Vec<&TrigFactor> = group.iter().map(|&k| &product.factors[k]).collect();
        let kinds: Vec<Trig> = fs.iter().map(|f| f.kind).collect();
        let b = blocks(kernel, &fs);
        let mut acc = ComplexNeumaier::new();
        for sigma in 0..1u64 << fs.len() {
            acc.add(pattern_term(&b, &kinds, sigma, opts, &mut diagnostics));
        }
        value *= acc.value();
    }
    Ok(Evaluation { value, diagnostics })
}

/// Unbiased estimate of [`signed_sum`] from uniformly sampled sign patterns,
/// returning the estimate and its standard error.
pub fn signed_sum_monte_carlo(
    kernel: &dyn Kernel,
    product: &TrigProduct,
    samples: usize,
    seed: u64,
    opts: &EngineOptions,
) -> Result<(Complex64, f64)> {
    if samples < 2 {
        return Err(Error::Domain("at least two samples are needed".into()));
    }
    let k = product.factors.len();
    if k > 63 {
        return Err(Error::Size(format!("{k} trig factors exceed 63")));
    }
    let fs: Vec<&TrigFactor> = product.factors.iter().collect();
    let kinds: Vec<Trig> = fs.iter().map(|f| f.kind).collect();
    let b = blocks(kernel, &fs);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let scale = (k as f64).exp2();
    let mut diag = Vec::new();
    let (mut mean, mut m2) = (Complex64::new(0.0, 0.0), 0.0);
    for n in 1..=samples {
        let sigma = if k == 0 { 0 } else { rng.gen::<u64>() >> (64 - k) };
        let v = pattern_term(&b, &kinds, sigma, opts, &mut diag) * scale;
        let d = v - mean;
        mean += d / n as f64;
        m2 += d.norm() * (v - mean).norm();
    }
    let se = (m2 / (samples - 1) as f64 / samples as f64).sqrt();
    Ok((product.prefactor * mean, se * product.prefactor.norm()))
}
