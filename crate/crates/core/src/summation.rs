//! Compensated summation with a fixed reduction tree.
//!
//! Parallel sums split the index range into chunks of a constant size, sum
//! each chunk in index order, then fold the chunk partials in order. The
//! result therefore does not depend on how many worker threads run.

use num_complex::Complex64;
use rayon::prelude::*;

/// Chunk length used by the parallel reductions.
pub const CHUNK: usize = 1 << 12;

/// Neumaier (improved Kahan–Babuška) accumulator.
#[derive(Clone, Copy, Debug, Default)]
pub struct Neumaier {
    sum: f64,
    comp: f64,
}

impl Neumaier {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.comp += (self.sum - t) + v;
        } else {
            self.comp += (v - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct ComplexNeumaier {
    re: Neumaier,
    im: Neumaier,
}

impl ComplexNeumaier {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, v: Complex64) {
        self.re.add(v.re);
        self.im.add(v.im);
    }

    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re.value(), self.im.value())
    }
}

pub fn sum_complex<I: IntoIterator<Item = Complex64>>(it: I) -> Complex64 {
    let mut acc = ComplexNeumaier::new();
    for v in it {
        acc.add(v);
    }
    acc.value()
}

pub fn sum_real<I: IntoIterator<Item = f64>>(it: I) -> f64 {
    let mut acc = Neumaier::new();
    for v in it {
        acc.add(v);
    }
    acc.value()
}

/// `Σ_{i<len} f(i)` with the deterministic chunked reduction.
pub fn par_sum_complex<F>(len: usize, f: F) -> Complex64
where
    F: Fn(usize) -> Complex64 + Sync,
{
    let chunks = len.div_ceil(CHUNK);
    let partials: Vec<Complex64> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let lo = c * CHUNK;
            let hi = (lo + CHUNK).min(len);
            sum_complex((lo..hi).map(&f))
        })
        .collect();
    sum_complex(partials)
}

/// Evaluates `f` at every index in parallel, keeping index order.
pub fn par_map<T, F>(len: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..len).into_par_iter().map(f).collect()
}
