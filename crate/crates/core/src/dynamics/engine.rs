//! Exact history statistics by summing over `σᶻ` configurations.
//!
//! Each cycle contributes one Weyl operator `W(z)` on the ket side and one
//! `W(z′)†` on the bra side. The expectation of the ordered product depends
//! on all configurations, but the syndrome enters only through the signs
//! `χ_S(z′)χ_S(z)`, so one pass over configuration pairs followed by a
//! Walsh–Hadamard transform yields every history at once.

use num_complex::Complex64;
use rayon::prelude::*;

use super::{HistoryResult, QecSetup, SyndromeHistory};
use crate::bath::Kernel;
use crate::error::{Error, Result};
use crate::stabilizer::Syndrome;
use crate::summation::ComplexNeumaier;

/// Kernel sums between the increments `L_j` of different cycles.
pub(crate) struct Geometry {
    pub n: usize,
    pub cycles: usize,
    /// `(λ/2)²`.
    pub q2: f64,
    blocks: Vec<Complex64>,
    ising: Vec<f64>,
}

impl Geometry {
    pub fn new(setup: &QecSetup, kernel: &dyn Kernel, cycles: usize) -> Self {
        let n = setup.code.n;
        let fields: Vec<Vec<_>> = (0..cycles)
            .flat_map(|k| (0..n).map(move |j| (k, j)))
            .map(|(k, j)| setup.increment_field(k, j))
            .collect();
        let mut blocks = vec![Complex64::new(0.0, 0.0); cycles * cycles * n * n];
        for k in 0..cycles {
            for kp in 0..cycles {
                if setup.memoryless && k != kp {
                    continue;
                }
                for j in 0..n {
                    for jp in 0..n {
                        let mut acc = ComplexNeumaier::new();
                        for (a, wa) in &fields[k * n + j] {
                            for (b, wb) in &fields[kp * n + jp] {
                                acc.add(kernel.kernel(a, b) * (wa * wb));
                            }
                        }
                        blocks[((k * cycles + kp) * n + j) * n + jp] = acc.value();
                    }
                }
            }
        }
        let ising = if setup.coherent_coupling {
            setup.ising_couplings(kernel).into_iter().flatten().collect()
        } else {
            vec![0.0; n * n]
        };
        let half = 0.5 * setup.bath.lambda;
        Self { n, cycles, q2: half * half, blocks, ising }
    }

    /// `Σ_{j,j′} K(L_{k,j}, L_{k′,j′})`-weighted `z_j z′_{j′}`, left operand
    /// from cycle `k`.
    pub fn pair(&self, k: usize, z: &[f64], kp: usize, zp: &[f64]) -> Complex64 {
        let n = self.n;
        let base = (k * self.cycles + kp) * n * n;
        let mut acc = Complex64::new(0.0, 0.0);
        for j in 0..n {
            for jp in 0..n {
                acc += self.blocks[base + j * n + jp] * (z[j] * zp[jp]);
            }
        }
        acc * self.q2
    }

    /// Exponent of a single cycle operator with itself.
    pub fn self_term(&self, k: usize, z: &[f64]) -> f64 {
        0.5 * self.pair(k, z, k, z).re
    }

    /// In-cycle `σᶻσᶻ` phase angle for the ket side.
    pub fn ising_phase(&self, z: &[f64]) -> f64 {
        let n = self.n;
        let mut acc = 0.0;
        for j in 0..n {
            for jp in 0..n {
                acc += self.ising[j * n + jp] * z[j] * z[jp];
            }
        }
        acc * self.q2
    }
}

/// `z(c)`: the first `n−1` spins are `(−1)^{c_j}`, the last fixes the
/// parity; `odd` flips the last spin.
pub(crate) fn configs(n: usize, odd: bool) -> Vec<Vec<f64>> {
    (0..1usize << (n - 1))
        .map(|c| {
            let mut z: Vec<f64> = (0..n - 1).map(|j| if c >> j & 1 == 1 { -1.0 } else { 1.0 }).collect();
            let parity = if c.count_ones() % 2 == 1 { -1.0 } else { 1.0 };
            z.push(if odd { -parity } else { parity });
            z
        })
        .collect()
}

/// Per-syndrome data: the `c`-mask with `χ_S(z(c)) = (−1)^{c·mask}` and
/// whether the last qubit is in the recovery.
#[derive(Clone, Copy, Debug)]
pub(crate) struct SyndromeMask {
    pub syndrome: Syndrome,
    pub mask: u64,
    pub last: bool,
}

pub(crate) fn syndrome_masks(setup: &QecSetup) -> Result<Vec<SyndromeMask>> {
    let n = setup.code.n;
    let low = (1u64 << (n - 1)) - 1;
    let partition = setup.code.coset_partition()?;
    let mut out: Vec<SyndromeMask> = partition
        .ordered()
        .into_iter()
        .map(|c| {
            let r = c.recovery.z_mask();
            let last = r >> (n - 1) & 1 == 1;
            SyndromeMask { syndrome: c.syndrome, mask: (r & low) ^ if last { low } else { 0 }, last }
        })
        .collect();
    out.sort_by_key(|m| m.syndrome.bits());
    Ok(out)
}

fn walsh_hadamard(v: &mut [Complex64]) {
    let mut h = 1;
    while h < v.len() {
        for i in (0..v.len()).step_by(2 * h) {
            for j in i..i + h {
                let (a, b) = (v[j], v[j + h]);
                v[j] = a + b;
                v[j + h] = a - b;
            }
        }
        h *= 2;
    }
}

/// Exact evaluator for all histories of a fixed number of cycles.
pub struct HistoryEngine<'a> {
    setup: QecSetup,
    kernel: &'a dyn Kernel,
    cycles: usize,
    geometry: Geometry,
    masks: Vec<SyndromeMask>,
}

/// All `4^N`-style histories with their results.
#[derive(Clone, Debug)]
pub struct HistoryTable {
    pub cycles: usize,
    pub histories: Vec<HistoryResult>,
}

impl HistoryTable {
    pub fn total_probability(&self) -> f64 {
        crate::summation::sum_real(self.histories.iter().map(|h| h.probability))
    }

    pub fn get(&self, history: &SyndromeHistory) -> Option<&HistoryResult> {
        self.histories.iter().find(|h| &h.history == history)
    }
}

impl<'a> HistoryEngine<'a> {
    pub fn new(setup: &QecSetup, kernel: &'a dyn Kernel, cycles: usize) -> Result<Self> {
        setup.validate()?;
        if cycles == 0 {
            return Err(Error::Domain("at least one cycle is required".into()));
        }
        let bits = 2 * cycles * (setup.code.n - 1);
        if bits > setup.max_bits {
            return Err(Error::Size(format!(
                "{cycles} cycles of a {}-qubit code need 2^{bits} configuration pairs, above the limit 2^{}; \
                 use fewer cycles or the marginal correlation routines",
                setup.code.n, setup.max_bits
            )));
        }
        let geometry = Geometry::new(setup, kernel, cycles);
        let masks = syndrome_masks(setup)?;
        Ok(Self { setup: setup.clone(), kernel, cycles, geometry, masks })
    }

    pub fn cycles(&self) -> usize {
        self.cycles
    }

    pub fn kernel(&self) -> &dyn Kernel {
        self.kernel
    }

    /// `Ṽ(u) = Σ_{c′} V(c′, c′ ⊕ u)` for the given sectors of the bra and
    /// ket configurations.
    fn folded(&self, bra_odd: bool, ket_odd: bool) -> Vec<Complex64> {
        let n = self.setup.code.n;
        let nc = self.cycles;
        let ops = 2 * nc;
        let bra = configs(n, bra_odd);
        let ket = configs(n, ket_odd);
        let cc = bra.len();
        let g = &self.geometry;
        // op u < N is the bra of cycle u; op u ≥ N the ket of cycle 2N−1−u
        let cycle_of = |u: usize| if u < nc { u } else { ops - 1 - u };
        let zs = |u: usize| if u < nc { &bra } else { &ket };
        let sign = |u: usize| if u < nc { -1.0 } else { 1.0 };
        let mut single = vec![Complex64::new(0.0, 0.0); ops * cc];
        for u in 0..ops {
            for c in 0..cc {
                let z = &zs(u)[c];
                let ising = g.ising_phase(z) * sign(u);
                single[u * cc + c] = Complex64::new(g.self_term(cycle_of(u), z), ising);
            }
        }
        let mut pair = vec![Complex64::new(0.0, 0.0); ops * ops * cc * cc];
        for u in 0..ops {
            for v in u + 1..ops {
                for a in 0..cc {
                    for b in 0..cc {
                        let t = g.pair(cycle_of(u), &zs(u)[a], cycle_of(v), &zs(v)[b]) * (sign(u) * sign(v));
                        pair[((u * ops + v) * cc + a) * cc + b] = t;
                    }
                }
            }
        }
        let width = n - 1;
        let len = 1usize << (nc * width);
        let walk = |first: usize| {
            let mut acc = vec![ComplexNeumaier::new(); len];
            let mut cfg = vec![0usize; ops];
            cfg[0] = first;
            let mut partial = vec![Complex64::new(0.0, 0.0); ops + 1];
            partial[1] = single[first];
            descend(1, &mut cfg, &mut partial, &single, &pair, ops, cc, nc, width, &mut acc);
            acc.into_iter().map(|a| a.value()).collect::<Vec<_>>()
        };
        let parts: Vec<Vec<Complex64>> = (0..cc).into_par_iter().map(walk).collect();
        let mut out = vec![ComplexNeumaier::new(); len];
        for p in parts {
            for (o, v) in out.iter_mut().zip(p) {
                o.add(v);
            }
        }
        out.into_iter().map(|a| a.value()).collect()
    }

    fn transformed(&self, bra_odd: bool, ket_odd: bool) -> Vec<Complex64> {
        let mut v = self.folded(bra_odd, ket_odd);
        walsh_hadamard(&mut v);
        let scale = (2.0 * self.cycles as f64 * (1.0 - self.setup.code.n as f64)).exp2();
        v.iter_mut().for_each(|x| *x *= scale);
        v
    }

    fn history_index(&self, choice: &[usize]) -> (u64, bool) {
        let width = self.setup.code.n - 1;
        let mut m = 0u64;
        let mut flip = false;
        for (k, &c) in choice.iter().enumerate() {
            m |= self.masks[c].mask << (k * width);
            flip ^= self.masks[c].last;
        }
        (m, flip)
    }

    /// `⟨G_ℓ′† G_ℓ⟩` for every history, in [`Self::histories`] order.
    pub(crate) fn branch_overlaps(&self, bra_odd: bool, ket_odd: bool) -> Vec<Complex64> {
        let t = self.transformed(bra_odd, ket_odd);
        self.histories()
            .iter()
            .map(|choice| {
                let (m, flip) = self.history_index(choice);
                let v = t[m as usize];
                if flip && bra_odd != ket_odd {
                    -v
                } else {
                    v
                }
            })
            .collect()
    }

    /// Every history as syndrome indices, cycle 0 first, lexicographic.
    fn histories(&self) -> Vec<Vec<usize>> {
        let s = self.masks.len();
        let total = s.pow(self.cycles as u32);
        (0..total)
            .map(|mut idx| {
                let mut v = vec![0; self.cycles];
                for k in (0..self.cycles).rev() {
                    v[k] = idx % s;
                    idx /= s;
                }
                v
            })
            .collect()
    }

    pub fn enumerate(&self) -> Result<HistoryTable> {
        let diag = self.branch_overlaps(false, false);
        let off = self.branch_overlaps(true, false);
        let (a, b) = (self.setup.alpha, self.setup.beta);
        let mut histories = Vec::with_capacity(diag.len());
        for ((choice, p), g) in self.histories().into_iter().zip(diag).zip(off) {
            let history = SyndromeHistory::new(choice.iter().map(|&c| self.masks[c].syndrome).collect());
            if p.im.abs() > 1e-9 {
                return Err(Error::Numerical(format!("history {history} has imaginary probability part {}", p.im)));
            }
            let probability = p.re;
            let rho = (probability > self.setup.probability_floor).then(|| {
                let c = a * b.conj() * g / probability;
                [[Complex64::new(a.norm_sqr(), 0.0), c], [c.conj(), Complex64::new(b.norm_sqr(), 0.0)]]
            });
            histories.push(HistoryResult { history, probability, rho, imag_residual: p.im.abs() });
        }
        Ok(HistoryTable { cycles: self.cycles, histories })
    }
}

#[allow(clippy::too_many_arguments)]
fn descend(
    depth: usize,
    cfg: &mut [usize],
    partial: &mut [Complex64],
    single: &[Complex64],
    pair: &[Complex64],
    ops: usize,
    cc: usize,
    nc: usize,
    width: usize,
    acc: &mut [ComplexNeumaier],
) {
    if depth == ops {
        let mut idx = 0usize;
        for k in 0..nc {
            idx |= (cfg[k] ^ cfg[ops - 1 - k]) << (k * width);
        }
        acc[idx].add(partial[ops].exp());
        return;
    }
    for c in 0..cc {
        let mut e = partial[depth] + single[depth * cc + c];
        for u in 0..depth {
            e += pair[((u * ops + depth) * cc + cfg[u]) * cc + c];
        }
        cfg[depth] = c;
        partial[depth + 1] = e;
        descend(depth + 1, cfg, partial, single, pair, ops, cc, nc, width, acc);
    }
}

/// All histories of `cycles` cycles.
pub fn enumerate_histories(setup: &QecSetup, kernel: &dyn Kernel, cycles: usize) -> Result<HistoryTable> {
    HistoryEngine::new(setup, kernel, cycles)?.enumerate()
}

fn lookup(setup: &QecSetup, kernel: &dyn Kernel, history: &SyndromeHistory) -> Result<HistoryResult> {
    let table = enumerate_histories(setup, kernel, history.len())?;
    table
        .get(history)
        .cloned()
        .ok_or_else(|| Error::Domain(format!("history {history} contains a syndrome that labels no coset")))
}

pub fn history_probability(setup: &QecSetup, kernel: &dyn Kernel, history: &SyndromeHistory) -> Result<f64> {
    Ok(lookup(setup, kernel, history)?.probability)
}

pub fn reduced_density_matrix(
    setup: &QecSetup,
    kernel: &dyn Kernel,
    history: &SyndromeHistory,
) -> Result<[[Complex64; 2]; 2]> {
    let r = lookup(setup, kernel, history)?;
    r.rho.ok_or_else(|| {
        Error::Numerical(format!(
            "history {history} has probability {:e} below the floor {:e}",
            r.probability, setup.probability_floor
        ))
    })
}
