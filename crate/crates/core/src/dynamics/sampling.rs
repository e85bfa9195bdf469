//! Monte Carlo histories drawn cycle by cycle from exact conditionals.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::engine::enumerate_histories;
use super::{QecSetup, SyndromeHistory};
use crate::bath::Kernel;
use crate::error::{Error, Result};
use crate::summation::{par_map, sum_real};

#[derive(Clone, Debug, Serialize)]
pub struct SampleStatistics {
    pub cycles: usize,
    pub samples: usize,
    pub seed: u64,
    /// Every history with its count, in enumeration order.
    pub counts: Vec<(SyndromeHistory, u64)>,
    /// Probability of each history under the exact law, same order.
    pub exact: Vec<f64>,
}

impl SampleStatistics {
    pub fn frequency(&self, history: &SyndromeHistory) -> Option<f64> {
        self.counts.iter().find(|c| &c.0 == history).map(|c| c.1 as f64 / self.samples as f64)
    }
}

/// Draws `samples` histories of `cycles` cycles. Sample `i` uses stream `i`
/// of a ChaCha generator keyed by `seed`, so results do not depend on the
/// number of worker threads.
pub fn sample_histories(
    setup: &QecSetup,
    kernel: &dyn Kernel,
    cycles: usize,
    samples: usize,
    seed: u64,
) -> Result<SampleStatistics> {
    if samples == 0 {
        return Err(Error::Domain("sample count must be positive".into()));
    }
    // prefix tables: probability of each history of the first k cycles
    let mut prefix = Vec::with_capacity(cycles);
    let mut last = None;
    for k in 1..=cycles {
        let table = enumerate_histories(setup, kernel, k)?;
        prefix.push(table.histories.iter().map(|h| h.probability.max(0.0)).collect::<Vec<f64>>());
        last = Some(table);
    }
    let table = last.ok_or_else(|| Error::Domain("at least one cycle is required".into()))?;
    let branching = prefix[0].len();
    for k in 1..cycles {
        for p in 0..prefix[k - 1].len() {
            let joint = sum_real((0..branching).map(|s| prefix[k][p * branching + s]));
            if (joint - prefix[k - 1][p]).abs() > 1e-8 {
                return Err(Error::Numerical(format!(
                    "conditional probabilities at cycle {k} sum to {joint}, expected {}",
                    prefix[k - 1][p]
                )));
            }
        }
    }
    let draws = par_map(samples, |i| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(i as u64);
        let mut idx = 0usize;
        for probs in &prefix {
            let row = &probs[idx * branching..(idx + 1) * branching];
            let total: f64 = row.iter().sum();
            let mut u = rng.gen::<f64>() * total;
            let mut pick = branching - 1;
            for (s, &p) in row.iter().enumerate() {
                if u < p {
                    pick = s;
                    break;
                }
                u -= p;
            }
            idx = idx * branching + pick;
        }
        idx
    });
    let mut counts = vec![0u64; table.histories.len()];
    for d in draws {
        counts[d] += 1;
    }
    Ok(SampleStatistics {
        cycles,
        samples,
        seed,
        counts: table.histories.iter().zip(&counts).map(|(h, &c)| (h.history.clone(), c)).collect(),
        exact: table.histories.iter().map(|h| h.probability).collect(),
    })
}
