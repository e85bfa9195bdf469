//! Stabilizer codes against dephasing, their error sets and the
//! syndrome-indexed coset partition with recovery operations.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::pauli::PauliOperator;

/// Outcome of measuring every stabilizer generator once; bit `i` is set when
/// the error anticommutes with generator `i`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Syndrome {
    bits: u64,
    len: usize,
}

impl Syndrome {
    pub fn new(bits: u64, len: usize) -> Self {
        Self { bits, len }
    }

    pub fn trivial(len: usize) -> Self {
        Self { bits: 0, len }
    }

    pub fn bits(&self) -> u64 {
        self.bits
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn is_trivial(&self) -> bool {
        self.bits == 0
    }
}

impl fmt::Display for Syndrome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.len {
            f.write_str(if self.bits >> i & 1 == 1 { "1" } else { "0" })?;
        }
        Ok(())
    }
}

/// One equivalence class of the error set: a left coset of the logical
/// subgroup together with the recovery applied when its syndrome is seen.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CosetClass {
    pub syndrome: Syndrome,
    pub elements: Vec<PauliOperator>,
    pub recovery: PauliOperator,
}

impl fmt::Display for CosetClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<String> = self.elements.iter().map(|e| e.to_string()).collect();
        write!(f, "{{{}}} <-> {}", names.join(", "), self.recovery)
    }
}

/// The partition of the error set keyed by syndrome.
#[derive(Clone, Debug)]
pub struct CosetPartition {
    classes: BTreeMap<Syndrome, CosetClass>,
}

impl CosetPartition {
    pub fn get(&self, syndrome: &Syndrome) -> Option<&CosetClass> {
        self.classes.get(syndrome)
    }

    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    /// Classes ordered by recovery weight, then by the qubits it touches.
    pub fn ordered(&self) -> Vec<&CosetClass> {
        let mut v: Vec<&CosetClass> = self.classes.values().collect();
        v.sort_by_key(|c| (c.recovery.weight(), c.recovery.z_mask(), c.recovery.x_mask()));
        v
    }

    /// One `{coset} <-> recovery` line per class, in [`Self::ordered`] order.
    pub fn table(&self) -> String {
        let mut out = String::new();
        for class in self.ordered() {
            out.push_str(&class.to_string());
            out.push('\n');
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StabilizerCode {
    pub name: String,
    pub n: usize,
    pub stabilizer_generators: Vec<PauliOperator>,
    pub logical_z: PauliOperator,
    pub logical_x: PauliOperator,
    pub error_set: Vec<PauliOperator>,
    pub logical_subgroup: Vec<PauliOperator>,
}

impl StabilizerCode {
    /// The three-qubit phase-flip code with generators `XXI`, `IXX`.
    pub fn three_qubit() -> Self {
        Self::phase_flip(3).expect("n = 3 is a valid repetition length")
    }

    /// Phase-flip repetition code on an odd number of qubits: generators
    /// `X_j X_{j+1}`, logical `Z̄ = Z…Z`, `X̄ = X…X`, and every `σᶻ` string as
    /// the error set.
    pub fn phase_flip(n: usize) -> Result<Self> {
        if n < 3 || n % 2 == 0 || n > 16 {
            return Err(Error::Domain(format!("phase-flip code needs odd n in 3..=15, got {n}")));
        }
        let gens = (0..n - 1)
            .map(|j| PauliOperator::x_string(n, 0b11 << j))
            .collect::<Result<Vec<_>>>()?;
        let all = (1u64 << n) - 1;
        Self::from_parts(
            format!("phase-flip-{n}"),
            gens,
            PauliOperator::z_string(n, all)?,
            PauliOperator::x_string(n, all)?,
        )
    }

    /// Builds a code from generators and logicals; the error set is every
    /// `σᶻ` string on the register.
    pub fn from_parts(
        name: String,
        stabilizer_generators: Vec<PauliOperator>,
        logical_z: PauliOperator,
        logical_x: PauliOperator,
    ) -> Result<Self> {
        let n = logical_z.n();
        if n > 16 {
            return Err(Error::Size(format!("error set of 2^{n} elements is too large")));
        }
        for g in stabilizer_generators.iter().chain([&logical_x]) {
            if g.n() != n {
                return Err(Error::Dimension(format!("{g} does not act on {n} qubits")));
            }
        }
        for (i, a) in stabilizer_generators.iter().enumerate() {
            for b in &stabilizer_generators[i + 1..] {
                if !a.commutes_with(b) {
                    return Err(Error::Structure(format!("generators {a} and {b} anticommute")));
                }
            }
            if !a.commutes_with(&logical_z) || !a.commutes_with(&logical_x) {
                return Err(Error::Structure(format!("generator {a} does not commute with the logicals")));
            }
        }
        if logical_z.commutes_with(&logical_x) {
            return Err(Error::Structure("logical Z and X must anticommute".into()));
        }
        let error_set = (0..1u64 << n)
            .map(|m| PauliOperator::z_string(n, m))
            .collect::<Result<Vec<_>>>()?;
        let logical_group = logical_group(&logical_z, &logical_x)?;
        let logical_subgroup = error_set
            .iter()
            .copied()
            .filter(|e| logical_group.iter().any(|l| l.same_support(e)))
            .collect();
        Ok(Self { name, n, stabilizer_generators, logical_z, logical_x, error_set, logical_subgroup })
    }

    /// Parses a key-value descriptor:
    ///
    /// ```text
    /// name = phase-flip-3
    /// generators = XXI, IXX
    /// logical_z = ZZZ
    /// logical_x = XXX
    /// ```
    pub fn from_descriptor(text: &str) -> Result<Self> {
        let mut name = None;
        let mut gens = None;
        let mut lz = None;
        let mut lx = None;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("line {}: expected key = value", lineno + 1)))?;
            let value = value.trim().trim_matches('"');
            let at = |e: Error| Error::Parse(format!("line {}: {e}", lineno + 1));
            match key.trim() {
                "name" => name = Some(value.to_string()),
                "generators" => {
                    gens = Some(
                        value
                            .split(',')
                            .map(|g| g.trim().parse::<PauliOperator>())
                            .collect::<Result<Vec<_>>>()
                            .map_err(at)?,
                    )
                }
                "logical_z" => lz = Some(value.parse::<PauliOperator>().map_err(at)?),
                "logical_x" => lx = Some(value.parse::<PauliOperator>().map_err(at)?),
                "errors" if value == "z" => {}
                other => return Err(Error::Parse(format!("line {}: unknown key {other:?}", lineno + 1))),
            }
        }
        let missing = |k: &str| Error::Parse(format!("descriptor is missing {k:?}"));
        Self::from_parts(
            name.unwrap_or_else(|| "custom".into()),
            gens.ok_or_else(|| missing("generators"))?,
            lz.ok_or_else(|| missing("logical_z"))?,
            lx.ok_or_else(|| missing("logical_x"))?,
        )
    }

    pub fn syndrome_len(&self) -> usize {
        self.stabilizer_generators.len()
    }

    pub fn contains_error(&self, e: &PauliOperator) -> bool {
        self.error_set.iter().any(|x| x.same_support(e))
    }

    pub fn syndrome_of(&self, error: &PauliOperator) -> Result<Syndrome> {
        if error.n() != self.n {
            return Err(Error::Dimension(format!("{error} does not act on {} qubits", self.n)));
        }
        if !self.contains_error(error) {
            return Err(Error::Domain(format!("{error} is not in the error set")));
        }
        let mut bits = 0u64;
        for (i, g) in self.stabilizer_generators.iter().enumerate() {
            if !error.commutes_with(g) {
                bits |= 1 << i;
            }
        }
        Ok(Syndrome::new(bits, self.syndrome_len()))
    }

    /// Left cosets of the logical subgroup in the error set, each with its
    /// minimum-weight representative as recovery.
    pub fn coset_partition(&self) -> Result<CosetPartition> {
        if self.error_set.is_empty() || self.logical_subgroup.is_empty() {
            return Err(Error::Structure("error set or logical subgroup is empty".into()));
        }
        let mut by_syndrome: BTreeMap<Syndrome, Vec<PauliOperator>> = BTreeMap::new();
        for e in &self.error_set {
            by_syndrome.entry(self.syndrome_of(e)?).or_default().push(*e);
        }
        let mut classes = BTreeMap::new();
        for (syndrome, mut members) in by_syndrome {
            members.sort_by_key(|e| (e.weight(), e.z_mask(), e.x_mask()));
            let recovery = members[0].without_phase();
            let mut coset = Vec::with_capacity(self.logical_subgroup.len());
            for l in &self.logical_subgroup {
                coset.push(recovery.multiply(l)?);
            }
            let closed = members.len() == coset.len()
                && members.iter().all(|m| coset.iter().any(|c| c.same_support(m)));
            if !closed {
                return Err(Error::Structure(format!(
                    "errors with syndrome {syndrome} do not form a single coset of the logical subgroup"
                )));
            }
            classes.insert(syndrome, CosetClass { syndrome, elements: members, recovery });
        }
        Ok(CosetPartition { classes })
    }

    /// True when the code has the shape the dynamics engine handles: a
    /// `σᶻ`-string logical, `X`-type generators, and cosets of size two.
    pub fn is_dephasing_repetition(&self) -> bool {
        self.logical_z.x_mask() == 0
            && self.stabilizer_generators.iter().all(|g| g.z_mask() == 0)
            && self.logical_subgroup.len() == 2
            && self.error_set.len() == 2 * (1usize << self.syndrome_len())
    }
}

fn logical_group(z: &PauliOperator, x: &PauliOperator) -> Result<Vec<PauliOperator>> {
    let id = PauliOperator::identity(z.n());
    let y = x.multiply(z)?;
    Ok(vec![id, *x, y, *z])
}
