//! Pauli group elements in symplectic form.
//!
//! An operator is stored as `i^phase · X^x · Z^z`, where `x` and `z` are bit
//! masks over at most 64 qubits (bit `j` is qubit `j`, qubit 0 is the leftmost
//! character of a Pauli string). With this convention `σˣσᶻ` has masks
//! `x = z = 1` and phase 0, i.e. it represents `−iσʸ`.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Largest supported register.
pub const MAX_QUBITS: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PauliOperator {
    n: usize,
    x_mask: u64,
    z_mask: u64,
    phase_exp: u8,
}

impl PauliOperator {
    pub fn new(n: usize, x_mask: u64, z_mask: u64, phase_exp: u8) -> Result<Self> {
        if n == 0 || n > MAX_QUBITS {
            return Err(Error::Dimension(format!("qubit count {n} outside 1..={MAX_QUBITS}")));
        }
        let live = mask_for(n);
        if (x_mask | z_mask) & !live != 0 {
            return Err(Error::Dimension(format!("mask has bits beyond qubit {n}")));
        }
        Ok(Self { n, x_mask, z_mask, phase_exp: phase_exp % 4 })
    }

    pub fn identity(n: usize) -> Self {
        Self::new(n, 0, 0, 0).expect("identity on a valid register")
    }

    /// `σᶻ` on every qubit in `mask`.
    pub fn z_string(n: usize, mask: u64) -> Result<Self> {
        Self::new(n, 0, mask, 0)
    }

    /// `σˣ` on every qubit in `mask`.
    pub fn x_string(n: usize, mask: u64) -> Result<Self> {
        Self::new(n, mask, 0, 0)
    }

    /// Single-qubit `σᶻ_j` (zero-based `j`).
    pub fn z(n: usize, j: usize) -> Result<Self> {
        if j >= n {
            return Err(Error::Dimension(format!("qubit {j} outside register of {n}")));
        }
        Self::z_string(n, 1 << j)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn x_mask(&self) -> u64 {
        self.x_mask
    }

    pub fn z_mask(&self) -> u64 {
        self.z_mask
    }

    pub fn phase_exp(&self) -> u8 {
        self.phase_exp
    }

    /// Number of qubits acted on non-trivially.
    pub fn weight(&self) -> u32 {
        (self.x_mask | self.z_mask).count_ones()
    }

    pub fn is_identity(&self) -> bool {
        self.x_mask == 0 && self.z_mask == 0 && self.phase_exp == 0
    }

    /// Same operator up to an overall phase.
    pub fn same_support(&self, other: &Self) -> bool {
        self.n == other.n && self.x_mask == other.x_mask && self.z_mask == other.z_mask
    }

    pub fn without_phase(&self) -> Self {
        Self { phase_exp: 0, ..*self }
    }

    pub fn commutes_with(&self, other: &Self) -> bool {
        let s = (self.x_mask & other.z_mask).count_ones() + (self.z_mask & other.x_mask).count_ones();
        s % 2 == 0
    }

    /// Group product `self · other`.
    pub fn multiply(&self, other: &Self) -> Result<Self> {
        if self.n != other.n {
            return Err(Error::Dimension(format!(
                "cannot multiply operators on {} and {} qubits",
                self.n, other.n
            )));
        }
        // Z^{z1} X^{x2} = (-1)^{z1·x2} X^{x2} Z^{z1}
        let swap = (self.z_mask & other.x_mask).count_ones() as u8 % 2;
        let phase = (self.phase_exp + other.phase_exp + 2 * swap) % 4;
        Ok(Self {
            n: self.n,
            x_mask: self.x_mask ^ other.x_mask,
            z_mask: self.z_mask ^ other.z_mask,
            phase_exp: phase,
        })
    }

    /// Hermitian conjugate.
    pub fn adjoint(&self) -> Self {
        // (i^k X^x Z^z)† = i^{-k} Z^z X^x = i^{-k} (-1)^{x·z} X^x Z^z
        let overlap = (self.x_mask & self.z_mask).count_ones() as u8 % 2;
        Self { phase_exp: (4 - self.phase_exp + 2 * overlap) % 4, ..*self }
    }
}

fn mask_for(n: usize) -> u64 {
    if n == 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

impl fmt::Display for PauliOperator {
    /// Writes the operator as an optional phase prefix followed by one letter
    /// per qubit, using `Y` for `XZ` sites (the phase absorbs the `i`).
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ys = (self.x_mask & self.z_mask).count_ones() as u8 % 4;
        // X Z = -i Y, so each Y letter removes one factor of -i
        let phase = (self.phase_exp + 3 * ys) % 4;
        let prefix = ["", "i", "-", "-i"][phase as usize];
        f.write_str(prefix)?;
        for j in 0..self.n {
            let bit = 1u64 << j;
            let c = match (self.x_mask & bit != 0, self.z_mask & bit != 0) {
                (false, false) => 'I',
                (true, false) => 'X',
                (false, true) => 'Z',
                (true, true) => 'Y',
            };
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

impl FromStr for PauliOperator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (mut phase, body) = if let Some(rest) = s.strip_prefix("-i") {
            (3u8, rest)
        } else if let Some(rest) = s.strip_prefix("+i") {
            (1, rest)
        } else if let Some(rest) = s.strip_prefix('i') {
            (1, rest)
        } else if let Some(rest) = s.strip_prefix('-') {
            (2, rest)
        } else if let Some(rest) = s.strip_prefix('+') {
            (0, rest)
        } else {
            (0, s)
        };
        let n = body.chars().count();
        if n == 0 || n > MAX_QUBITS {
            return Err(Error::Parse(format!("bad Pauli string length in {s:?}")));
        }
        let (mut x, mut z) = (0u64, 0u64);
        for (j, c) in body.chars().enumerate() {
            let bit = 1u64 << j;
            match c {
                'I' | '_' => {}
                'X' => x |= bit,
                'Z' => z |= bit,
                'Y' => {
                    x |= bit;
                    z |= bit;
                    phase += 1;
                }
                other => return Err(Error::Parse(format!("unknown Pauli letter {other:?} in {s:?}"))),
            }
        }
        Self::new(n, x, z, phase % 4)
    }
}
