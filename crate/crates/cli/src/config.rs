//! Run configuration: a TOML file with `[bath]` and `[run]` sections,
//! overridden key by key from the command line.

use std::path::Path;

use anyhow::{bail, Context, Result};
use corrqec::bath::BathSpec;
use corrqec::dynamics::{CycleSchedule, QecSetup};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Exact,
    Montecarlo,
    Ope,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BathSection {
    pub s: f64,
    pub lambda: f64,
    pub omega_c: f64,
    pub v_b: f64,
}

impl Default for BathSection {
    fn default() -> Self {
        Self { s: 1.0, lambda: 0.05, omega_c: 1.0, v_b: 1.0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunSection {
    pub delta: f64,
    pub cycles: usize,
    pub qubit_positions: Vec<f64>,
    pub pulses_per_cycle: usize,
    /// `[re, im]`.
    pub alpha: [f64; 2],
    pub beta: [f64; 2],
    pub mode: Mode,
    pub samples: usize,
    pub seed: u64,
    pub separations: Vec<usize>,
    pub format: Format,
    pub output_path: Option<String>,
}

impl Default for RunSection {
    fn default() -> Self {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        Self {
            delta: 100.0,
            cycles: 2,
            qubit_positions: vec![0.0, 1e8, 2e8],
            pulses_per_cycle: 0,
            alpha: [s, 0.0],
            beta: [s, 0.0],
            mode: Mode::Exact,
            samples: 10_000,
            seed: 1,
            separations: vec![4, 6, 8, 10, 12, 14, 16],
            format: Format::Csv,
            output_path: None,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub bath: BathSection,
    pub run: RunSection,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| anyhow::anyhow!("invalid config: {e}"))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("in {}", path.display()))
    }

    pub fn bath(&self) -> BathSpec {
        BathSpec { s: self.bath.s, lambda: self.bath.lambda, omega_c: self.bath.omega_c, v_b: self.bath.v_b }
    }

    pub fn schedule(&self) -> Result<CycleSchedule> {
        let d = self.run.delta;
        Ok(match self.run.pulses_per_cycle {
            0 => CycleSchedule::unpulsed(d)?,
            1 => CycleSchedule::midpoint(d)?,
            n => CycleSchedule::uhrig(d, n)?,
        })
    }

    pub fn validate(&self) -> Result<()> {
        self.bath().validate()?;
        if !(self.run.delta > 0.0) {
            bail!("run.delta must be positive, got {}", self.run.delta);
        }
        if self.run.cycles == 0 {
            bail!("run.cycles must be at least 1");
        }
        if self.run.mode == Mode::Montecarlo && self.run.samples == 0 {
            bail!("run.samples must be positive in montecarlo mode");
        }
        if self.run.separations.iter().any(|&d| d == 0) {
            bail!("run.separations must be positive");
        }
        Ok(())
    }

    /// QEC setup with the amplitudes normalised.
    pub fn setup(&self) -> Result<QecSetup> {
        self.validate()?;
        let mut s = QecSetup::three_qubit(self.bath(), self.run.delta, 1.0)?.with_schedule(self.schedule()?);
        s.positions = self.run.qubit_positions.clone();
        s.alpha = Complex64::new(self.run.alpha[0], self.run.alpha[1]);
        s.beta = Complex64::new(self.run.beta[0], self.run.beta[1]);
        let s = s.normalized()?;
        s.validate()?;
        Ok(s)
    }
}
