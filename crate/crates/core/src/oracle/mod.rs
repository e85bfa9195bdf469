//! Independent brute-force checks of the engine: displacement-operator
//! evaluation on discrete modes and dense Fock-space evolution.

mod fock;
mod gaussian;

use num_complex::Complex64;
use serde::Serialize;

pub use fock::{fock_evolve, fock_evolve_cycle, fock_free_coherence, FockConfig, FockHistory, FockRun};
pub use gaussian::gaussian_oracle_expectation;

use crate::bath::{epsilon, mode_discretize, quadrature_increment, BathSpec, DiscreteBath, Point, QuadratureOptions};
use crate::dynamics::{enumerate_histories, CycleSchedule, QecSetup};
use crate::error::Result;
use crate::stabilizer::StabilizerCode;
use crate::vertex::{ordered_expectation, EngineOptions, VertexInsertion, VertexProduct};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub discrepancy: f64,
    pub tolerance: f64,
    pub detail: String,
}

impl CheckResult {
    fn new(name: &str, discrepancy: f64, tolerance: f64, detail: String) -> Self {
        Self { name: name.to_string(), passed: discrepancy <= tolerance, discrepancy, tolerance, detail }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OracleReport {
    pub checks: Vec<CheckResult>,
}

impl OracleReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// Same-qubit pair `e^{iλθ(Δ)} e^{−iλθ(0)}`.
fn pair(lambda: f64, delta: f64) -> VertexProduct {
    VertexProduct::new(vec![
        VertexInsertion { point: Point::new(0, 0.0, delta), charge: lambda, ordinal: 0 },
        VertexInsertion { point: Point::new(0, 0.0, 0.0), charge: -lambda, ordinal: 1 },
    ])
}

/// Two modes resolving a bath near `ω ≈ 1/Δ`, used for the Fock comparison.
pub fn two_mode_bath(bath: &BathSpec, delta: f64) -> Result<DiscreteBath> {
    mode_discretize(&BathSpec { omega_c: 2.0 / delta, ..*bath }, 2, 6.0 / delta)
}

/// Runs every oracle check for `bath` and cycle length `delta`.
pub fn run_validation(bath: &BathSpec, delta: f64) -> Result<OracleReport> {
    let mut checks = Vec::new();

    let ohmic = BathSpec { s: 1.0, ..*bath };
    let mut worst = 0.0f64;
    for wd in [1.0, 10.0, 100.0, 1000.0] {
        let b = BathSpec { omega_c: wd / delta, ..ohmic };
        let q = quadrature_increment(&b, 0.0, delta, QuadratureOptions::default())?.re * b.lambda * b.lambda;
        let exact = 0.5 * b.lambda * b.lambda * (wd * wd).ln_1p();
        if exact > 0.0 {
            worst = worst.max((q / exact - 1.0).abs());
        }
    }
    checks.push(CheckResult::new(
        "epsilon_quadrature_vs_closed_form",
        worst,
        1e-6,
        "relative error over omega_c*delta in {1, 10, 100, 1000}".into(),
    ));

    let disc = mode_discretize(bath, 2000, 20.0 * bath.omega_c)?;
    let p = pair(bath.lambda, delta);
    let exact = ordered_expectation(bath, &p, &EngineOptions::default())?.value;
    let modes = gaussian_oracle_expectation(&p, &disc)?;
    checks.push(CheckResult::new(
        "gaussian_2000_modes_vs_kernel",
        ((modes - exact) / exact).norm(),
        1e-4,
        format!("engine {exact:.9}, modes {modes:.9}"),
    ));

    let engine_disc = ordered_expectation(&disc, &p, &EngineOptions::default())?.value;
    checks.push(CheckResult::new(
        "gaussian_modes_vs_engine_same_modes",
        (engine_disc - modes).norm(),
        1e-12,
        "displacement composition against the Wick exponent".into(),
    ));

    let far = 100.0 * 2.0 * delta * bath.v_b;
    let mut two = p.insertions.clone();
    two.extend(p.insertions.iter().map(|i| VertexInsertion {
        point: Point::new(1, far, i.point.t),
        charge: i.charge,
        ordinal: i.ordinal + 2,
    }));
    let joint = ordered_expectation(bath, &VertexProduct::new(two), &EngineOptions::default())?.value;
    checks.push(CheckResult::new(
        "spacelike_factorization",
        ((joint - exact * exact) / joint).norm(),
        1e-6,
        format!("separation {far}"),
    ));

    let small = two_mode_bath(bath, delta)?;
    let code = StabilizerCode::three_qubit();
    let sched = CycleSchedule::unpulsed(delta)?;
    let fock_lambda = bath.lambda.max(0.3);
    let cfg = FockConfig::new(small.modes.clone(), 10, 3, fock_lambda);
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let run = fock_evolve_cycle(&cfg, &code, &sched, Complex64::new(s, 0.0), Complex64::new(s, 0.0), 1e-3)?;
    let total: f64 = run.histories.iter().map(|h| h.probability).sum();
    checks.push(CheckResult::new("fock_completeness", (total - 1.0).abs(), 1e-10, format!("{} histories", run.histories.len())));
    checks.push(CheckResult::new(
        "fock_truncation",
        run.truncation_change,
        1e-3,
        format!("cutoff {} vs {}", cfg.cutoff_dim, cfg.cutoff_dim + 2),
    ));
    let mut setup = QecSetup::three_qubit(BathSpec { lambda: fock_lambda, ..*bath }, delta, 0.0)?;
    setup.schedule = sched;
    let table = enumerate_histories(&setup, &small, 1)?;
    let diff = table
        .histories
        .iter()
        .zip(&run.histories)
        .map(|(a, b)| (a.probability - b.probability).abs())
        .fold(0.0, f64::max);
    checks.push(CheckResult::new(
        "fock_vs_engine_two_modes",
        diff,
        1e-3,
        format!("lambda {fock_lambda}, 3 co-located qubits, d = 10"),
    ));

    let eps = epsilon(bath, delta)?;
    let far_setup = QecSetup::three_qubit(*bath, delta, 1e6 * delta * bath.v_b)?;
    let t1 = enumerate_histories(&far_setup, bath, 1)?;
    let e = (-eps).exp();
    let expect = (3.0 * e + e * e * e) / (1.0 + 3.0 * e * e);
    let got = t1.histories[0].off_diagonal().map_or(f64::INFINITY, |o| (o / 0.5).re);
    checks.push(CheckResult::new(
        "single_cycle_logical_coherence",
        (got / expect - 1.0).abs(),
        1e-6,
        format!("trivial syndrome, epsilon {eps:.6e}"),
    ));

    let t3 = enumerate_histories(&far_setup, bath, 3)?;
    checks.push(CheckResult::new(
        "completeness_three_cycles",
        (t3.total_probability() - 1.0).abs(),
        1e-8,
        "64 histories".into(),
    ));
    Ok(OracleReport { checks })
}
