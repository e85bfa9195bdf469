//! Subcommand bodies. Each returns CSV text and a JSON payload; the
//! configured format decides which one is written.

use std::fmt::Write as _;

use anyhow::{bail, Result};
use corrqec::bath::{epsilon as epsilon_of, BathSpec};
use corrqec::dynamics::{connected_pair, enumerate_histories, sample_histories, CycleSchedule, QecSetup};
use corrqec::ope::{fit_decay_exponent, predict_correlation, CorrelationPrediction, PowerLawFit};
use corrqec::oracle::run_validation;
use corrqec::stabilizer::StabilizerCode;
use serde_json::{json, Value};

use crate::config::{Format, Mode, RunConfig};

pub struct Output {
    pub csv: String,
    pub results: Value,
    pub diagnostics: Value,
    pub success: bool,
}

impl Output {
    fn new(csv: String, results: Value, diagnostics: Value) -> Self {
        Self { csv, results, diagnostics, success: true }
    }

    pub fn write(&self, cfg: &RunConfig) -> Result<()> {
        let text = match cfg.run.format {
            Format::Csv => self.csv.clone(),
            Format::Json => {
                let doc = json!({ "config": cfg, "results": self.results, "diagnostics": self.diagnostics });
                serde_json::to_string_pretty(&doc)? + "\n"
            }
        };
        match &cfg.run.output_path {
            Some(p) => std::fs::write(p, text)?,
            None => print!("{text}"),
        }
        Ok(())
    }
}

pub fn epsilon(cfg: &RunConfig, deltas: Option<Vec<f64>>, s_values: Option<Vec<f64>>) -> Result<Output> {
    let bath = cfg.bath();
    let wc = bath.omega_c;
    let deltas = deltas.unwrap_or_else(|| [1.0, 10.0, 100.0, 1000.0].iter().map(|x| x / wc).collect());
    let s_values = s_values.unwrap_or_else(|| vec![bath.s]);
    let mut csv = String::from("s,delta,delta_omega_c,epsilon\n");
    let mut rows = Vec::new();
    for &s in &s_values {
        for &d in &deltas {
            let eps = epsilon_of(&BathSpec { s, ..bath }, d)?;
            writeln!(csv, "{s:?},{d:?},{:?},{eps:?}", d * wc)?;
            rows.push(json!({ "s": s, "delta": d, "delta_omega_c": d * wc, "epsilon": eps }));
        }
    }
    Ok(Output::new(csv, json!({ "rows": rows }), json!({ "points": rows.len() })))
}

fn check_rho(history: &str, rho: &[[num_complex::Complex64; 2]; 2]) -> Result<()> {
    let herm = (rho[0][1] - rho[1][0].conj()).norm().max(rho[0][0].im.abs()).max(rho[1][1].im.abs());
    let trace = (rho[0][0].re + rho[1][1].re - 1.0).abs();
    let det = rho[0][0].re * rho[1][1].re - rho[0][1].norm_sqr();
    if herm > 1e-8 || trace > 1e-8 || det < -1e-8 || rho[0][0].re < -1e-8 || rho[1][1].re < -1e-8 {
        bail!("density matrix of history {history} is not a valid state: {rho:?}");
    }
    Ok(())
}

fn check_probability(history: &str, p: f64) -> Result<f64> {
    if !(-1e-12..=1.0 + 1e-12).contains(&p) {
        bail!("history {history} has probability {p} outside [0, 1]");
    }
    Ok(p.clamp(0.0, 1.0))
}

pub fn histories(cfg: &RunConfig) -> Result<Output> {
    let setup = cfg.setup()?;
    let n = cfg.run.cycles;
    match cfg.run.mode {
        Mode::Exact => {
            let table = enumerate_histories(&setup, &setup.bath, n)?;
            let mut csv = String::from("history,probability,rho00,rho01_re,rho01_im,rho11\n");
            let mut rows = Vec::new();
            let mut residual = 0.0f64;
            for h in &table.histories {
                let name = h.history.to_string();
                let p = check_probability(&name, h.probability)?;
                residual = residual.max(h.imag_residual);
                match h.rho {
                    Some(r) => {
                        check_rho(&name, &r)?;
                        let (a, b, c) = (r[0][0].re, r[0][1], r[1][1].re);
                        writeln!(csv, "{name},{p:?},{a:?},{:?},{:?},{c:?}", b.re, b.im)?;
                        rows.push(json!({ "history": name, "probability": p, "rho": [[a, [b.re, b.im]], [[b.re, -b.im], c]] }));
                    }
                    None => {
                        writeln!(csv, "{name},{p:?},,,,")?;
                        rows.push(json!({ "history": name, "probability": p, "rho": null }));
                    }
                }
            }
            let diag = json!({
                "histories": table.histories.len(),
                "total_probability": table.total_probability(),
                "max_imag_residual": residual,
            });
            Ok(Output::new(csv, json!({ "cycles": n, "histories": rows }), diag))
        }
        Mode::Montecarlo => {
            let stats = sample_histories(&setup, &setup.bath, n, cfg.run.samples, cfg.run.seed)?;
            let mut csv = String::from("history,count,frequency,exact_probability\n");
            let mut rows = Vec::new();
            for ((h, count), exact) in stats.counts.iter().zip(&stats.exact) {
                let f = *count as f64 / stats.samples as f64;
                writeln!(csv, "{h},{count},{f:?},{exact:?}")?;
                rows.push(json!({ "history": h.to_string(), "count": count, "frequency": f, "exact_probability": exact }));
            }
            let diag = json!({ "samples": stats.samples, "seed": stats.seed });
            Ok(Output::new(csv, json!({ "cycles": n, "histories": rows }), diag))
        }
        Mode::Ope => bail!("mode ope does not apply to histories; use exact or montecarlo"),
    }
}

struct Series {
    rows: Vec<(usize, Option<f64>, Option<f64>)>,
    prediction: Option<CorrelationPrediction>,
    ope_error: Option<String>,
}

fn series(setup: &QecSetup, cfg: &RunConfig, qubit: usize, exact: bool) -> Result<Series> {
    if qubit >= setup.code.n {
        bail!("qubit {qubit} does not exist in a {}-qubit code", setup.code.n);
    }
    let (prediction, ope_error) = match predict_correlation(&setup.bath, &setup.schedule) {
        Ok(p) => (Some(p), None),
        Err(e) => (None, Some(e.to_string())),
    };
    let mut rows = Vec::new();
    for &d in &cfg.run.separations {
        let c = if exact { Some(connected_pair(setup, &setup.bath, d, qubit)?.connected) } else { None };
        let t = d as f64 * setup.schedule.delta;
        rows.push((d, c, prediction.map(|p| p.amplitude * t.powf(-p.decay_exponent))));
    }
    Ok(Series { rows, prediction, ope_error })
}

fn fit(s: &Series) -> Option<PowerLawFit> {
    let pts: Option<Vec<(f64, f64)>> = s.rows.iter().map(|r| r.1.map(|c| (r.0 as f64, c))).collect();
    pts.and_then(|p| fit_decay_exponent(&p).ok())
}

fn cell(v: Option<f64>) -> String {
    v.map_or(String::new(), |x| format!("{x:?}"))
}

pub fn correlations(cfg: &RunConfig, qubit: usize) -> Result<Output> {
    let setup = cfg.setup()?;
    let exact = match cfg.run.mode {
        Mode::Exact => true,
        Mode::Ope => false,
        Mode::Montecarlo => bail!("correlations support modes exact and ope"),
    };
    let s = series(&setup, cfg, qubit, exact)?;
    let delta = setup.schedule.delta;
    let wc = setup.bath.omega_c;
    let mut csv = String::from("separation,separation_time,separation_omega_c,exact_connected,ope_predicted\n");
    let mut rows = Vec::new();
    for &(d, c, p) in &s.rows {
        let t = d as f64 * delta;
        writeln!(csv, "{d},{t:?},{:?},{},{}", t * wc, cell(c), cell(p))?;
        rows.push(json!({ "separation": d, "separation_time": t, "separation_omega_c": t * wc,
                          "exact_connected": c, "ope_predicted": p }));
    }
    let results = json!({ "qubit": qubit, "rows": rows, "fit": fit(&s), "prediction": s.prediction });
    Ok(Output::new(csv, results, json!({ "ope_error": s.ope_error })))
}

pub fn decay_fit(cfg: &RunConfig, qubit: usize) -> Result<Output> {
    let base = cfg.setup()?;
    let mut csv = String::from("pulses_per_cycle,exponent,uncertainty,amplitude,r_squared,predicted_exponent\n");
    let mut fits = Vec::new();
    for pulses in [0usize, 1] {
        let sched = match pulses {
            0 => CycleSchedule::unpulsed(cfg.run.delta)?,
            _ => CycleSchedule::midpoint(cfg.run.delta)?,
        };
        let setup = base.clone().with_schedule(sched);
        let s = series(&setup, cfg, qubit, true)?;
        let f = fit(&s).ok_or_else(|| anyhow::anyhow!("power-law fit failed; need 4 positive points"))?;
        let p = s.prediction.map(|p| p.decay_exponent);
        writeln!(csv, "{pulses},{:?},{:?},{:?},{:?},{}", f.exponent, f.uncertainty, f.amplitude, f.r_squared, cell(p))?;
        fits.push(json!({ "pulses_per_cycle": pulses, "fit": f, "predicted_exponent": p }));
    }
    Ok(Output::new(csv, json!({ "qubit": qubit, "fits": fits }), json!({ "separations": cfg.run.separations })))
}

pub fn validate(cfg: &RunConfig) -> Result<Output> {
    let report = run_validation(&cfg.bath(), cfg.run.delta)?;
    let mut csv = String::from("check,passed,discrepancy,tolerance,detail\n");
    for c in &report.checks {
        writeln!(csv, "{},{},{:?},{:?},\"{}\"", c.name, c.passed, c.discrepancy, c.tolerance, c.detail.replace('"', "'"))?;
    }
    let passed = report.all_passed();
    let mut out = Output::new(csv, serde_json::to_value(&report)?, json!({ "all_passed": passed }));
    out.success = passed;
    Ok(out)
}

pub fn partition(_cfg: &RunConfig) -> Result<Output> {
    let part = StabilizerCode::three_qubit().coset_partition()?;
    let classes: Vec<Value> = part
        .ordered()
        .iter()
        .map(|c| {
            json!({ "coset": c.elements.iter().map(|e| e.to_string()).collect::<Vec<_>>(),
                    "recovery": c.recovery.to_string() })
        })
        .collect();
    Ok(Output::new(part.table(), json!({ "classes": classes }), json!({ "classes": classes.len() })))
}
