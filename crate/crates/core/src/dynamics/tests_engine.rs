use num_complex::Complex64;

use super::*;
use crate::bath::{epsilon, BathSpec};
use crate::pauli::PauliOperator;
use crate::vertex::EngineOptions;

fn far_setup(lambda: f64) -> QecSetup {
    QecSetup::three_qubit(BathSpec::ohmic(lambda, 100.0), 1.0, 1e6).unwrap()
}

fn error_syndrome(setup: &QecSetup, j: usize) -> Syndrome {
    setup.code.syndrome_of(&PauliOperator::z(3, j).unwrap()).unwrap()
}

#[test]
fn single_cycle_probabilities_closed_form() {
    let setup = far_setup(0.1);
    let eps = epsilon(&setup.bath, 1.0).unwrap();
    let t = enumerate_histories(&setup, &setup.bath, 1).unwrap();
    assert_eq!(t.histories.len(), 4);
    let e2 = (-2.0 * eps).exp();
    let triv = t.get(&SyndromeHistory::new(vec![Syndrome::trivial(2)])).unwrap();
    assert!((triv.probability - (1.0 + 3.0 * e2) / 4.0).abs() < 1e-12);
    for j in 0..3 {
        let h = SyndromeHistory::new(vec![error_syndrome(&setup, j)]);
        let r = t.get(&h).unwrap();
        assert!((r.probability - (1.0 - e2) / 4.0).abs() < 1e-12);
        let off = r.off_diagonal().unwrap() / 0.5;
        assert!((off - Complex64::new((-eps).exp(), 0.0)).norm() < 1e-10);
    }
    let e = (-eps).exp();
    let expected = (3.0 * e + e * e * e) / (1.0 + 3.0 * e2);
    assert!((triv.off_diagonal().unwrap() / 0.5 - expected).norm() < 1e-10);
}

#[test]
fn zero_coupling_is_trivial() {
    let mut setup = far_setup(0.0);
    setup.alpha = Complex64::new(0.6, 0.0);
    setup.beta = Complex64::new(0.0, 0.8);
    let t = enumerate_histories(&setup, &setup.bath, 2).unwrap();
    let first = &t.histories[0];
    assert_eq!(first.history.to_string(), "00-00");
    assert!((first.probability - 1.0).abs() < 1e-15);
    let off = first.off_diagonal().unwrap();
    assert!((off - setup.alpha * setup.beta.conj()).norm() < 1e-15);
    assert!(t.histories[1..].iter().all(|h| h.probability.abs() < 1e-15));
}

#[test]
fn engine_matches_trig_expansion() {
    let bath = BathSpec { s: 0.7, lambda: 0.4, omega_c: 5.0, v_b: 1.0 };
    let mut setup = QecSetup::three_qubit(bath, 1.0, 0.6).unwrap().with_schedule(CycleSchedule::midpoint(1.0).unwrap());
    setup.coherent_coupling = false;
    let table = enumerate_histories(&setup, &bath, 2).unwrap();
    let opts = EngineOptions::default();
    for r in table.histories.iter().step_by(3) {
        let p = expansion_expectation(&setup, &bath, &r.history, 1.0, 1.0, &opts).unwrap();
        assert!((p.re - r.probability).abs() < 1e-12, "{}: {} vs {}", r.history, p, r.probability);
        let g = expansion_expectation(&setup, &bath, &r.history, -1.0, 1.0, &opts).unwrap();
        let off = r.off_diagonal().unwrap();
        assert!((g * 0.5 / r.probability - off).norm() < 1e-10);
    }
}

#[test]
fn logical_branches_have_equal_probability() {
    let bath = BathSpec { s: 1.0, lambda: 0.3, omega_c: 4.0, v_b: 1.0 };
    let setup = QecSetup::three_qubit(bath, 1.0, 0.3).unwrap();
    let e = HistoryEngine::new(&setup, &bath, 2).unwrap();
    let plus = e.branch_overlaps(false, false);
    let minus = e.branch_overlaps(true, true);
    for (a, b) in plus.iter().zip(&minus) {
        assert!((a - b).norm() < 1e-13);
    }
}

#[test]
fn completeness_and_density_matrices() {
    let bath = BathSpec { s: 1.0, lambda: 0.2, omega_c: 10.0, v_b: 1.0 };
    let mut setup = QecSetup::three_qubit(bath, 1.0, 0.5).unwrap();
    setup.alpha = Complex64::new(0.8, 0.0);
    setup.beta = Complex64::new(0.0, 0.6);
    let t = enumerate_histories(&setup, &bath, 3).unwrap();
    assert_eq!(t.histories.len(), 64);
    assert!((t.total_probability() - 1.0).abs() < 1e-10);
    for h in &t.histories {
        assert!(h.probability >= -1e-15 && h.probability <= 1.0);
        let r = h.rho.unwrap();
        assert_eq!(r[0][0].re, setup.alpha.norm_sqr());
        assert!((r[0][1] - r[1][0].conj()).norm() < 1e-15);
        assert!(r[0][1].norm() <= 0.48 + 1e-10);
    }
}

#[test]
fn memoryless_histories_factorize() {
    let bath = BathSpec { s: 1.0, lambda: 0.3, omega_c: 10.0, v_b: 1.0 };
    let mut setup = QecSetup::three_qubit(bath, 1.0, 0.5).unwrap();
    setup.memoryless = true;
    let one = enumerate_histories(&setup, &bath, 1).unwrap();
    let two = enumerate_histories(&setup, &bath, 2).unwrap();
    for h in &two.histories {
        let a = one.get(&SyndromeHistory::new(vec![h.history.syndromes[0]])).unwrap().probability;
        let b = one.get(&SyndromeHistory::new(vec![h.history.syndromes[1]])).unwrap().probability;
        assert!((h.probability - a * b).abs() < 1e-14);
    }
}

#[test]
fn marginal_pair_matches_enumeration() {
    let bath = BathSpec { s: 1.0, lambda: 0.3, omega_c: 10.0, v_b: 1.0 };
    let setup = QecSetup::three_qubit(bath, 1.0, 0.5).unwrap().with_schedule(CycleSchedule::midpoint(1.0).unwrap());
    let t = enumerate_histories(&setup, &bath, 3).unwrap();
    let sa = error_syndrome(&setup, 0);
    let sb = error_syndrome(&setup, 1);
    for d in [1usize, 2] {
        let mp = marginal_pair(&setup, &bath, d, &sa, &sb).unwrap();
        let marg = |pred: &dyn Fn(&SyndromeHistory) -> bool| {
            crate::summation::sum_real(t.histories.iter().filter(|h| pred(&h.history)).map(|h| h.probability))
        };
        let joint = marg(&|h| h.syndromes[0] == sa && h.syndromes[d] == sb);
        let first = marg(&|h| h.syndromes[0] == sa);
        let second = marg(&|h| h.syndromes[d] == sb);
        assert!((mp.p_joint - joint).abs() < 1e-13, "d={d}");
        assert!((mp.p_first - first).abs() < 1e-13);
        assert!((mp.p_second - second).abs() < 1e-13);
        assert!((mp.connected - (joint - first * second)).abs() < 1e-13);
    }
}

#[test]
fn correlations_positive_and_reduced_by_pulses() {
    let setup = far_setup(0.05);
    let pulsed = setup.clone().with_schedule(CycleSchedule::midpoint(1.0).unwrap());
    for d in [2usize, 4, 8] {
        let a = connected_pair(&setup, &setup.bath, d, 0).unwrap().connected;
        let b = connected_pair(&pulsed, &setup.bath, d, 0).unwrap().connected;
        assert!(a > 0.0 && b.abs() < a, "d={d}: {a} {b}");
    }
    let mut memoryless = setup.clone();
    memoryless.memoryless = true;
    assert_eq!(connected_pair(&memoryless, &setup.bath, 3, 0).unwrap().connected, 0.0);
}

#[test]
fn size_limit_names_the_limit() {
    let setup = far_setup(0.05);
    match enumerate_histories(&setup, &setup.bath, 7) {
        Err(crate::Error::Size(m)) => assert!(m.contains("2^24")),
        other => panic!("expected size error, got {other:?}"),
    }
}

#[test]
fn sampling_is_deterministic_and_unbiased() {
    let setup = far_setup(0.1);
    let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let three = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
    let a = one.install(|| sample_histories(&setup, &setup.bath, 1, 100_000, 42)).unwrap();
    let b = three.install(|| sample_histories(&setup, &setup.bath, 1, 100_000, 42)).unwrap();
    assert_eq!(a.counts, b.counts);
    let p = a.exact[0];
    let f = a.counts[0].1 as f64 / 1e5;
    assert!((f - p).abs() < 3.0 * (p * (1.0 - p) / 1e5).sqrt());

    let quiet = far_setup(0.0);
    let s = sample_histories(&quiet, &quiet.bath, 2, 1000, 1).unwrap();
    assert_eq!(s.counts[0].1, 1000);
}
