use std::f64::consts::PI;

use transeig::forward::{forward_spectrum, CharacteristicFn, ForwardConfig, Via};
use transeig::solvability::{check_theorem_b1, check_theorem_b2, check_theorem_b3, Theorem, Verdict};
use transeig::types::trapezoid;
use transeig::{Potential, SpectrumSeq, C64};

fn failing(r: &transeig::solvability::SolvabilityReport) -> Vec<&str> {
    r.conditions.iter().filter(|c| !c.pass).map(|c| c.name.as_str()).collect()
}

#[test]
fn forward_spectra_outside_the_unit_interval_are_solvable() {
    let cfg = ForwardConfig::default();
    for a in [-1.0, 2.0, 3.0] {
        let q = Potential::from_real_fn(200, |x| x + 0.5).unwrap();
        let s = forward_spectrum(&q, a, 80, Via::Kernel, &cfg).unwrap();
        let r = check_theorem_b2(&s, a).unwrap();
        assert_eq!(r.theorem, Theorem::B2);
        assert_eq!(r.verdict, Verdict::Pass, "a = {a}: {:?}", failing(&r));
        let mean = trapezoid(q.as_sampled()).unwrap().re;
        assert!((r.omega_est - mean).abs() < 0.05 * mean, "a = {a}: omega {}", r.omega_est);
        let d0 = CharacteristicFn::kernel(&q, a, &cfg).unwrap().eval(C64::new(0.0, 0.0)).unwrap();
        let g = r.gamma.unwrap();
        assert!((g - d0).norm() < 1e-3 * d0.norm(), "a = {a}: gamma {g} vs {d0}");
        assert!(r.w_reconstruction.is_real(1e-6));
    }
}

#[test]
fn shifted_entry_is_rejected() {
    let q = Potential::constant(200, 1.0).unwrap();
    let s = forward_spectrum(&q, 2.0, 80, Via::Kernel, &ForwardConfig::default()).unwrap();
    let idx: Vec<usize> = (0..s.len()).filter(|&i| s.almost_real[i]).collect();
    for which in [2usize, 10] {
        let mut t = s.clone();
        t.values[idx[which]] += 50.0;
        let r = check_theorem_b2(&t, 2.0).unwrap();
        assert_eq!(r.verdict, Verdict::Fail, "entry {which}");
        assert!(!failing(&r).is_empty());
    }
}

#[test]
fn nonreal_entry_breaks_the_unit_case() {
    let q = Potential::linear_centered(200).unwrap();
    let s = forward_spectrum(&q, 1.0, 300, Via::Kernel, &ForwardConfig::default()).unwrap();
    let r = check_theorem_b1(&s, -1.0).unwrap();
    assert_eq!(r.verdict, Verdict::Pass, "{:?}", failing(&r));
    assert!(r.omega_est.abs() < 1e-3);
    let mut t: SpectrumSeq = s.clone();
    t.values[3].im = 0.5;
    assert_eq!(check_theorem_b1(&t, -1.0).unwrap().verdict, Verdict::Fail);
}

#[test]
fn forward_spectrum_inside_the_unit_interval() {
    let q = Potential::linear_centered(200).unwrap();
    let s = forward_spectrum(&q, 0.5, 60, Via::Kernel, &ForwardConfig::default()).unwrap();
    let r = check_theorem_b3(&s, 0.5, 0).unwrap();
    assert_eq!(r.theorem, Theorem::B3);
    assert_eq!(r.verdict, Verdict::Pass, "{:?}", failing(&r));
    assert!(r.omega_est.abs() < 1e-2);
}

#[test]
fn free_lattice_inside_the_unit_interval() {
    let values = (1..=60).map(|k| C64::new((2.0 * PI * k as f64).powi(2), 0.0)).collect();
    let s = SpectrumSeq::general(0.5, 1, values);
    let r = check_theorem_b3(&s, 0.5, 0).unwrap();
    assert_eq!(r.verdict, Verdict::Pass, "{:?}", failing(&r));
}
