use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use transeig::forward::{self, ForwardConfig, Via};
use transeig::{Potential, SpectrumKind};

#[test]
fn linear_potential_spectrum_agrees_across_paths() {
    let q = Potential::linear_centered(200).unwrap();
    let cfg = ForwardConfig { shoot_steps: 16000, ..Default::default() };
    let t = std::time::Instant::now();
    let sk = forward::forward_spectrum(&q, 1.0, 30, Via::Kernel, &cfg).unwrap();
    println!("kernel {:?}", t.elapsed());
    let t = std::time::Instant::now();
    let ss = forward::forward_spectrum(&q, 1.0, 30, Via::Shooting, &cfg).unwrap();
    println!("shooting {:?}", t.elapsed());
    assert_eq!(sk.kind, SpectrumKind::TransmissionA1);
    assert_eq!(sk.start_index, 2);
    for ((k, a), b) in sk.indices().zip(&sk.values).zip(&ss.values) {
        println!("{k} {a} {} {}", b, (a - C64::new((PI * k as f64).powi(2) / 4.0, 0.0)));
        assert!((a - b).norm() < 1e-6 * b.norm(), "k = {k}: {a} vs {b}");
    }
    assert!(sk.passes_l2_heuristic(C64::new(0.0, 0.0)));
}
