//! End-to-end criteria. Each test writes one `criterion N: PASS|FAIL` line
//! straight to stdout so the summary survives output capture.

use std::f64::consts::PI;
use std::io::Write;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use transeig::charfn::IntegralCharFn;
use transeig::forward::{self, CharacteristicFn, ForwardConfig, Via};
use transeig::inverse::{self, InverseConfig};
use transeig::regularity::{self, ClassifyConfig, Regularity};
use transeig::solvability::{self, AuxiliaryPair, Verdict};
use transeig::types::{trapezoid, w21_distance};
use transeig::zeros::ZeroConfig;
use transeig::{Error, GridSpec, Potential, SampledFn, SpectrumKind, SpectrumSeq, C64};

fn report(n: u32, ok: bool, detail: &str) {
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "criterion {n:2}: {} {detail}", if ok { "PASS" } else { "FAIL" });
    assert!(ok, "criterion {n}: {detail}");
}

fn rel(a: C64, b: C64) -> f64 {
    (a - b).norm() / b.norm().max(1e-300)
}

fn quarter_lattice(top: i64) -> SpectrumSeq {
    SpectrumSeq::new(SpectrumKind::TransmissionA1, 2, (2..=top).map(|k| C64::new((PI * k as f64).powi(2) / 4.0, 0.0)).collect())
}

fn real(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// Auxiliary pair reconstructed from the quarter lattice and `η̃`, with the
/// sup-norm errors of `ṽ, w̃, w̃₀, w̃₁` against their closed forms.
fn example_one(s: &SpectrumSeq, eta: f64) -> (AuxiliaryPair, [f64; 4]) {
    let p = inverse::product_for(s, real(eta), None, 0.25).unwrap();
    let g = GridSpec::new(4000, 0.0, 2.0).unwrap();
    let v = inverse::recover_v_from(&p, g, 2000).unwrap().v;
    let w = inverse::assemble_w(&v, real(eta));
    let cd = inverse::split_cauchy(&w).unwrap();
    let errs = [
        v.sup_dist(|x| real(-PI * eta / 2.0 * (PI * x / 2.0).sin())),
        w.sup_dist(|x| real(-eta * (PI * x / 2.0).cos())),
        cd.w0.sup_norm(),
        cd.w1.sup_dist(|x| real(2.0 * eta * (PI * x / 2.0).sin())),
    ];
    let omega = IntegralCharFn::delta0(cd.w0.clone(), C64::new(0.0, 0.0)).unwrap().density_integral() * 2.0;
    (AuxiliaryPair::new(cd.w0, cd.w1, omega).unwrap(), errs)
}

#[test]
fn c01_example_one_closed_forms() {
    let t = Instant::now();
    let s = quarter_lattice(2000);
    let mut worst = (0.0f64, 0.0f64);
    for eta in [1.0, PI * PI / 8.0] {
        let (pair, errs) = example_one(&s, eta);
        worst.0 = errs.iter().fold(worst.0, |m, &e| m.max(e));
        let (z0, z1) = pair.zeros(20, &ZeroConfig::default()).unwrap();
        let mut want1: Vec<f64> = (2..=20).map(|k| (PI * (k as f64 - 0.5)).powi(2)).collect();
        want1.push(PI * PI / 4.0 + 2.0 * eta);
        want1.sort_by(f64::total_cmp);
        for (k, z) in (1..).zip(&z0.values) {
            worst.1 = worst.1.max(rel(*z, real(PI * PI * (k * k) as f64)));
        }
        for (z, w) in z1.values.iter().zip(&want1) {
            worst.1 = worst.1.max(rel(*z, real(*w)));
        }
        assert_eq!((z0.len(), z1.len()), (20, 20));
    }
    let el = t.elapsed();
    let ok = worst.0 < 1e-6 && worst.1 < 1e-6 && el <= Duration::from_secs(60);
    report(1, ok, &format!("sup err {:.2e}, zero rel err {:.2e}, {:.1?}", worst.0, worst.1, el));
}

#[test]
fn c02_interlacing_threshold() {
    let s = quarter_lattice(2000);
    let (pair, _) = example_one(&s, PI * PI / 8.0);
    let below = pair.check(20, &ZeroConfig::default()).unwrap();
    let (pair, _) = example_one(&s, 3.0 * PI * PI / 8.0);
    let tie = pair.check(20, &ZeroConfig::default()).unwrap();
    // the same threshold through the scale family: γ = −8η/π²
    let b1 = solvability::check_theorem_b1(&quarter_lattice(401), -3.0).unwrap();
    let probe = b1.gamma_scan.first().copied().unwrap();
    let ok = below.interlacing.ok && !tie.interlacing.ok && probe.gamma == -3.0 && !probe.interlace_ok;
    report(
        2,
        ok,
        &format!(
            "pi^2/8 margin {:.3}; 3pi^2/8 interlaces={} (first-pair rel gap {:.1e}); scale probe interlaces={}",
            below.interlacing.margin,
            tie.interlacing.ok,
            (tie.zeros1.values[0] - tie.zeros0.values[0]).norm() / (PI * PI),
            probe.interlace_ok
        ),
    );
}

#[test]
fn c03_degenerate_case() {
    let q = Potential::zero(200).unwrap();
    let r = forward::forward_spectrum(&q, 1.0, 10, Via::Kernel, &ForwardConfig::default());
    let ok = matches!(r.as_ref().map_err(Error::root), Err(Error::DegenerateSpectrum));
    report(3, ok, &format!("{:?}", r.err()));
}

#[test]
fn c04_zero_potential_lattices() {
    let t = Instant::now();
    let q = Potential::zero(200).unwrap();
    let mut worst = 0.0f64;
    for (a, scale) in [(0.5, 4.0), (2.0, 1.0)] {
        let s = forward::forward_spectrum(&q, a, 8, Via::Kernel, &ForwardConfig::default()).unwrap();
        let lat: Vec<C64> = s.values.iter().zip(&s.almost_real).filter(|p| *p.1).map(|p| *p.0).collect();
        assert!(lat.len() >= 8);
        for (n, v) in (1..=8).zip(&lat) {
            worst = worst.max(rel(*v, real(scale * (PI * n as f64).powi(2))));
        }
    }
    let el = t.elapsed();
    report(4, worst < 1e-8 && el <= Duration::from_secs(10), &format!("rel err {worst:.2e}, {el:.1?}"));
}

#[test]
fn c05_asymptotics() {
    let q = Potential::linear_centered(400).unwrap();
    let s = forward::forward_spectrum(&q, 1.0, 30, Via::Kernel, &ForwardConfig::default()).unwrap();
    let share = transeig::types::l2_tail_share(&s.asymptotic_residuals(C64::new(0.0, 0.0)));
    report(5, s.len() == 30 && share < 0.1, &format!("{} eigenvalues, tail share {share:.3}", s.len()));
}

#[test]
fn c06_round_trip() {
    let t = Instant::now();
    let q = Potential::linear_centered(400).unwrap();
    let s = forward::forward_spectrum(&q, 1.0, 40, Via::Kernel, &ForwardConfig::default()).unwrap();
    let cfg = InverseConfig::default();
    assert_eq!((cfg.n, cfg.residual_count), (400, 14));
    let r = inverse::run_algorithm1(&s, q.eta(), &cfg).unwrap();
    let d = w21_distance(&q, &r.q_tilde).unwrap();
    let el = t.elapsed();
    let ok = d <= 1e-2 && r.residual_spectrum <= 1e-3 && r.eta_check.norm() <= 1e-4 && el <= Duration::from_secs(300);
    report(
        6,
        ok,
        &format!("W21 {d:.2e}, re-forward k=2..15 {:.2e}, |q(1)-4eta| {:.1e}, {el:.1?}", r.residual_spectrum, r.eta_check.norm()),
    );
}

#[test]
fn c07_stability_ratios() {
    let q = Potential::linear_centered(400).unwrap();
    let s = forward::forward_spectrum(&q, 1.0, 40, Via::Kernel, &ForwardConfig::default()).unwrap();
    let runs = inverse::stability_study(&q, &s, &[1e-3, 1e-2], 5, 2024, &InverseConfig::default()).unwrap();
    let mut ratios: Vec<f64> = runs.iter().map(|r| r.ratio).collect();
    ratios.sort_by(f64::total_cmp);
    let median = (ratios[4] + ratios[5]) / 2.0;
    let spread = ratios.iter().map(|r| (r / median).max(median / r)).fold(0.0, f64::max);
    let ok = runs.len() == 10 && spread <= 3.0;
    report(7, ok, &format!("median ratio {median:.3}, max factor {spread:.2}"));
}

#[test]
fn c08_regularity_triple() {
    let lin = Potential::linear_centered(400).unwrap();
    let zero = Potential::zero(400).unwrap();
    let cfg = ClassifyConfig::default();
    let b = regularity::classify(&lin, -0.5, &cfg).unwrap();
    let i = regularity::classify(&zero, 2.0, &cfg).unwrap();
    let st = regularity::classify(&lin, 1.0, &cfg).unwrap();
    let th_b = b.theta_hat.unwrap_or(f64::NAN);
    let rate = i.exp_rate.unwrap_or(f64::NAN);
    let th_s = st.theta_hat.unwrap_or(f64::NAN);
    let ok = matches!(b.class, Regularity::BirkhoffRegular { .. })
        && (-0.7..=-0.3).contains(&th_b)
        && matches!(i.class, Regularity::Irregular { .. })
        && (0.5..=2.0).contains(&rate)
        && matches!(st.class, Regularity::StoneRegular { .. })
        && (0.3..=0.7).contains(&th_s);
    report(
        8,
        ok,
        &format!(
            "a=-1/2 {} theta {th_b:.3}; a=2 {} rate {rate:.3}; a=1 {} theta {th_s:.3}",
            b.class.name(),
            i.class.name(),
            st.class.name()
        ),
    );
}

#[test]
fn c09_nevanlinna_interlacing_equivalence() {
    let g = GridSpec::unit(200).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let series = |c: &[f64]| SampledFn::from_fn(g, |x| real(c.iter().enumerate().map(|(j, a)| a * (j as f64 * PI * x).cos()).sum()));
    let (mut agree, mut pass) = (0, 0);
    for _ in 0..20 {
        let c0: Vec<f64> = (0..4).map(|_| rng.gen_range(-20.0..20.0)).collect();
        let c1: Vec<f64> = (0..4).map(|_| rng.gen_range(-20.0..20.0)).collect();
        // Δ₀ is entire only when ω = 2∫w₀
        let pair = AuxiliaryPair::new(series(&c0), series(&c1), real(2.0 * c0[0])).unwrap();
        let r = pair.check(20, &ZeroConfig::default()).unwrap();
        agree += (r.interlacing.ok == r.nevanlinna.ok) as usize;
        pass += r.interlacing.ok as usize;
    }
    let ok = agree == 20 && pass > 0 && pass < 20;
    report(9, ok, &format!("{agree}/20 agree, {pass} interlace"));
}

#[test]
fn c10_theorem_b2_self_consistency() {
    let fcfg = ForwardConfig::default();
    let mut lines = Vec::new();
    let mut ok = true;
    for (a, name, q) in [
        (-1.0, "1", Potential::constant(200, 1.0).unwrap()),
        (-1.0, "x+1/2", Potential::from_real_fn(200, |x| x + 0.5).unwrap()),
        (2.0, "1", Potential::constant(200, 1.0).unwrap()),
        (2.0, "x+1/2", Potential::from_real_fn(200, |x| x + 0.5).unwrap()),
    ] {
        let s = forward::forward_spectrum(&q, a, 80, Via::Kernel, &fcfg).unwrap();
        let r = solvability::check_theorem_b2(&s, a).unwrap();
        let mean = trapezoid(q.as_sampled()).unwrap().re;
        let d0 = CharacteristicFn::kernel(&q, a, &fcfg).unwrap().eval(C64::new(0.0, 0.0)).unwrap();
        let om = (r.omega_est - mean).abs() / mean.abs();
        let ga = r.gamma.map(|g| rel(g, d0)).unwrap_or(f64::INFINITY);
        ok &= r.verdict == Verdict::Pass && om <= 0.05 && ga <= 1e-3;
        lines.push(format!("a={a} q={name} {:?} omega {om:.1e} gamma {ga:.1e}", r.verdict));
    }
    report(10, ok, &lines.join("; "));
}

#[test]
fn c11_dual_path_oracle() {
    let cfg = ForwardConfig { shoot_steps: 16000, ..Default::default() };
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let lambdas: Vec<C64> = (0..20).map(|_| C64::new(rng.gen_range(-50.0..400.0), rng.gen_range(-40.0..40.0))).collect();
    let mut worst = 0.0f64;
    for q in [Potential::zero(200).unwrap(), Potential::constant(200, 1.0).unwrap(), Potential::linear_centered(200).unwrap()] {
        for a in [0.0, 0.5, 1.0, 2.0] {
            for (k, s, scale) in forward::dual_path_values(&q, a, &lambdas, &cfg).unwrap() {
                worst = worst.max((k - s).norm() / scale.max(s.norm()));
            }
        }
    }
    report(11, worst < 1e-6, &format!("max rel diff {worst:.2e} over 240 evaluations"));
}
