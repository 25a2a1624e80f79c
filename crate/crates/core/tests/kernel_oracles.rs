use num_complex::Complex64 as C64;
use transeig::kernel::{self, KernelConfig};
use transeig::{GridSpec, Potential};

/// Kernel for `q ≡ c` in characteristic coordinates as a power series:
/// `H = (c/2) Σ_k c^k [u^{k+1} v^k − u^k v^{k+1}] / ((k+1)! k!)`.
fn const_kernel(c: f64, u: f64, v: f64) -> (f64, f64, f64) {
    let (mut h, mut hu, mut hv) = (0.0, 0.0, 0.0);
    let mut ck = 1.0;
    let mut fact_k = 1.0;
    for k in 0..40 {
        let kf = k as f64;
        let denom = fact_k * fact_k * (kf + 1.0);
        let uk = u.powi(k);
        let vk = v.powi(k);
        h += ck * (uk * u * vk - uk * vk * v) / denom;
        // ∂u and ∂v of the bracket
        let du = (kf + 1.0) * uk * vk - if k > 0 { kf * u.powi(k - 1) * vk * v } else { 0.0 };
        let dv = if k > 0 { kf * uk * u * v.powi(k - 1) } else { 0.0 } - (kf + 1.0) * uk * vk;
        hu += ck * du / denom;
        hv += ck * dv / denom;
        ck *= c;
        fact_k *= kf + 1.0;
    }
    (0.5 * c * h, 0.5 * c * hu, 0.5 * c * hv)
}

fn cauchy_error(c: f64, n: usize) -> f64 {
    let q = Potential::constant(n, c).unwrap();
    let cd = kernel::cauchy_data_for(&q, n, KernelConfig::default()).unwrap();
    let mut err: f64 = 0.0;
    for j in 0..=n {
        let t = j as f64 / n as f64;
        let (u, v) = ((1.0 + t) / 2.0, (1.0 - t) / 2.0);
        let (_, hu, hv) = const_kernel(c, u, v);
        err = err.max((cd.w0.values[j] - C64::new(0.5 * (hu - hv), 0.0)).norm());
        err = err.max((cd.w1.values[j] - C64::new(0.5 * (hu + hv), 0.0)).norm());
    }
    err
}

#[test]
fn constant_potential_kernel_matches_series() {
    let c = 3.0;
    let n = 80;
    let q = Potential::constant(n, c).unwrap();
    let k = kernel::solve_kernel(&q, GridSpec::unit(n).unwrap(), KernelConfig::default()).unwrap();
    let mut err: f64 = 0.0;
    for i in 0..=n {
        for j in -(i as i64)..=(i as i64) {
            let (x, t) = (i as f64 / n as f64, j as f64 / n as f64);
            let (h, _, _) = const_kernel(c, (x + t) / 2.0, (x - t) / 2.0);
            err = err.max((k.value(i, j).re - h).abs());
        }
    }
    assert!(err < 1e-4, "kernel error {err}");
}

#[test]
fn cauchy_data_converges_at_second_order() {
    let e1 = cauchy_error(3.0, 40);
    let e2 = cauchy_error(3.0, 80);
    let ratio = e1 / e2;
    assert!(e2 < 1e-3, "error {e2}");
    assert!((ratio - 4.0).abs() < 0.5, "ratio {ratio}");
}

#[test]
fn richardson_improves_cauchy_data() {
    let n = 40;
    let c = 3.0;
    let q = Potential::constant(2 * n, c).unwrap();
    let cd = kernel::cauchy_data_extrapolated(&q, n, KernelConfig::default()).unwrap();
    let mut err: f64 = 0.0;
    for j in 0..=n {
        let t = j as f64 / n as f64;
        let (_, hu, hv) = const_kernel(c, (1.0 + t) / 2.0, (1.0 - t) / 2.0);
        err = err.max((cd.w0.values[j].re - 0.5 * (hu - hv)).abs());
        err = err.max((cd.w1.values[j].re - 0.5 * (hu + hv)).abs());
    }
    assert!(err < 0.05 * cauchy_error(c, n), "extrapolated error {err}");
}

#[test]
fn cauchy_endpoint_identity_is_exact() {
    let q = Potential::from_real_fn(60, |x| (2.0 * x).sin() - 0.3).unwrap();
    let cd = kernel::cauchy_data_for(&q, 60, KernelConfig::default()).unwrap();
    assert!((cd.eta() - q.endpoint() / 4.0).norm() < 1e-13);
}

#[test]
fn goursat_residual_is_second_order() {
    let res = |n: usize| {
        let q = Potential::from_real_fn(2 * n, |x| (std::f64::consts::PI * x).cos()).unwrap();
        let k = kernel::solve_kernel(&q, GridSpec::unit(n).unwrap(), KernelConfig::default()).unwrap();
        kernel::goursat_residual(&k, &q)
    };
    let ratio = res(50) / res(100);
    assert!((ratio - 4.0).abs() < 0.6, "ratio {ratio}");
}
