//! Quadrature on uniform grids, including exact integration of
//! piecewise-linear interpolants against oscillatory exponentials.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

pub fn interp_linear(values: &[C64], a: f64, h: f64, x: f64) -> C64 {
    let n = values.len() - 1;
    let s = ((x - a) / h).clamp(0.0, n as f64);
    let i = (s.floor() as usize).min(n.saturating_sub(1));
    let frac = s - i as f64;
    if n == 0 {
        return values[0];
    }
    values[i] * (1.0 - frac) + values[i + 1] * frac
}

pub fn trapezoid(values: &[C64], h: f64) -> Result<C64> {
    match values {
        [] => Err(Error::InvalidInput("trapezoid of an empty sample sequence".into())),
        [_] => Ok(ZERO),
        [first, inner @ .., last] => Ok(h * ((first + last) * 0.5 + inner.iter().sum::<C64>())),
    }
}

/// `out[i] = ∫_{x_0}^{x_i} f` by the trapezoid rule.
pub fn cumulative_trapezoid(values: &[C64], h: f64) -> Vec<C64> {
    let mut out = Vec::with_capacity(values.len());
    let mut acc = ZERO;
    out.push(acc);
    for w in values.windows(2) {
        acc += (w[0] + w[1]) * (0.5 * h);
        out.push(acc);
    }
    out
}

/// `out[i] = ∫_{x_i}^{x_n} f` by the trapezoid rule.
pub fn cumulative_trapezoid_from_right(values: &[C64], h: f64) -> Vec<C64> {
    let n = values.len();
    let mut out = vec![ZERO; n];
    let mut acc = ZERO;
    for i in (0..n.saturating_sub(1)).rev() {
        acc += (values[i] + values[i + 1]) * (0.5 * h);
        out[i] = acc;
    }
    out
}

/// `out[i] = ∫_{x_0}^{x_i} f` with fourth-order accuracy: Simpson on even
/// prefixes, Simpson plus a three-eighths panel on odd ones.
pub fn cumulative_simpson(values: &[C64], h: f64) -> Vec<C64> {
    let n = values.len();
    let mut even = vec![ZERO; n];
    for i in (2..n).step_by(2) {
        even[i] = even[i - 2] + (values[i - 2] + values[i - 1] * 4.0 + values[i]) * (h / 3.0);
    }
    let mut out = even.clone();
    for i in (1..n).step_by(2) {
        out[i] = if i >= 3 {
            even[i - 3]
                + (values[i - 3] + values[i - 2] * 3.0 + values[i - 1] * 3.0 + values[i]) * (3.0 * h / 8.0)
        } else if n > 2 {
            (values[0] * 5.0 + values[1] * 8.0 - values[2]) * (h / 12.0)
        } else {
            (values[0] + values[1]) * (0.5 * h)
        };
    }
    out
}

/// Central differences inside, second-order one-sided at the ends.
pub fn derivative(values: &[C64], h: f64) -> Vec<C64> {
    let n = values.len();
    if n < 3 {
        return match n {
            2 => vec![(values[1] - values[0]) / h; 2],
            _ => vec![ZERO; n],
        };
    }
    let mut d = vec![ZERO; n];
    d[0] = (values[0] * -3.0 + values[1] * 4.0 - values[2]) / (2.0 * h);
    d[n - 1] = (values[n - 1] * 3.0 - values[n - 2] * 4.0 + values[n - 3]) / (2.0 * h);
    for i in 1..n - 1 {
        d[i] = (values[i + 1] - values[i - 1]) / (2.0 * h);
    }
    d
}

/// `(∫₀¹ e^{θs} ds, ∫₀¹ s e^{θs} ds)`.
fn panel_moments(theta: C64) -> (C64, C64) {
    if theta.norm() < 0.5 {
        let mut e1 = ZERO;
        let mut e2 = ZERO;
        let mut pow = C64::new(1.0, 0.0);
        let mut fact = 1.0;
        for k in 0..24 {
            e1 += pow / (fact * (k as f64 + 1.0));
            e2 += pow / (fact * (k as f64 + 2.0));
            fact *= k as f64 + 1.0;
            pow *= theta;
        }
        (e1, e2)
    } else {
        let e = theta.exp();
        ((e - 1.0) / theta, (e * (theta - 1.0) + 1.0) / (theta * theta))
    }
}

/// Exact `∫ f(t) e^{κt} dt` for the piecewise-linear interpolant of `values`
/// on the grid `t_j = t0 + j h`.
pub fn exp_integral(values: &[C64], t0: f64, h: f64, kappa: C64) -> C64 {
    let n = values.len();
    if n < 2 {
        return ZERO;
    }
    let (e1, e2) = panel_moments(kappa * h);
    let lead = e1 - e2;
    let mut acc = ZERO;
    for j in 0..n - 1 {
        let t = t0 + j as f64 * h;
        let phase = (kappa * t).exp();
        acc += phase * (values[j] * lead + values[j + 1] * e2);
    }
    acc * h
}

/// `J_k = ∫₀² s^k e^{θs} ds` for `k = 0, 1, 2`.
fn double_panel_moments(theta: C64) -> [C64; 3] {
    if theta.norm() < 1.0 {
        let mut j = [ZERO; 3];
        let mut term = C64::new(1.0, 0.0);
        for m in 0..40 {
            let mf = m as f64;
            for (k, slot) in j.iter_mut().enumerate() {
                let p = mf + k as f64 + 1.0;
                *slot += term * (2f64.powf(p) / p);
            }
            term *= theta / (mf + 1.0);
        }
        j
    } else {
        let e = (theta * 2.0).exp();
        let j0 = (e - 1.0) / theta;
        let j1 = (e * 2.0 - j0) / theta;
        let j2 = (e * 4.0 - j1 * 2.0) / theta;
        [j0, j1, j2]
    }
}

/// Exact `∫ f(t) e^{κt} dt` for the piecewise-quadratic interpolant on
/// consecutive panel pairs; needs an even number of intervals.
pub fn exp_integral_quadratic(values: &[C64], t0: f64, h: f64, kappa: C64) -> C64 {
    let n = values.len().saturating_sub(1);
    debug_assert!(n.is_multiple_of(2));
    let [j0, j1, j2] = double_panel_moments(kappa * h);
    let w0 = (j2 - j1 * 3.0 + j0 * 2.0) * 0.5;
    let w1 = -(j2 - j1 * 2.0);
    let w2 = (j2 - j1) * 0.5;
    let mut acc = ZERO;
    for p in 0..n / 2 {
        let j = 2 * p;
        let phase = (kappa * (t0 + j as f64 * h)).exp();
        acc += phase * (values[j] * w0 + values[j + 1] * w1 + values[j + 2] * w2);
    }
    acc * h
}

/// Composite Simpson rule; needs an even number of intervals.
pub fn simpson(values: &[C64], h: f64) -> Result<C64> {
    let n = values.len().saturating_sub(1);
    if values.is_empty() || !n.is_multiple_of(2) {
        return Err(Error::InvalidInput("Simpson needs an even number of intervals".into()));
    }
    let mut acc = ZERO;
    for p in 0..n / 2 {
        let j = 2 * p;
        acc += values[j] + values[j + 1] * 4.0 + values[j + 2];
    }
    Ok(acc * (h / 3.0))
}

/// Moments `∫ f(t) t^k dt`, `k = 0..=kmax`, of the piecewise-quadratic
/// interpolant, from expansions about each panel-pair midpoint.
pub fn power_moments_quadratic(values: &[C64], t0: f64, h: f64, kmax: usize) -> Vec<C64> {
    let n = values.len().saturating_sub(1);
    let mut out = vec![ZERO; kmax + 1];
    let mut binom = vec![vec![0.0; kmax + 1]; kmax + 1];
    for k in 0..=kmax {
        binom[k][0] = 1.0;
        for i in 1..=k {
            binom[k][i] = binom[k - 1][i - 1] + if i < k { binom[k - 1][i] } else { 0.0 };
        }
    }
    // ∫_{-h}^{h} u^e du
    let upow = |e: usize| if e % 2 == 1 { 0.0 } else { 2.0 * h.powi(e as i32 + 1) / (e as f64 + 1.0) };
    for p in 0..n / 2 {
        let j = 2 * p;
        let m = t0 + (j + 1) as f64 * h;
        let (f0, f1, f2) = (values[j], values[j + 1], values[j + 2]);
        // f = α + β u + γ u², u = t − m
        let alpha = f1;
        let beta = (f2 - f0) / (2.0 * h);
        let gamma = (f2 - f1 * 2.0 + f0) / (2.0 * h * h);
        for (k, slot) in out.iter_mut().enumerate() {
            let mut acc = ZERO;
            for i in 0..=k {
                let mk = binom[k][i] * m.powi((k - i) as i32);
                acc += (alpha * upow(i) + beta * upow(i + 1) + gamma * upow(i + 2)) * mk;
            }
            *slot += acc;
        }
    }
    out
}

/// `(∫ f cos ρt, ∫ f sin ρt)` for the piecewise-linear interpolant.
pub fn cos_sin_integrals(values: &[C64], t0: f64, h: f64, rho: C64) -> (C64, C64) {
    let i = C64::new(0.0, 1.0);
    let plus = exp_integral(values, t0, h, i * rho);
    let minus = exp_integral(values, t0, h, -(i * rho));
    ((plus + minus) * 0.5, (plus - minus) / (2.0 * i))
}

/// Exact moments `∫ f(t) t^k dt`, `k = 0..=kmax`, of the piecewise-linear
/// interpolant.
pub fn power_moments(values: &[C64], t0: f64, h: f64, kmax: usize) -> Vec<C64> {
    let mut out = vec![ZERO; kmax + 1];
    for j in 0..values.len().saturating_sub(1) {
        let a = t0 + j as f64 * h;
        let b = a + h;
        let (fa, fb) = (values[j], values[j + 1]);
        let slope = (fb - fa) / h;
        // f(t) = fa + slope (t - a)
        for (k, slot) in out.iter_mut().enumerate() {
            let k1 = k as f64 + 1.0;
            let k2 = k as f64 + 2.0;
            let p1 = (b.powi(k as i32 + 1) - a.powi(k as i32 + 1)) / k1;
            let p2 = (b.powi(k as i32 + 2) - a.powi(k as i32 + 2)) / k2;
            *slot += (fa - slope * a) * p1 + slope * p2;
        }
    }
    out
}
