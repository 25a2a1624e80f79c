//! Spectrum of the transmission problem: characteristic function through
//! the transformation operator, and an ODE-shooting oracle.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::charfn::{sinc, IntegralCharFn};
use crate::error::{Error, Result};
use crate::kernel::{self, CauchyData, KernelConfig};
use crate::quad;
use crate::types::{validate_class_r, GridSpec, Potential, SampledFn, SpectrumKind, SpectrumSeq};
use crate::zeros::{self, Rect, ZeroConfig};

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// Largest `|Im ρ|·(1+|a|)` before exponentials overflow.
const MAX_GROWTH: f64 = 690.0;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ShootResult {
    pub s1: C64,
    pub s1p: C64,
}

/// RK4 for `y″ = (q − λ) y`, `y(0) = 0`, `y′(0) = 1`, with `q` linearly
/// interpolated between samples.
#[allow(non_snake_case)]
pub fn shoot_S(q: &Potential, lambda: C64, steps: usize) -> Result<ShootResult> {
    let (y, yp) = shoot(q, lambda, steps, 0.0, 1.0, (ZERO, C64::new(1.0, 0.0)))?;
    Ok(ShootResult { s1: y, s1p: yp })
}

/// Integrates from `x0` to `x1` (either direction) starting at `(y, y′)`.
pub fn shoot(q: &Potential, lambda: C64, steps: usize, x0: f64, x1: f64, init: (C64, C64)) -> Result<(C64, C64)> {
    if steps < 100 {
        return Err(Error::InvalidInput(format!("shooting needs at least 100 steps, got {steps}")));
    }
    if lambda.sqrt().im.abs() * (x1 - x0).abs() > MAX_GROWTH {
        return Err(Error::Overflow(format!("|Im sqrt(lambda)| too large at lambda = {lambda}")));
    }
    let h = (x1 - x0) / steps as f64;
    let rhs = |x: f64, y: C64, yp: C64| (yp, (q.eval(x) - lambda) * y);
    let (mut y, mut yp) = init;
    for i in 0..steps {
        let x = x0 + i as f64 * h;
        let (k1y, k1p) = rhs(x, y, yp);
        let (k2y, k2p) = rhs(x + 0.5 * h, y + k1y * (0.5 * h), yp + k1p * (0.5 * h));
        let (k3y, k3p) = rhs(x + 0.5 * h, y + k2y * (0.5 * h), yp + k2p * (0.5 * h));
        let (k4y, k4p) = rhs(x + h, y + k3y * h, yp + k3p * h);
        y += (k1y + k2y * 2.0 + k3y * 2.0 + k4y) * (h / 6.0);
        yp += (k1p + k2p * 2.0 + k3p * 2.0 + k4p) * (h / 6.0);
    }
    if !y.is_finite() || !yp.is_finite() {
        return Err(Error::Overflow(format!("shooting overflowed at lambda = {lambda}")));
    }
    Ok((y, yp))
}

/// `V(y) = y(1) cos ρa − y′(1) sin ρa/ρ`.
pub fn boundary_form(s1: C64, s1p: C64, a: f64, lambda: C64) -> C64 {
    let rho = lambda.sqrt();
    s1 * (rho * a).cos() - s1p * sinc(rho * a) * a
}

/// Density on `[a−1, a+1]` from Cauchy data:
/// `½(w₀ − w₁)(a−t)` for `t ≤ a`, `½(w₀ + w₁)(t−a)` for `t > a`.
pub fn assemble_w(cd: &CauchyData, a: f64) -> Result<SampledFn> {
    let n = cd.grid().n;
    let g = GridSpec::new(2 * n, a - 1.0, a + 1.0)?;
    let values = (0..=2 * n)
        .map(|j| {
            if j <= n {
                let s = n - j;
                (cd.w0.values[s] - cd.w1.values[s]) * 0.5
            } else {
                let s = j - n;
                (cd.w0.values[s] + cd.w1.values[s]) * 0.5
            }
        })
        .collect();
    SampledFn::new(g, values)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Via {
    Kernel,
    Shooting,
}

#[derive(Clone, Copy, Debug)]
pub struct ForwardConfig {
    pub kernel: KernelConfig,
    /// Kernel grid; defaults to the potential's grid.
    pub kernel_n: Option<usize>,
    /// Combine kernel solves on `n` and `2n`.
    pub richardson: bool,
    pub shoot_steps: usize,
    pub zeros: ZeroConfig,
    /// Tolerance on `|∫q|` for the `a = 1` class check.
    pub mean_tol: f64,
}

impl Default for ForwardConfig {
    fn default() -> Self {
        Self {
            kernel: KernelConfig::default(),
            kernel_n: None,
            richardson: true,
            shoot_steps: 4000,
            zeros: ZeroConfig::default(),
            mean_tol: 1e-8,
        }
    }
}

/// `Δ(λ)` for `R(a, q)` by either path.
#[derive(Clone, Debug)]
pub enum CharacteristicFn {
    Integral(IntegralCharFn),
    Shooting { q: Potential, a: f64, steps: usize },
}

impl CharacteristicFn {
    pub fn kernel(q: &Potential, a: f64, cfg: &ForwardConfig) -> Result<Self> {
        let n = cfg.kernel_n.unwrap_or(q.n());
        let cd = if cfg.richardson {
            kernel::cauchy_data_extrapolated(q, n, cfg.kernel)?
        } else {
            kernel::cauchy_data_for(q, n, cfg.kernel)?
        };
        Ok(Self::Integral(Self::from_cauchy(&cd, a)?))
    }

    pub fn from_cauchy(cd: &CauchyData, a: f64) -> Result<IntegralCharFn> {
        let w = assemble_w(cd, a)?;
        // 2K(1,1) with the density's own quadrature
        let omega = quad::simpson(&w.values, w.grid.h())? * 2.0;
        if a == 1.0 {
            IntegralCharFn::a1_cos(SampledFn { grid: GridSpec::new(w.grid.n, 0.0, 2.0)?, values: w.values }, omega)
        } else {
            IntegralCharFn::general(a, w, omega)
        }
    }

    pub fn shooting(q: &Potential, a: f64, steps: usize) -> Self {
        Self::Shooting { q: q.clone(), a, steps }
    }

    pub fn eval(&self, lambda: C64) -> Result<C64> {
        match self {
            Self::Integral(f) => {
                let growth = lambda.sqrt().im.abs() * (1.0 + f.a.abs());
                if growth > MAX_GROWTH {
                    return Err(Error::Overflow(format!("|Im sqrt(lambda)| too large at lambda = {lambda}")));
                }
                Ok(f.eval(lambda))
            }
            Self::Shooting { q, a, steps } => {
                let r = shoot_S(q, lambda, *steps)?;
                Ok(boundary_form(r.s1, r.s1p, *a, lambda))
            }
        }
    }

    /// Size of the individual terms of `Δ`, for relative comparisons.
    pub fn term_scale(&self, lambda: C64) -> Result<f64> {
        let rho = lambda.sqrt();
        match self {
            Self::Integral(f) => {
                let e = (rho.im.abs() * (1.0 + f.a.abs())).exp();
                let r = rho.norm().max(1e-3);
                let dens = f.density.sup_norm() + f.omega.norm() + f.eta.norm();
                Ok(e * ((1.0 - f.a).abs() / r + dens / (r * r)).max(f64::MIN_POSITIVE))
            }
            Self::Shooting { q, a, steps } => {
                let s = shoot_S(q, lambda, *steps)?;
                let rho_a = rho * *a;
                Ok((s.s1 * rho_a.cos()).norm() + (s.s1p * sinc(rho_a) * *a).norm())
            }
        }
    }

    fn a(&self) -> f64 {
        match self {
            Self::Integral(f) => f.a,
            Self::Shooting { a, .. } => *a,
        }
    }
}

/// Probe points for detecting `Δ ≡ 0`.
const PROBES: [(f64, f64); 5] = [(1.0, 0.0), (10.0, 5.0), (50.0, 0.0), (-3.0, 0.0), (0.0, 100.0)];

pub fn is_degenerate(f: &CharacteristicFn) -> Result<bool> {
    for (re, im) in PROBES {
        let l = C64::new(re, im);
        let (v, s) = (f.eval(l)?, f.term_scale(l)?);
        if v.norm() > 1e-10 * s {
            return Ok(false);
        }
    }
    Ok(true)
}

/// `ω/(1−a)` shifted lattice seeds `π²n²/(1−a)²`, or `π²k²/4` for `a = 1`.
pub fn seeds(a: f64, omega: C64, count: usize) -> Vec<(i64, C64)> {
    if a == 1.0 {
        (2..2 + count as i64).map(|k| (k, C64::new((PI * k as f64).powi(2) / 4.0, 0.0))).collect()
    } else {
        let b = 1.0 - a;
        (1..=count as i64).map(|n| (n, C64::new((PI * n as f64 / b).powi(2), 0.0) + omega / b)).collect()
    }
}

/// First `count` eigenvalues of `R(a, q)`.
///
/// For `a ≠ 1`, zeros found by the audit beyond the lattice family are
/// merged in by real part and tagged as not almost real.
pub fn forward_spectrum(q: &Potential, a: f64, count: usize, via: Via, cfg: &ForwardConfig) -> Result<SpectrumSeq> {
    if count < 2 {
        return Err(Error::InvalidInput("count must be at least 2".into()));
    }
    let f = match via {
        Via::Kernel => CharacteristicFn::kernel(q, a, cfg)?,
        Via::Shooting => CharacteristicFn::shooting(q, a, cfg.shoot_steps),
    };
    spectrum_of(&f, q, count, cfg)
}

pub fn spectrum_of(f: &CharacteristicFn, q: &Potential, count: usize, cfg: &ForwardConfig) -> Result<SpectrumSeq> {
    let a = f.a();
    if a == 1.0 {
        if is_degenerate(f)? {
            return Err(Error::DegenerateSpectrum);
        }
        if !validate_class_r(q, cfg.mean_tol) {
            return Err(Error::Precondition(
                "a = 1 needs a zero-mean W21 potential with q(1) != 0".into(),
            ));
        }
    }
    let omega = q.mean();
    let seeds = seeds(a, omega, count);
    let eval = |l: C64| f.eval(l).unwrap_or(C64::new(f64::NAN, f64::NAN));
    let rect = window(&seeds, &cfg.zeros);
    let (found, mut extra) = zeros::find_zeros(&eval, &seeds, rect, &cfg.zeros)?;
    if a == 1.0 {
        return Ok(SpectrumSeq::new(SpectrumKind::TransmissionA1, 2, found));
    }
    let c = q.endpoint() / 4.0;
    if let (Some(rect), true) = (rect, a > 0.0 && c.norm() > 0.0) {
        extra = off_axis_zeros(&eval, a, c, rect, &found, extra, &cfg.zeros)?;
    }
    let mut tagged: Vec<(C64, bool)> = found.into_iter().map(|z| (z, true)).collect();
    tagged.extend(extra.into_iter().map(|z| (z, false)));
    tagged.sort_by(|x, y| x.0.re.total_cmp(&y.0.re).then(x.0.im.total_cmp(&y.0.im)));
    let values = tagged.iter().map(|t| t.0).collect();
    let mut s = if a == 0.0 {
        SpectrumSeq::new(SpectrumKind::DirichletDirichlet, 1, values)
    } else {
        SpectrumSeq::general(a, 1, values)
    };
    s.almost_real = tagged.iter().map(|t| t.1).collect();
    Ok(s)
}

/// Upper-half-plane `ρ` solving `e^{−idρ} = ±ρ²/c`, `d = 2 min(a, 1)`,
/// with `Re ρ²` in `[re_lo, re_hi]`; `+` for `a > 1`, `−` for `0 < a < 1`.
///
/// For `a > 0` the term `w(a+1) sin ρ(a+1)/ρ³`, `w(a+1) = q(1)/4 = c`,
/// outgrows `sin ρ(1−a)/ρ` off the real axis, and the balance of the two
/// puts a second family of zeros along `|Im ρ| ≈ ln(|ρ|²/|c|)/d`.
pub fn off_axis_seeds(a: f64, c: C64, re_lo: f64, re_hi: f64) -> Vec<C64> {
    if !(a > 0.0) || a == 1.0 || c.norm() == 0.0 {
        return Vec::new();
    }
    let d = 2.0 * a.min(1.0);
    let sign = if a > 1.0 { 1.0 } else { -1.0 };
    let kmax = (d * re_hi.max(0.0).sqrt() / (2.0 * PI)).ceil() as i64 + 2;
    let mut out = Vec::new();
    for k in -kmax..=kmax {
        let shift = C64::new(0.0, 2.0 * PI * k as f64);
        let mut rho = C64::new(-2.0 * PI * k as f64 / d, 1.0);
        for _ in 0..60 {
            rho = C64::new(0.0, 1.0 / d) * ((rho * rho * sign / c).ln() + shift);
        }
        let l = rho * rho;
        if rho.is_finite() && rho.im > 0.0 && l.re >= re_lo && l.re <= re_hi {
            out.push(l);
        }
    }
    out
}

/// Refines the off-axis family inside the window's real extent, merges it
/// with the zeros already found, and audits the count over a rectangle
/// tall enough to hold the family.
fn off_axis_zeros(
    f: &(dyn Fn(C64) -> C64 + Sync),
    a: f64,
    c: C64,
    rect: Rect,
    found: &[C64],
    mut extra: Vec<C64>,
    cfg: &ZeroConfig,
) -> Result<Vec<C64>> {
    // for 0 < a < 1 the family can reach the negative axis (ρ = iτ), below
    // the lattice window
    let seeds = off_axis_seeds(a, c, f64::NEG_INFINITY, rect.re_hi);
    if seeds.is_empty() {
        return Ok(extra);
    }
    let refined: Vec<Option<C64>> = seeds.par_iter().map(|&s| zeros::refine_zero(f, s, cfg).ok()).collect();
    let known = |z: C64, pool: &[C64]| pool.iter().any(|p| (p - z).norm() < 1e-6 * z.norm().max(1.0));
    let half_gap = 0.5 * (rect.im_hi - rect.im_lo);
    let floor = seeds.iter().map(|s| s.re).fold(rect.re_lo, f64::min);
    let re_lo = if floor < rect.re_lo { floor - half_gap } else { rect.re_lo };
    for z in refined.into_iter().flatten() {
        let inside = z.re >= re_lo && z.re <= rect.re_hi;
        if inside && !known(z, found) && !known(z, &extra) {
            extra.push(z);
        }
    }
    if cfg.audit {
        let top = extra.iter().map(|z| z.im.abs()).fold(rect.im_hi, f64::max);
        let tall = Rect { re_lo, im_lo: -1.25 * top, im_hi: 1.25 * top, ..rect };
        let counted = zeros::count_zeros(f, tall, cfg)?;
        let have = found.iter().chain(&extra).filter(|z| tall.contains(**z)).count();
        if counted != have as i64 {
            return Err(Error::MissedZero { rect: [tall.re_lo, tall.re_hi, tall.im_lo, tall.im_hi], counted, found: have });
        }
    }
    Ok(extra)
}

/// Audit rectangle: real extent from mid-gaps around the first and last
/// seeds, half-height from the config or half the first gap.
pub fn window(seeds: &[(i64, C64)], cfg: &ZeroConfig) -> Option<Rect> {
    if seeds.len() < 2 {
        return None;
    }
    let n = seeds.len();
    let gap0 = seeds[1].1.re - seeds[0].1.re;
    let gap1 = seeds[n - 1].1.re - seeds[n - 2].1.re;
    let h = cfg.window_height.unwrap_or(0.5 * gap0);
    Some(Rect {
        re_lo: seeds[0].1.re - 0.5 * gap0,
        re_hi: seeds[n - 1].1.re + 0.5 * gap1,
        im_lo: -h,
        im_hi: h,
    })
}

/// Least-squares `ω` from `μ_n − π²n²/(1−a)² ≈ ω/(1−a)` over the top half.
pub fn fit_omega(mu: &[(i64, C64)], a: f64) -> Result<C64> {
    if mu.len() < 2 {
        return Err(Error::Fit("need at least two entries to fit omega".into()));
    }
    let b = 1.0 - a;
    let top = &mu[mu.len() / 2..];
    let mean = top.iter().map(|&(n, l)| l - (PI * n as f64 / b).powi(2)).sum::<C64>() / top.len() as f64;
    Ok(mean * b)
}

/// Entries nearest the lattice `π²n²/(1−a)² + ω/(1−a)`, one per `n`,
/// matched greedily within half a lattice gap.
pub fn almost_real_subspectrum(spec: &SpectrumSeq, a: f64, omega: Option<C64>) -> Result<SpectrumSeq> {
    if a == 1.0 {
        return Err(Error::Precondition("the almost real subspectrum needs a != 1".into()));
    }
    let b = 1.0 - a;
    let lattice = |n: i64| (PI * n as f64 / b).powi(2);
    let match_with = |omega: C64| -> (Vec<(i64, C64)>, Vec<bool>) {
        let mut used = vec![false; spec.len()];
        let mut out = Vec::new();
        let mut ties = Vec::new();
        for n in 1.. {
            let target = lattice(n) + omega / b;
            let half_gap = 0.5 * (lattice(n) - lattice(n - 1)).min(lattice(n + 1) - lattice(n));
            let mut best: Option<(usize, f64)> = None;
            let mut tie = false;
            for (i, &l) in spec.values.iter().enumerate() {
                if used[i] {
                    continue;
                }
                let d = (l - target).norm();
                if d >= half_gap {
                    continue;
                }
                match best {
                    Some((j, bd)) if (d - bd).abs() <= 1e-12 * bd.max(1.0) => {
                        tie = true;
                        if l.im.abs() < spec.values[j].im.abs() {
                            best = Some((i, d));
                        }
                    }
                    Some((_, bd)) if d >= bd => {}
                    _ => {
                        best = Some((i, d));
                        tie = false;
                    }
                }
            }
            match best {
                Some((i, _)) => {
                    used[i] = true;
                    out.push((n, spec.values[i]));
                    ties.push(tie);
                }
                None => break,
            }
        }
        (out, ties)
    };
    let omega = match omega {
        Some(w) => w,
        None => {
            let (first, _) = match_with(ZERO);
            fit_omega(&first, a)?
        }
    };
    let (matched, ties) = match_with(omega);
    let mut s = SpectrumSeq::general(a, 1, matched.iter().map(|m| m.1).collect());
    // a tie is reported through the tag: the chosen entry is flagged false
    s.almost_real = ties.iter().map(|t| !t).collect();
    Ok(s)
}

/// Values of `Δ` from both paths at the given points.
pub fn dual_path_values(q: &Potential, a: f64, lambdas: &[C64], cfg: &ForwardConfig) -> Result<Vec<(C64, C64, f64)>> {
    let fk = CharacteristicFn::kernel(q, a, cfg)?;
    let fs = CharacteristicFn::shooting(q, a, cfg.shoot_steps);
    lambdas
        .par_iter()
        .map(|&l| Ok((fk.eval(l)?, fs.eval(l)?, fs.term_scale(l)?)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shooting_zero_potential() {
        let q = Potential::zero(10).unwrap();
        let r = shoot_S(&q, C64::new(PI * PI, 0.0), 1000).unwrap();
        assert!(r.s1.norm() < 1e-8);
        assert!((r.s1p + 1.0).norm() < 1e-8);
        assert!(shoot_S(&q, C64::new(1.0, 0.0), 50).is_err());
    }

    #[test]
    fn shooting_constant_potential() {
        let c = 2.5;
        let q = Potential::constant(10, c).unwrap();
        for l in [C64::new(7.0, 3.0), C64::new(-4.0, 0.0), C64::new(120.0, -10.0)] {
            let r = shoot_S(&q, l, 2000).unwrap();
            let m = (l - c).sqrt();
            let exact = m.sin() / m;
            assert!((r.s1 - exact).norm() < 1e-8 * exact.norm().max(1.0), "λ = {l}");
        }
    }

    #[test]
    fn shooting_overflow_is_reported() {
        let q = Potential::zero(10).unwrap();
        assert!(matches!(shoot_S(&q, C64::new(-1e7, 0.0), 200), Err(Error::Overflow(_))));
    }

    #[test]
    fn zero_potential_lattices() {
        let q = Potential::zero(50).unwrap();
        let cfg = ForwardConfig::default();
        let s = forward_spectrum(&q, 0.5, 8, Via::Kernel, &cfg).unwrap();
        for (n, v) in (1..=8).zip(&s.values) {
            let exact = 4.0 * (PI * n as f64).powi(2);
            assert!((v - exact).norm() < 1e-8 * exact);
        }
    }

    #[test]
    fn degenerate_a1_is_reported() {
        let q = Potential::zero(50).unwrap();
        let cfg = ForwardConfig::default();
        for via in [Via::Kernel, Via::Shooting] {
            assert!(matches!(forward_spectrum(&q, 1.0, 5, via, &cfg), Err(Error::DegenerateSpectrum)));
        }
    }

    #[test]
    fn assembled_w_ends_at_eta() {
        let q = Potential::linear_centered(80).unwrap();
        let cd = kernel::cauchy_data_for(&q, 80, KernelConfig::default()).unwrap();
        let w = assemble_w(&cd, 1.0).unwrap();
        assert!((w.values.last().unwrap() - q.eta()).norm() < 1e-12);
    }

    #[test]
    fn almost_real_needs_a_not_one() {
        let s = SpectrumSeq::new(SpectrumKind::TransmissionA1, 2, vec![C64::new(1.0, 0.0); 3]);
        assert!(almost_real_subspectrum(&s, 1.0, None).is_err());
    }
}
