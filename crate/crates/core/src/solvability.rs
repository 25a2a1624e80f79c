//! Whether a sequence can be the spectrum of `R(a, q)` with real `q`.
//!
//! Every check ends in the auxiliary pair `Δ₀ = S(1, λ)`, `Δ₁ = S′(1, λ)`
//! built from the data, whose zeros must be real and interlace
//! (equivalently `Δ₀/Δ₁` is a Nevanlinna function). For `a = 1` the pair
//! comes from the sine form of `Θ` and a free scale `γ`; for `a ∉ (−1, 1]`
//! the pair is fixed by `Δ`; for `−1 < a < 1` the odd part of `w` on
//! `(−b, b)` is free and searched for.

use std::f64::consts::PI;

use argmin::core::{CostFunction, Executor, State};
use argmin::solver::neldermead::NelderMead;
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::charfn::{gamma_fit, IntegralCharFn, IntegralKind};
use crate::error::{Error, Result};
use crate::forward::{almost_real_subspectrum, fit_omega};
use crate::inverse::{product_for, sine_series};
use crate::quad;
use crate::types::{l2_tail_share, trapezoid, GridSpec, SampledFn, SpectrumKind, SpectrumSeq, L2_TAIL_SHARE};
use crate::zeros::{self, Rect, ZeroConfig};

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
const ONE: C64 = C64 { re: 1.0, im: 0.0 };

/// `|Im λ| ≤ REAL_TOL · max(1, |λ|)` counts as real.
pub const REAL_TOL: f64 = 1e-8;
/// Neighbours closer than `TIE_TOL · max(1, |λ|)` are equal.
pub const TIE_TOL: f64 = 1e-9;
/// `Im M ≥ −NEV_TOL · |M|` at every sample.
pub const NEV_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Interlacing {
    pub ok: bool,
    /// Some entry failed the realness test.
    pub nonreal: bool,
    /// Smallest gap of the merged chain over `π²k`; negative on a violation.
    pub margin: f64,
    /// Entries of the chain `λ_{1,1} < λ_{1,0} < λ_{2,1} < …` compared.
    pub compared: usize,
}

/// `λ_{k,1} < λ_{k,0} < λ_{k+1,1}` over the common index range.
pub fn interlace_check(spec0: &SpectrumSeq, spec1: &SpectrumSeq) -> bool {
    interlacing(spec0, spec1, REAL_TOL, TIE_TOL).ok
}

pub fn interlacing(spec0: &SpectrumSeq, spec1: &SpectrumSeq, real_tol: f64, tie_tol: f64) -> Interlacing {
    let k = spec0.len().min(spec1.len());
    let mut chain: Vec<(C64, f64)> = Vec::with_capacity(2 * k + 1);
    for i in 0..k {
        let scale = PI * PI * (i + 1) as f64;
        chain.push((spec1.values[i], scale));
        chain.push((spec0.values[i], scale));
    }
    if spec1.len() > k {
        chain.push((spec1.values[k], PI * PI * (k + 1) as f64));
    }
    let mut margin = f64::INFINITY;
    let mut nonreal = false;
    for &(z, scale) in &chain {
        if z.im.abs() > real_tol * z.norm().max(1.0) || !z.is_finite() {
            nonreal = true;
            margin = margin.min(-z.im.abs() / scale);
        }
    }
    let mut strict = true;
    for w in chain.windows(2) {
        let (x, y) = (w[0].0.re, w[1].0.re);
        let d = y - x;
        if d <= tie_tol * x.abs().max(y.abs()).max(1.0) {
            strict = false;
        }
        if !nonreal {
            margin = margin.min(d / w[1].1);
        }
    }
    if chain.len() < 2 {
        margin = if nonreal { margin } else { 0.0 };
    }
    Interlacing { ok: strict && !nonreal && chain.len() >= 2, nonreal, margin, compared: chain.len() }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct NevanlinnaResult {
    pub ok: bool,
    /// `min Im M/|M|` over the usable samples.
    pub min_ratio: f64,
    pub samples: usize,
    /// Samples dropped because `Δ₁` nearly vanishes there.
    pub skipped: usize,
}

/// `Im(Δ₀/Δ₁) ≥ −NEV_TOL·|Δ₀/Δ₁|` at every sample with `Im λ > 0`.
pub fn nevanlinna_check(d0: &(dyn Fn(C64) -> C64 + Sync), d1: &(dyn Fn(C64) -> C64 + Sync), samples: &[C64]) -> bool {
    nevanlinna(d0, d1, samples, NEV_TOL).ok
}

pub fn nevanlinna(
    d0: &(dyn Fn(C64) -> C64 + Sync),
    d1: &(dyn Fn(C64) -> C64 + Sync),
    samples: &[C64],
    tol: f64,
) -> NevanlinnaResult {
    let ratios: Vec<Option<f64>> = samples
        .par_iter()
        .map(|&l| {
            if !(l.im > 0.0) {
                return None;
            }
            let (a, b) = (d0(l), d1(l));
            if !(b.norm() > 1e-14 * a.norm().max(f64::MIN_POSITIVE)) || !a.is_finite() || !b.is_finite() {
                return None;
            }
            let m = a / b;
            Some(if m.norm() == 0.0 { 0.0 } else { m.im / m.norm() })
        })
        .collect();
    let used: Vec<f64> = ratios.iter().flatten().copied().collect();
    let min_ratio = used.iter().copied().fold(f64::INFINITY, f64::min);
    NevanlinnaResult {
        ok: !used.is_empty() && min_ratio >= -tol,
        min_ratio,
        samples: used.len(),
        skipped: samples.len() - used.len(),
    }
}

/// `per_line` points on each of `Im λ ∈ {1, 10, 100}` over `[re_lo, re_hi]`.
///
/// The points are spaced uniformly in `t` with `Re λ = t|t|`, which follows
/// the spacing of the zeros.
pub fn default_samples(re_lo: f64, re_hi: f64, per_line: usize) -> Vec<C64> {
    let n = per_line.max(2);
    let t = |x: f64| x.signum() * x.abs().sqrt();
    let (t0, t1) = (t(re_lo), t(re_hi));
    [1.0, 10.0, 100.0]
        .iter()
        .flat_map(|&im| {
            (0..n).map(move |i| {
                let s = t0 + (t1 - t0) * i as f64 / (n - 1) as f64;
                C64::new(s * s.abs(), im)
            })
        })
        .collect()
}

/// Zeros of `Δ₀` or `Δ₁` seeded from `π²(k − j/2)² + ω`, `k = 1..=count`,
/// sorted by real part. The audit rectangle reaches down to
/// `−(|ω|/2 + ‖w_j‖₁ + 2)²`, below which neither function can vanish.
pub fn auxiliary_zeros(f: &IntegralCharFn, count: usize, cfg: &ZeroConfig) -> Result<SpectrumSeq> {
    let (j, kind) = match f.kind {
        IntegralKind::Delta0 => (0.0, SpectrumKind::DirichletDirichlet),
        IntegralKind::Delta1 => (1.0, SpectrumKind::DirichletNeumann),
        k => return Err(Error::InvalidInput(format!("{k:?} is not an auxiliary function"))),
    };
    if count < 2 {
        return Err(Error::InvalidInput("count must be at least 2".into()));
    }
    let seeds: Vec<(i64, C64)> =
        (1..=count as i64).map(|k| (k, C64::new((PI * (k as f64 - j / 2.0)).powi(2), 0.0) + f.omega)).collect();
    let l1 = quad::trapezoid(&f.density.values.iter().map(|v| C64::new(v.norm(), 0.0)).collect::<Vec<_>>(), f.density.grid.h())?.re;
    let bound = (f.omega.norm() / 2.0 + l1 + 2.0).powi(2);
    let gap0 = seeds[1].1.re - seeds[0].1.re;
    let n = seeds.len();
    let rect = Rect {
        re_lo: (seeds[0].1.re - 0.5 * gap0).min(-bound),
        re_hi: seeds[n - 1].1.re + 0.5 * (seeds[n - 1].1.re - seeds[n - 2].1.re),
        im_lo: -(0.5 * gap0).max(bound),
        im_hi: (0.5 * gap0).max(bound),
    };
    let eval = |l: C64| f.eval(l);
    let mut all = match zeros::find_zeros(&eval, &seeds, Some(rect), cfg) {
        Ok((found, extra)) => found.into_iter().chain(extra).collect::<Vec<_>>(),
        Err(Error::ZeroNotConverged { .. } | Error::MissedZero { .. }) => zeros::locate_in_rect(&eval, rect, cfg)?,
        Err(e) => return Err(e),
    };
    all.sort_by(|x, y| x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im)));
    Ok(SpectrumSeq::new(kind, 1, all))
}

/// The pair `Δ₀, Δ₁` with zeros and both tests.
#[derive(Clone, Debug)]
pub struct AuxiliaryPair {
    pub delta0: IntegralCharFn,
    pub delta1: IntegralCharFn,
}

#[derive(Clone, Debug)]
pub struct PairReport {
    pub zeros0: SpectrumSeq,
    pub zeros1: SpectrumSeq,
    pub interlacing: Interlacing,
    pub nevanlinna: NevanlinnaResult,
}

impl AuxiliaryPair {
    pub fn new(w0: SampledFn, w1: SampledFn, omega: C64) -> Result<Self> {
        Ok(Self { delta0: IntegralCharFn::delta0(w0, omega)?, delta1: IntegralCharFn::delta1(w1, omega)? })
    }

    /// `w_j(t) = w(a+t) + (−1)^j w(a−t)` on `n` intervals of `[0,1]`, with
    /// `ω = 2∫₀¹ w₀` so that both functions are entire.
    pub fn from_w(w: &SampledFn, a: f64, n: usize) -> Result<Self> {
        let g = GridSpec::unit(n)?;
        let w0 = SampledFn::from_fn(g, |t| w.eval(a + t) + w.eval(a - t));
        let w1 = SampledFn::from_fn(g, |t| w.eval(a + t) - w.eval(a - t));
        let omega = IntegralCharFn::delta0(w0.clone(), ZERO)?.density_integral() * 2.0;
        Self::new(w0, w1, omega)
    }

    pub fn zeros(&self, count: usize, cfg: &ZeroConfig) -> Result<(SpectrumSeq, SpectrumSeq)> {
        let (z0, z1) = rayon::join(|| auxiliary_zeros(&self.delta0, count, cfg), || auxiliary_zeros(&self.delta1, count, cfg));
        Ok((z0?, z1?))
    }

    pub fn check(&self, count: usize, cfg: &ZeroConfig) -> Result<PairReport> {
        let (zeros0, zeros1) = self.zeros(count, cfg)?;
        let interlacing = interlacing(&zeros0, &zeros1, REAL_TOL, TIE_TOL);
        let lo = zeros0.values.iter().chain(&zeros1.values).map(|z| z.re).fold(0.0, f64::min) - PI * PI;
        let hi = zeros0.values.iter().chain(&zeros1.values).map(|z| z.re).fold(PI * PI, f64::max);
        let samples = default_samples(lo, hi, 200);
        let nevanlinna = nevanlinna(&|l| self.delta0.eval(l), &|l| self.delta1.eval(l), &samples, NEV_TOL);
        Ok(PairReport { zeros0, zeros1, interlacing, nevanlinna })
    }

    /// As [`check`](Self::check), with a failed zero search reported as
    /// failing both tests. Densities far from the data's scale make the
    /// zero counts overflow; that is an outcome for the data, not an error.
    pub fn check_or_fail(&self, count: usize, cfg: &ZeroConfig) -> PairReport {
        self.check(count, cfg).unwrap_or_else(|_| {
            let empty = SpectrumSeq::new(SpectrumKind::DirichletDirichlet, 1, Vec::new());
            PairReport {
                zeros0: empty.clone(),
                zeros1: SpectrumSeq { kind: SpectrumKind::DirichletNeumann, ..empty },
                interlacing: Interlacing { ok: false, nonreal: false, margin: f64::NEG_INFINITY, compared: 0 },
                nevanlinna: NevanlinnaResult { ok: false, min_ratio: f64::NAN, samples: 0, skipped: 0 },
            }
        })
    }

    /// Interlacing margin, with failed zero searches scored below any
    /// real configuration.
    fn margin(&self, count: usize, cfg: &ZeroConfig) -> f64 {
        match self.zeros(count, cfg) {
            Ok((z0, z1)) => {
                let i = interlacing(&z0, &z1, REAL_TOL, TIE_TOL);
                if i.ok {
                    i.margin.max(f64::MIN_POSITIVE)
                } else {
                    i.margin.min(0.0)
                }
            }
            Err(_) => -10.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Theorem {
    B1,
    B2,
    B3,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    /// The data conditions hold but the search for the free part failed.
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Condition {
    pub name: String,
    pub pass: bool,
    pub residual: f64,
}

fn cond(name: &str, pass: bool, residual: f64) -> Condition {
    Condition { name: name.into(), pass, residual }
}

#[derive(Clone, Debug)]
pub struct SolvabilityReport {
    pub theorem: Theorem,
    pub conditions: Vec<Condition>,
    /// `Δ = γΘ`; for `a = 1`, the scale at which the pair interlaced.
    pub gamma: Option<C64>,
    pub omega_est: f64,
    /// `w` on `[a−1, a+1]` (for `a = 1`, `γg` on `[0,2]`).
    pub w_reconstruction: SampledFn,
    pub interlace_ok: bool,
    pub nevanlinna_ok: bool,
    /// Scales tried by the `a = 1` scan, in order.
    pub gamma_scan: Vec<ScanStep>,
    pub verdict: Verdict,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ScanStep {
    pub gamma: f64,
    pub interlace_ok: bool,
    pub margin: f64,
}

impl SolvabilityReport {
    fn finish(mut self, search_failed: bool) -> Self {
        let data_ok = self.conditions.iter().filter(|c| c.name != SEARCH).all(|c| c.pass);
        self.verdict = if self.conditions.iter().all(|c| c.pass) {
            Verdict::Pass
        } else if data_ok && search_failed {
            Verdict::Inconclusive
        } else {
            Verdict::Fail
        };
        self
    }

    pub fn to_json(&self) -> serde_json::Value {
        let w = &self.w_reconstruction;
        serde_json::json!({
            "theorem": self.theorem,
            "verdict": self.verdict,
            "conditions": self.conditions,
            "gamma": self.gamma.map(|g| serde_json::json!({"re": g.re, "im": g.im})),
            "omega_est": self.omega_est,
            "interlace_ok": self.interlace_ok,
            "nevanlinna_ok": self.nevanlinna_ok,
            "gamma_scan": self.gamma_scan,
            "w_reconstruction": {
                "a": w.grid.a,
                "b": w.grid.b,
                "n": w.grid.n,
                "re": w.values.iter().map(|v| v.re).collect::<Vec<_>>(),
                "im": w.values.iter().map(|v| v.im).collect::<Vec<_>>(),
            },
        })
    }
}

/// Name of the condition that holds the outcome of a scan or search.
const SEARCH: &str = "interlacing_search";

#[derive(Clone, Copy, Debug)]
pub struct SolvabilityConfig {
    /// Zeros of each auxiliary function compared.
    pub aux_count: usize,
    pub zeros: ZeroConfig,
    /// Intervals of the reconstructed density.
    pub grid_n: usize,
    pub real_tol: f64,
    /// Sine terms for the `a = 1` inversion.
    pub k_terms: usize,
    pub tail_fraction: f64,
    /// Relative residual allowed when `Θ` is re-evaluated from `u`.
    pub recon_tol: f64,
    /// `|u(2)|` allowed relative to `sup|u|`.
    pub endpoint_tol: f64,
    pub gamma_floor: f64,
    /// Cosine terms reach `ρ = frac · √λ_top`, `λ_top` the largest zero.
    pub cosine_reach: f64,
    /// Nelder–Mead iterations per starting point.
    pub search_iters: u64,
    pub search_starts: usize,
    pub seed: u64,
}

impl Default for SolvabilityConfig {
    fn default() -> Self {
        Self {
            aux_count: 20,
            zeros: ZeroConfig::default(),
            grid_n: 400,
            real_tol: 1e-6,
            k_terms: 2000,
            tail_fraction: 0.25,
            recon_tol: 1e-3,
            endpoint_tol: 1e-2,
            gamma_floor: 1e-6,
            cosine_reach: 0.25,
            search_iters: 150,
            search_starts: 4,
            seed: 0,
        }
    }
}

/// `a = 1`: `Θ` normalized to `Θ(0) = 1` must be `∫₀² u sin ρx/ρ` with real
/// `u ∈ W₂¹`, `u(2) = 0`; then `ω = −2γu(0)`, `w_j = γ g_j`, `g = u′`,
/// interlace for small `|γ|`. A scan reaching the floor is inconclusive.
pub fn check_theorem_b1(zeros: &SpectrumSeq, gamma_probe: f64) -> Result<SolvabilityReport> {
    check_theorem_b1_with(zeros, gamma_probe, &SolvabilityConfig::default())
}

pub fn check_theorem_b1_with(zeros: &SpectrumSeq, gamma_probe: f64, cfg: &SolvabilityConfig) -> Result<SolvabilityReport> {
    if !(gamma_probe.is_finite() && gamma_probe != 0.0) {
        return Err(Error::InvalidInput("gamma probe must be finite and nonzero".into()));
    }
    if cfg.k_terms < 8 || cfg.grid_n < 4 || cfg.grid_n % 2 == 1 {
        return Err(Error::InvalidInput("k_terms >= 8 and an even grid_n >= 4 are required".into()));
    }
    let grid2 = GridSpec::new(cfg.grid_n, 0.0, 2.0)?;
    let mut conditions = Vec::new();
    let product = match product_for(zeros, ONE, None, cfg.tail_fraction) {
        Ok(p) => p,
        Err(Error::Validation(_)) => {
            conditions.push(cond("product_convergent", false, f64::INFINITY));
            return Ok(SolvabilityReport {
                theorem: Theorem::B1,
                conditions,
                gamma: None,
                omega_est: f64::NAN,
                w_reconstruction: SampledFn::zeros(grid2),
                interlace_ok: false,
                nevanlinna_ok: false,
                gamma_scan: Vec::new(),
                verdict: Verdict::Fail,
            }
            .finish(false));
        }
        Err(e) => return Err(e),
    };
    let p0 = product.eval(ZERO);
    if p0.norm() == 0.0 {
        return Err(Error::Precondition("a zero eigenvalue is not supported".into()));
    }
    let theta = |l: C64| product.eval(l) / p0;
    conditions.push(cond("product_convergent", true, 0.0));

    let rho = |m: usize| PI * m as f64 / 2.0;
    let coeffs: Vec<C64> = (1..=cfg.k_terms).into_par_iter().map(|m| theta(C64::new(rho(m).powi(2), 0.0)) * rho(m)).collect();
    let u = sine_series(coeffs, grid2)?;
    let (alpha, u2) = u.endpoints;
    let sup = u.v.sup_norm().max(f64::MIN_POSITIVE);

    // held-out points: half-lattice and off-axis
    let held: Vec<C64> = (1..=24)
        .map(|m| C64::new((PI * (m as f64 + 0.5) / 2.0).powi(2), 0.0))
        .chain([C64::new(3.0, 5.0), C64::new(20.0, -8.0), C64::new(-4.0, 1.0), C64::new(60.0, 30.0)])
        .collect();
    let h = grid2.h();
    let (mut err, mut scale) = (0.0f64, 0.0f64);
    for &l in &held {
        let r = l.sqrt();
        let recon = quad::cos_sin_integrals(&u.v.values, 0.0, h, r).1 / r;
        let t = theta(l);
        err = err.max((recon - t).norm());
        scale = scale.max(t.norm());
    }
    let recon_res = err / scale.max(f64::MIN_POSITIVE);
    conditions.push(cond("reconstruction_residual", recon_res <= cfg.recon_tol, recon_res));
    let imag = u.v.values.iter().map(|v| v.im.abs()).fold(0.0, f64::max) / sup;
    conditions.push(cond("u_real", imag <= cfg.real_tol, imag));
    let end = u2.norm() / sup;
    conditions.push(cond("u_endpoint", end <= cfg.endpoint_tol, end));
    let weighted: Vec<C64> = u.residual().iter().enumerate().map(|(i, d)| d * rho(i + 1)).collect();
    let share = l2_tail_share(&weighted);
    conditions.push(cond("coefficient_decay", share < L2_TAIL_SHARE, share));

    let g = u.derivative(grid2);
    let n = cfg.grid_n / 2;
    let unit = GridSpec::unit(n)?;
    let gj = |sign: f64| SampledFn::new(unit, (0..=n).map(|i| g.values[n + i] + g.values[n - i] * sign).collect());
    let (g0, g1) = (gj(1.0)?, gj(-1.0)?);
    let real = |f: &SampledFn| f.map(|v| C64::new(v.re, 0.0));
    let (g0, g1) = (real(&g0), real(&g1));
    // ω = 2∫₀¹ w₀ = 2γ(u(2) − u(0)) keeps the pair's 1/λ parts cancelling
    let jump = 2.0 * (u2 - alpha).re;
    let data_ok = conditions.iter().all(|c| c.pass);

    let mut found = None;
    let mut last_margin = f64::NAN;
    let mut gamma_scan = Vec::new();
    if data_ok {
        let mut gamma = gamma_probe;
        while gamma.abs() >= cfg.gamma_floor {
            let pair = AuxiliaryPair::new(g0.map(|v| v * gamma), g1.map(|v| v * gamma), C64::new(gamma * jump, 0.0))?;
            let r = pair.check(cfg.aux_count, &cfg.zeros)?;
            last_margin = r.interlacing.margin;
            gamma_scan.push(ScanStep { gamma, interlace_ok: r.interlacing.ok, margin: last_margin });
            if r.interlacing.ok {
                found = Some((gamma, r));
                break;
            }
            gamma *= 0.5;
        }
    }
    let (gamma, interlace_ok, nevanlinna_ok, margin) = match &found {
        Some((gm, r)) => (Some(C64::new(*gm, 0.0)), true, r.nevanlinna.ok, r.interlacing.margin),
        None => (None, false, false, last_margin),
    };
    conditions.push(cond(SEARCH, interlace_ok, margin));
    let scale_w = found.as_ref().map(|f| f.0).unwrap_or(1.0);
    Ok(SolvabilityReport {
        theorem: Theorem::B1,
        conditions,
        gamma,
        omega_est: scale_w * jump,
        w_reconstruction: real(&g).map(|v| v * scale_w),
        interlace_ok,
        nevanlinna_ok,
        gamma_scan,
        verdict: Verdict::Fail,
    }
    .finish(data_ok))
}

/// `Θ(λ) = Θ_ref(λ) ∏ (1 − λ/λ_k)/(1 − λ/λ_k^ref)`.
///
/// `Θ_ref` is the normalized characteristic function of a linear density
/// with the fitted `ω` and end value `w(a+1) = c`; its zeros follow the
/// given ones closely in both the lattice family and, for `a > 0`, the
/// off-axis family, so the infinite remainder of the product is carried
/// by `Θ_ref` in closed form. Unpaired zeros enter as plain factors.
#[derive(Clone, Debug)]
pub struct RatioTheta {
    reference: IntegralCharFn,
    ref0: C64,
    pairs: Vec<(C64, C64)>,
    unpaired: Vec<C64>,
    strays: Vec<C64>,
    /// Evaluate as `(Θ(λ) + conj Θ(λ̄))/2`.
    pub symmetric: bool,
    /// Zeros of `Θ_ref` in the audit rectangle left without a partner.
    pub stray_reference_zeros: i64,
}

impl RatioTheta {
    pub fn new(a: f64, omega: f64, c: C64, zeros: &[C64], lattice_top: f64, cfg: &ZeroConfig) -> Result<Self> {
        let g = GridSpec::new(400, a - 1.0, a + 1.0)?;
        let om = C64::new(omega, 0.0);
        let w = SampledFn::from_fn(g, |t| om / 4.0 + (c - om / 4.0) * (t - a));
        let reference = IntegralCharFn::general(a, w, om)?;
        let ref0 = reference.eval(ZERO);
        if ref0.norm() == 0.0 {
            return Err(Error::Fit("reference function vanishes at 0".into()));
        }
        let f = |l: C64| reference.eval(l);
        let gap = (PI / (1.0 - a).abs()).powi(2);
        let im = zeros.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
        let lo = zeros.iter().map(|z| z.re).fold(0.0, f64::min);
        let rect = Rect { re_lo: lo - gap, re_hi: lattice_top, im_lo: -(1.25 * im + gap), im_hi: 1.25 * im + gap };

        let spacing = |z: C64| {
            zeros.iter().filter(|&&o| o != z).map(|o| (o - z).norm()).fold(f64::INFINITY, f64::min).min(gap)
        };
        // Newton may jump to a neighbour where the model is least accurate;
        // such zeros get a local search instead
        let refined: Vec<Option<C64>> = zeros
            .par_iter()
            .map(|&z| {
                let r = 0.25 * spacing(z);
                if let Some(p) = zeros::refine_zero(&f, z, cfg).ok().filter(|p| (p - z).norm() < r) {
                    return Some(p);
                }
                let r = r * 0.987;
                let boxed = Rect { re_lo: z.re - r, re_hi: z.re + r * 1.013, im_lo: z.im - r, im_hi: z.im + r * 1.011 };
                match zeros::locate_in_rect(&f, boxed, cfg) {
                    Ok(v) if v.len() == 1 => Some(v[0]),
                    _ => None,
                }
            })
            .collect();
        let mut pairs: Vec<(C64, C64)> = Vec::new();
        let mut unpaired = Vec::new();
        for (&z, r) in zeros.iter().zip(refined) {
            match r {
                Some(r) if !pairs.iter().any(|p| (p.1 - r).norm() < 1e-8 * r.norm().max(1.0)) => pairs.push((z, r)),
                _ => unpaired.push(z),
            }
        }
        // the linear model can carry extra zeros below the data; those are
        // divided out
        let first = zeros.iter().map(|z| z.re - 0.3 * spacing(*z)).fold(f64::INFINITY, f64::min);
        let mut strays = Vec::new();
        if first > rect.re_lo {
            let h = 0.993 * gap;
            let low = Rect { re_lo: rect.re_lo, re_hi: first, im_lo: -h, im_hi: h * 1.007 };
            strays = zeros::locate_in_rect(&f, low, cfg)?
                .into_iter()
                .filter(|s| !pairs.iter().any(|p| (p.1 - s).norm() < 1e-6 * s.norm().max(1.0)))
                .collect();
        }
        // every zero of Θ_ref inside the data's range must be accounted for
        let counted = zeros::count_zeros(&f, rect, cfg)?;
        let inside = |pairs: &[(C64, C64)]| pairs.iter().filter(|p| rect.contains(p.1)).count() as i64;
        if counted > inside(&pairs) + strays.len() as i64 && !unpaired.is_empty() {
            // a moved data zero leaves its reference partner unclaimed nearby
            let mut left = Vec::new();
            for z in std::mem::take(&mut unpaired) {
                let r = 0.9 * zeros.iter().filter(|&&o| o != z).map(|o| (o - z).norm()).fold(f64::INFINITY, f64::min);
                let boxed = Rect { re_lo: z.re - r, re_hi: z.re + r * 1.013, im_lo: z.im - r, im_hi: z.im + r * 1.011 };
                let free = zeros::locate_in_rect(&f, boxed, cfg)?
                    .into_iter()
                    .filter(|s| !pairs.iter().any(|p| (p.1 - s).norm() < 1e-6 * s.norm().max(1.0)))
                    .min_by(|x, y| (x - z).norm().total_cmp(&(y - z).norm()));
                match free {
                    Some(s) => {
                        // a claimed stray is now carried by the pair
                        strays.retain(|t| (t - s).norm() >= 1e-6 * s.norm().max(1.0));
                        pairs.push((z, s));
                    }
                    None => left.push(z),
                }
            }
            unpaired = left;
        }
        let stray_reference_zeros = counted - inside(&pairs) - strays.len() as i64;
        Ok(Self { reference, ref0, pairs, unpaired, strays, symmetric: false, stray_reference_zeros })
    }

    pub fn eval(&self, l: C64) -> C64 {
        if self.symmetric {
            (self.eval_raw(l) + self.eval_raw(l.conj()).conj()) * 0.5
        } else {
            self.eval_raw(l)
        }
    }

    fn eval_raw(&self, l: C64) -> C64 {
        // Θ is smooth through a reference zero; only the split form is 0/0
        let l = if self.pairs.iter().any(|p| p.1 == l) || self.strays.contains(&l) {
            l + 1e-12 * l.norm().max(1.0)
        } else {
            l
        };
        let mut v = self.reference.eval(l) / self.ref0;
        for &(z, r) in &self.pairs {
            // (1 − λ/z)/(1 − λ/r), finite at λ = z = r
            if z != r {
                v *= (r / z) * (ONE + (z - r) / (r - l));
            }
        }
        for &z in &self.unpaired {
            v *= ONE - l / z;
        }
        for &s in &self.strays {
            v /= ONE - l / s;
        }
        v
    }
}

/// Tolerance for [`conjugate_closure`], above the zero solver's accuracy.
pub const CLOSURE_TOL: f64 = 1e-6;

/// `max_z min_y |z̄ − y| / max(1, |z|)` over the set.
pub fn conjugate_closure(zeros: &[C64]) -> f64 {
    zeros
        .par_iter()
        .map(|z| zeros.iter().map(|y| (z.conj() - y).norm()).fold(f64::INFINITY, f64::min) / z.norm().max(1.0))
        .reduce(|| 0.0, f64::max)
}

/// Split into the lattice family and the rest; `ω` from the lattice part.
struct Split {
    lattice: SpectrumSeq,
    others: Vec<C64>,
    omega: f64,
    unmatched: usize,
}

/// Lattice entries matched in order from `n = 1`; fewer than this is not
/// enough to fit `ω` and `γ`.
const MIN_LATTICE: usize = 16;

/// `Err` holds the failed `lattice_matched` condition.
fn split_spectrum(zeros: &SpectrumSeq, a: f64) -> Result<std::result::Result<Split, Condition>> {
    let lattice = match almost_real_subspectrum(zeros, a, None) {
        Ok(l) => l,
        Err(Error::Fit(_)) => return Ok(Err(cond("lattice_matched", false, 0.0))),
        Err(e) => return Err(e),
    };
    if lattice.len() < MIN_LATTICE {
        return Ok(Err(cond("lattice_matched", false, lattice.len() as f64)));
    }
    let mut pool = zeros.values.clone();
    for z in &lattice.values {
        if let Some(i) = pool.iter().position(|p| p == z) {
            pool.swap_remove(i);
        }
    }
    let mu: Vec<(i64, C64)> = lattice.indices().zip(lattice.values.iter().copied()).collect();
    let omega = fit_omega(&mu, a)?.re;
    // near-axis entries inside the matched range that found no lattice slot
    let b = 1.0 - a;
    let half_gap = 0.5 * (PI / b).powi(2);
    let top = lattice.values.last().map(|z| z.re).unwrap_or(0.0);
    let unmatched = pool.iter().filter(|z| z.im.abs() < half_gap && z.re > half_gap && z.re < top).count();
    Ok(Ok(Split { lattice, others: pool, omega, unmatched }))
}

/// `c = ±ρ² e^{idρ}`, `Im ρ > 0`, averaged over the larger half of the
/// off-axis zeros; zero when there are none.
fn fit_end_value(a: f64, others: &[C64]) -> C64 {
    if !(a > 0.0) || others.is_empty() {
        return ZERO;
    }
    let d = 2.0 * a.min(1.0);
    let sign = if a > 1.0 { 1.0 } else { -1.0 };
    let mut by_size: Vec<C64> = others.to_vec();
    by_size.sort_by(|x, y| x.norm().total_cmp(&y.norm()));
    let top = &by_size[by_size.len() / 2..];
    let sum: C64 = top
        .iter()
        .map(|&z| {
            let mut r = z.sqrt();
            if r.im < 0.0 {
                r = -r;
            }
            r * r * sign * (C64::new(0.0, d) * r).exp()
        })
        .sum();
    let c = sum / top.len() as f64;
    // real data: conjugate pairs average to a real value
    if c.im.abs() < 1e-6 * c.norm() {
        C64::new(c.re, 0.0)
    } else {
        c
    }
}

/// Data fixed by `Δ` for `a ≠ 1`: `γ`, `ω` and the cosine transform `f` of
/// `w` folded onto `[0, |a|+1]`.
struct Determined {
    gamma: Option<(C64, f64)>,
    omega: f64,
    theta: RatioTheta,
    /// Largest `dist(z̄, data)/max(1,|z|)`; real `w` needs it to vanish.
    closure: f64,
    unmatched: usize,
    /// `f(t)` on `[0, L]`, `∫₀^L f cos ρt = ∫_{a−1}^{a+1} w cos ρt`.
    folded: SampledFn,
}

fn determine(zeros: &SpectrumSeq, a: f64, cfg: &SolvabilityConfig) -> Result<std::result::Result<Determined, Condition>> {
    let split = match split_spectrum(zeros, a)? {
        Ok(s) => s,
        Err(c) => return Ok(Err(c)),
    };
    let c = fit_end_value(a, &split.others);
    let b = 1.0 - a;
    let top = split.lattice.len() as i64;
    let lattice_top = 0.5 * ((PI * top as f64 / b).powi(2) + (PI * (top + 1) as f64 / b).powi(2)) + split.omega / b;
    let mut theta = RatioTheta::new(a, split.omega, c, &zeros.values, lattice_top, &cfg.zeros)?;
    let closure = conjugate_closure(&zeros.values);
    // a conjugate-closed set has Θ real on the axis; rounding in the zeros
    // is not allowed to break that
    theta.symmetric = closure <= CLOSURE_TOL;
    let gamma = gamma_fit(|l| theta.eval(l), a, split.lattice.len() / 2).ok().map(|g| (g.gamma, g.error));
    let big_l = a.abs() + 1.0;
    let lam_top = split.lattice.values.last().map(|z| z.re).unwrap_or(0.0).max(0.0);
    let k = ((cfg.cosine_reach * lam_top.sqrt() * big_l / PI).floor() as usize).max(4);
    let gm = gamma.map(|g| g.0).unwrap_or(ONE);
    let om = split.omega;
    let coeff: Vec<C64> = (0..=k)
        .into_par_iter()
        .map(|m| {
            if m == 0 {
                return C64::new(om / 2.0, 0.0);
            }
            let r = C64::new(PI * m as f64 / big_l, 0.0);
            r * r * gm * theta.eval(r * r) - r * (r * b).sin() + (r * b).cos() * (om / 2.0)
        })
        .collect();
    let grid = GridSpec::new(cfg.grid_n, 0.0, big_l)?;
    let folded = SampledFn::from_fn(grid, |t| {
        let mut acc = coeff[0] / big_l;
        for (m, cm) in coeff.iter().enumerate().skip(1) {
            acc += cm * (2.0 / big_l) * (PI * m as f64 * t / big_l).cos();
        }
        acc
    });
    Ok(Ok(Determined { gamma, omega: om, theta, closure, unmatched: split.unmatched, folded }))
}

/// `w` on `[a−1, a+1]` from the folded transform and, on `(−b, b)`, the odd
/// part `w₋` (`w = f/2 ± w₋` there).
fn unfold(d: &Determined, a: f64, n: usize, w_minus: &dyn Fn(f64) -> f64) -> Result<SampledFn> {
    let b = 1.0 - a.abs();
    let grid = GridSpec::new(n, a - 1.0, a + 1.0)?;
    Ok(SampledFn::from_fn(grid, |t| {
        if t.abs() < b {
            let odd = if t >= 0.0 { w_minus(t) } else { -w_minus(-t) };
            d.folded.eval(t.abs()) * 0.5 + odd
        } else {
            d.folded.eval(t.abs())
        }
    }))
}

fn report_shell(theorem: Theorem, a: f64, n: usize) -> Result<SolvabilityReport> {
    Ok(SolvabilityReport {
        theorem,
        conditions: Vec::new(),
        gamma: None,
        omega_est: f64::NAN,
        w_reconstruction: SampledFn::zeros(GridSpec::new(n, a - 1.0, a + 1.0)?),
        interlace_ok: false,
        nevanlinna_ok: false,
        gamma_scan: Vec::new(),
        verdict: Verdict::Fail,
    })
}

/// `ω` from the spectrum against `2∫w₀` from the reconstruction.
pub const OMEGA_TOL: f64 = 1e-2;

fn omega_condition(pair: &AuxiliaryPair, omega: f64) -> Condition {
    let r = (pair.delta0.omega - omega).norm() / (1.0 + omega.abs());
    cond("omega_consistent", r <= OMEGA_TOL, r)
}

fn data_conditions(d: &Determined, a: f64, w: &SampledFn, cfg: &SolvabilityConfig) -> Vec<Condition> {
    let mut out = vec![
        cond("lattice_matched", d.unmatched == 0, d.unmatched as f64),
        cond("conjugate_closed", d.closure <= CLOSURE_TOL, d.closure),
    ];
    let stray = d.theta.stray_reference_zeros;
    out.push(cond("product_model", stray == 0, stray as f64));
    match d.gamma {
        Some((g, err)) => out.push(cond("gamma_limit", g.is_finite() && g.norm() > 0.0, err / g.norm())),
        None => out.push(cond("gamma_limit", false, f64::INFINITY)),
    }
    let sup = w.sup_norm() + 1.0;
    let imag = w.values.iter().map(|v| v.im.abs()).fold(0.0, f64::max) / sup;
    out.push(cond("w_real", imag <= cfg.real_tol, imag));
    // for |a| > 1 the folded transform must vanish on [0, |a| − 1]; the
    // edge is left out, where the truncated series rings
    let gap = a.abs() - 1.0;
    if gap > 0.0 {
        let f = &d.folded;
        let h = f.grid.h();
        let (mut inner, mut all) = (0.0, 0.0);
        for (i, v) in f.values.iter().enumerate() {
            let e = v.norm_sqr() * h;
            all += e;
            if f.grid.node(i) < 0.8 * gap {
                inner += e;
            }
        }
        let r = (inner / (all + h)).sqrt();
        out.push(cond("w_support", r <= SUPPORT_TOL, r));
    }
    out
}

/// `‖f‖` outside the support of `w`, relative to the whole.
pub const SUPPORT_TOL: f64 = 5e-2;

/// `a ≤ −1` or `a > 1`: `Δ = γΘ` must have the form (3a) with real `w`,
/// and the pair built from `w` must interlace.
pub fn check_theorem_b2(zeros: &SpectrumSeq, a: f64) -> Result<SolvabilityReport> {
    check_theorem_b2_with(zeros, a, &SolvabilityConfig::default())
}

pub fn check_theorem_b2_with(zeros: &SpectrumSeq, a: f64, cfg: &SolvabilityConfig) -> Result<SolvabilityReport> {
    if !(a <= -1.0 || a > 1.0) {
        return Err(Error::InvalidInput(format!("the a <= -1 or a > 1 check got a = {a}")));
    }
    let mut report = report_shell(Theorem::B2, a, cfg.grid_n)?;
    let d = match determine(zeros, a, cfg)? {
        Ok(d) => d,
        Err(c) => {
            report.conditions.push(c);
            return Ok(report.finish(false));
        }
    };
    let w = unfold(&d, a, cfg.grid_n, &|_| 0.0)?;
    report.conditions = data_conditions(&d, a, &w, cfg);
    report.gamma = d.gamma.map(|g| g.0);
    report.omega_est = d.omega;
    let real_w = w.map(|v| C64::new(v.re, 0.0));
    let pair = AuxiliaryPair::from_w(&real_w, a, cfg.grid_n / 2)?;
    report.conditions.push(omega_condition(&pair, d.omega));
    let r = pair.check_or_fail(cfg.aux_count, &cfg.zeros);
    report.interlace_ok = r.interlacing.ok;
    report.nevanlinna_ok = r.nevanlinna.ok;
    report.conditions.push(cond("interlacing", r.interlacing.ok, r.interlacing.margin));
    report.conditions.push(cond("nevanlinna", r.nevanlinna.ok, r.nevanlinna.min_ratio));
    report.w_reconstruction = w;
    Ok(report.finish(false))
}

/// `−1 < a < 1`: as for [`check_theorem_b2`], with `w₋` on `(0, b)`
/// searched in `span{cos((i−1)πt/b)}_{i≤basis_dim}`. Failure of the search
/// is inconclusive.
pub fn check_theorem_b3(zeros: &SpectrumSeq, a: f64, basis_dim: usize) -> Result<SolvabilityReport> {
    check_theorem_b3_with(zeros, a, basis_dim, &SolvabilityConfig::default())
}

struct Search<'a> {
    d: &'a Determined,
    a: f64,
    b: f64,
    bound: f64,
    cfg: &'a SolvabilityConfig,
}

impl Search<'_> {
    fn pair(&self, coeffs: &[f64]) -> Result<AuxiliaryPair> {
        let b = self.b;
        let wm = |t: f64| coeffs.iter().enumerate().map(|(i, c)| c * (i as f64 * PI * t / b).cos()).sum::<f64>();
        let w = unfold(self.d, self.a, self.cfg.grid_n, &wm)?.map(|v| C64::new(v.re, 0.0));
        AuxiliaryPair::from_w(&w, self.a, self.cfg.grid_n / 2)
    }
}

impl CostFunction for Search<'_> {
    type Param = Vec<f64>;
    type Output = f64;

    fn cost(&self, p: &Vec<f64>) -> std::result::Result<f64, argmin::core::Error> {
        // the box is enforced by a penalty
        let excess: f64 = p.iter().map(|c| (c.abs() - self.bound).max(0.0)).sum();
        let margin = match self.pair(p) {
            Ok(pair) => pair.margin(self.cfg.aux_count, &self.cfg.zeros),
            Err(_) => -10.0,
        };
        Ok(-margin + excess)
    }
}

pub fn check_theorem_b3_with(zeros: &SpectrumSeq, a: f64, basis_dim: usize, cfg: &SolvabilityConfig) -> Result<SolvabilityReport> {
    if !(a > -1.0 && a < 1.0) {
        return Err(Error::InvalidInput(format!("the -1 < a < 1 check got a = {a}")));
    }
    let mut report = report_shell(Theorem::B3, a, cfg.grid_n)?;
    let d = match determine(zeros, a, cfg)? {
        Ok(d) => d,
        Err(c) => {
            report.conditions.push(c);
            return Ok(report.finish(false));
        }
    };
    let w0 = unfold(&d, a, cfg.grid_n, &|_| 0.0)?;
    report.conditions = data_conditions(&d, a, &w0, cfg);
    report.gamma = d.gamma.map(|g| g.0);
    report.omega_est = d.omega;
    let search = Search { d: &d, a, b: 1.0 - a.abs(), bound: 4.0 * (d.folded.sup_norm() + d.omega.abs() + 1.0), cfg };

    let mut best: (f64, Vec<f64>) = (-search.cost(&vec![0.0; basis_dim]).map_err(|e| Error::Fit(e.to_string()))?, vec![0.0; basis_dim]);
    if best.0 <= 0.0 && basis_dim > 0 {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let starts: Vec<Vec<f64>> = (0..cfg.search_starts)
            .map(|s| {
                if s == 0 {
                    vec![0.0; basis_dim]
                } else {
                    (0..basis_dim).map(|_| rng.gen_range(-0.25..0.25) * search.bound).collect()
                }
            })
            .collect();
        let step = 0.1 * search.bound;
        let results: Vec<(f64, Vec<f64>)> = starts
            .into_par_iter()
            .filter_map(|x0| {
                let mut simplex = vec![x0.clone()];
                for i in 0..basis_dim {
                    let mut v = x0.clone();
                    v[i] += step;
                    simplex.push(v);
                }
                let solver = NelderMead::new(simplex).with_sd_tolerance(1e-10).ok()?;
                let problem = Search { d: &d, a, b: search.b, bound: search.bound, cfg };
                let res = Executor::new(problem, solver)
                    .configure(|s| s.max_iters(cfg.search_iters).target_cost(-f64::MIN_POSITIVE))
                    .run()
                    .ok()?;
                let st = res.state();
                Some((-st.get_best_cost(), st.get_best_param()?.clone()))
            })
            .collect();
        for r in results {
            if r.0 > best.0 {
                best = r;
            }
        }
    }
    let pair = search.pair(&best.1)?;
    report.conditions.push(omega_condition(&pair, d.omega));
    let r = pair.check_or_fail(cfg.aux_count, &cfg.zeros);
    report.interlace_ok = r.interlacing.ok;
    report.nevanlinna_ok = r.nevanlinna.ok;
    report.conditions.push(cond(SEARCH, r.interlacing.ok, r.interlacing.margin));
    let b = search.b;
    let coeffs = best.1.clone();
    let wm = move |t: f64| coeffs.iter().enumerate().map(|(i, c)| c * (i as f64 * PI * t / b).cos()).sum::<f64>();
    report.w_reconstruction = unfold(&d, a, cfg.grid_n, &wm)?;
    Ok(report.finish(true))
}

/// `∫ w` over the reconstruction, for comparison with `ω/2`.
pub fn w_integral(report: &SolvabilityReport) -> Result<C64> {
    trapezoid(&report.w_reconstruction)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seq(kind: SpectrumKind, v: Vec<f64>) -> SpectrumSeq {
        SpectrumSeq::new(kind, 1, v.into_iter().map(|x| C64::new(x, 0.0)).collect())
    }

    #[test]
    fn zero_potential_lattices_interlace() {
        let s0 = seq(SpectrumKind::DirichletDirichlet, (1..=20).map(|k| (PI * k as f64).powi(2)).collect());
        let s1 = seq(SpectrumKind::DirichletNeumann, (1..=20).map(|k| (PI * (k as f64 - 0.5)).powi(2)).collect());
        assert!(interlace_check(&s0, &s1));
        assert!(!interlace_check(&s1, &s0));
    }

    #[test]
    fn equality_and_nonreal_break_interlacing() {
        let mut s0 = seq(SpectrumKind::DirichletDirichlet, (1..=5).map(|k| (PI * k as f64).powi(2)).collect());
        let mut s1 = seq(SpectrumKind::DirichletNeumann, (1..=5).map(|k| (PI * (k as f64 - 0.5)).powi(2)).collect());
        s1.values[0] = s0.values[0];
        assert!(!interlace_check(&s0, &s1));
        s1.values[0] = C64::new(2.0, 0.0);
        s0.values[2] = C64::new(s0.values[2].re, 1.0);
        let r = interlacing(&s0, &s1, REAL_TOL, TIE_TOL);
        assert!(!r.ok && r.nonreal && r.margin < 0.0);
    }

    #[test]
    fn free_weyl_function_is_nevanlinna() {
        let d0 = |l: C64| {
            let r = l.sqrt();
            if r.norm() < 1e-8 {
                ONE
            } else {
                r.sin() / r
            }
        };
        let d1 = |l: C64| l.sqrt().cos();
        assert!(nevanlinna_check(&d0, &d1, &default_samples(-20.0, 4000.0, 200)));
        // swapped roles give −1/M-type behaviour with the wrong sign
        assert!(!nevanlinna_check(&d1, &d0, &default_samples(-20.0, 4000.0, 200)));
    }

    #[test]
    fn auxiliary_zeros_of_zero_data() {
        let g = GridSpec::unit(100).unwrap();
        let pair = AuxiliaryPair::new(SampledFn::zeros(g), SampledFn::zeros(g), ZERO).unwrap();
        let r = pair.check(10, &ZeroConfig::default()).unwrap();
        for (k, z) in (1..=10).zip(&r.zeros0.values) {
            assert!((z.re - (PI * k as f64).powi(2)).abs() < 1e-8 * z.re);
        }
        assert!(r.interlacing.ok && r.nevanlinna.ok);
    }

    #[test]
    fn out_of_range_parameters_are_rejected() {
        let s = seq(SpectrumKind::TransmissionGeneral, vec![1.0, 2.0]);
        assert!(matches!(check_theorem_b2(&s, 0.5), Err(Error::InvalidInput(_))));
        assert!(matches!(check_theorem_b2(&s, 1.0), Err(Error::InvalidInput(_))));
        assert!(matches!(check_theorem_b3(&s, 1.0, 2), Err(Error::InvalidInput(_))));
        assert!(matches!(check_theorem_b1(&s, 0.0), Err(Error::InvalidInput(_))));
    }

    fn lattice(start: i64, n: usize, f: impl Fn(f64) -> f64) -> SpectrumSeq {
        let kind = if start == 2 { SpectrumKind::TransmissionA1 } else { SpectrumKind::TransmissionGeneral };
        SpectrumSeq::new(kind, start, (start..start + n as i64).map(|k| C64::new(f(k as f64), 0.0)).collect())
    }

    /// Zeros of `Δ₀ = sin ρ/ρ` and `Δ₁ = (π² − 4λ + 8η) cos ρ/(π² − 4λ)`.
    fn shifted_pair(eta: f64) -> (SpectrumSeq, SpectrumSeq) {
        let s0 = seq(SpectrumKind::DirichletDirichlet, (1..=20).map(|k| (PI * k as f64).powi(2)).collect());
        let mut v1 = vec![PI * PI / 4.0 + 2.0 * eta];
        v1.extend((2..=20).map(|k| (PI * (k as f64 - 0.5)).powi(2)));
        v1.sort_by(f64::total_cmp);
        (s0, seq(SpectrumKind::DirichletNeumann, v1))
    }

    #[test]
    fn first_neumann_shift_reaches_a_tie() {
        let (s0, s1) = shifted_pair(PI * PI / 8.0);
        let r = interlacing(&s0, &s1, REAL_TOL, TIE_TOL);
        assert!(r.ok && (r.margin - 0.5).abs() < 1e-12);
        let (s0, s1) = shifted_pair(3.0 * PI * PI / 8.0);
        assert!(!interlace_check(&s0, &s1));
        let (s0, s1) = shifted_pair(PI * PI / 2.0);
        assert!(!interlace_check(&s0, &s1));
    }

    #[test]
    fn nevanlinna_follows_the_shift() {
        let d0 = |l: C64| {
            let r = l.sqrt();
            r.sin() / r
        };
        let d1 = |eta: f64| move |l: C64| (PI * PI - 4.0 * l + 8.0 * eta) * l.sqrt().cos() / (PI * PI - 4.0 * l);
        let samples = default_samples(-50.0, 5000.0, 200);
        assert!(nevanlinna_check(&d0, &d1(PI * PI / 8.0), &samples));
        assert!(!nevanlinna_check(&d0, &d1(PI * PI / 2.0), &samples));
    }

    #[test]
    fn quarter_lattice_is_solvable_for_small_scale() {
        let s = lattice(2, 400, |k| PI * PI * k * k / 4.0);
        // γ = −1 is the scale with first shift π²/4
        let r = check_theorem_b1(&s, -1.0).unwrap();
        assert_eq!(r.verdict, Verdict::Pass);
        assert_eq!(r.gamma, Some(C64::new(-1.0, 0.0)));
        assert!(r.omega_est.abs() < 1e-9);
        // at γ = −3 the first pair ties and the scan halves once
        let r = check_theorem_b1(&s, -3.0).unwrap();
        assert_eq!(r.verdict, Verdict::Pass);
        assert_eq!(r.gamma, Some(C64::new(-1.5, 0.0)));
    }

    #[test]
    fn nonreal_entry_fails_the_sine_form() {
        let mut s = lattice(2, 400, |k| PI * PI * k * k / 4.0);
        s.values[3].im = 0.5;
        let r = check_theorem_b1(&s, -1.0).unwrap();
        assert_eq!(r.verdict, Verdict::Fail);
        assert!(r.conditions.iter().any(|c| c.name == "u_real" && !c.pass));
    }

    #[test]
    fn free_lattice_outside_the_unit_interval() {
        // q ≡ 0: Δ = sin ρ(1−a)/ρ, w ≡ 0, ω = 0, γ = 1 − a
        let s = lattice(1, 80, |k| (PI * k / 2.0).powi(2));
        let r = check_theorem_b2(&s, -1.0).unwrap();
        assert_eq!(r.verdict, Verdict::Pass, "{:?}", r.conditions);
        assert!((r.gamma.unwrap() - C64::new(2.0, 0.0)).norm() < 1e-10);
        assert!(r.omega_est.abs() < 1e-10);
        assert!(r.w_reconstruction.sup_norm() < 1e-8);
    }

    #[test]
    fn free_lattice_inside_the_unit_interval() {
        let s = lattice(1, 60, |k| (2.0 * PI * k).powi(2));
        let r = check_theorem_b3(&s, 0.5, 0).unwrap();
        assert_eq!(r.verdict, Verdict::Pass, "{:?}", r.conditions);
        assert!((r.gamma.unwrap() - C64::new(0.5, 0.0)).norm() < 1e-10);
    }

    #[test]
    fn broken_lattice_fails_without_error() {
        let mut s = lattice(1, 80, |k| (PI * k / 2.0).powi(2));
        s.values[2] += 20.0;
        let r = check_theorem_b2(&s, -1.0).unwrap();
        assert_eq!(r.verdict, Verdict::Fail);
        assert!(r.conditions.iter().any(|c| c.name == "lattice_matched" && !c.pass));
    }

    #[test]
    fn report_serializes() {
        let s = lattice(1, 40, |k| (2.0 * PI * k).powi(2));
        let r = check_theorem_b3(&s, 0.5, 0).unwrap();
        let j = r.to_json();
        assert_eq!(j["verdict"], "pass");
        assert_eq!(j["theorem"], "B3");
        assert_eq!(j["w_reconstruction"]["n"], 400);
    }
}
