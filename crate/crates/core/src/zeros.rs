//! Zeros of entire functions: seeded secant refinement and an
//! argument-principle audit over rectangles in the `λ`-plane.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use rayon::prelude::*;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug)]
pub struct ZeroConfig {
    /// Accept a zero when `|f| ≤ tol · local scale`.
    pub tol: f64,
    pub max_iter: usize,
    pub audit: bool,
    /// Half-height of the audit rectangle; `None` picks half the first gap.
    pub window_height: Option<f64>,
    /// Largest argument change between contour samples.
    pub max_arg_step: f64,
}

impl Default for ZeroConfig {
    fn default() -> Self {
        Self { tol: 1e-8, max_iter: 80, audit: true, window_height: None, max_arg_step: 0.5 }
    }
}

/// Rectangle `[re_lo, re_hi] × [im_lo, im_hi]`.
const SPLIT_OFFSET: f64 = 0.0371;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Rect {
    pub re_lo: f64,
    pub re_hi: f64,
    pub im_lo: f64,
    pub im_hi: f64,
}

impl Rect {
    pub fn contains(&self, z: C64) -> bool {
        z.re >= self.re_lo && z.re <= self.re_hi && z.im >= self.im_lo && z.im <= self.im_hi
    }

    fn as_array(&self) -> [f64; 4] {
        [self.re_lo, self.re_hi, self.im_lo, self.im_hi]
    }

    fn corners(&self) -> [C64; 4] {
        [
            C64::new(self.re_lo, self.im_lo),
            C64::new(self.re_hi, self.im_lo),
            C64::new(self.re_hi, self.im_hi),
            C64::new(self.re_lo, self.im_hi),
        ]
    }

    /// Halves, cut slightly off centre: real data puts zeros on the axis
    /// of symmetric rectangles, where a centred cut would pass through them.
    fn split(&self) -> [Rect; 2] {
        split_offset(self, SPLIT_OFFSET)
    }

    fn diameter(&self) -> f64 {
        (self.re_hi - self.re_lo).hypot(self.im_hi - self.im_lo)
    }
}

/// Secant iteration in `ρ = √λ` (in `λ` near the origin), with the step
/// halved while `|f|` grows.
pub fn refine_zero(f: &(dyn Fn(C64) -> C64 + Sync), seed: C64, cfg: &ZeroConfig) -> std::result::Result<C64, (C64, f64)> {
    let in_lambda = seed.norm() < 4.0;
    let g = |z: C64| if in_lambda { f(z) } else { f(z * z) };
    let mut x0 = if in_lambda { seed } else { seed.sqrt() };
    let d = 1e-4 * x0.norm().max(1.0);
    let mut x1 = x0 + d;
    let mut g0 = g(x0);
    let mut g1 = g(x1);
    if g0.norm() < g1.norm() {
        std::mem::swap(&mut x0, &mut x1);
        std::mem::swap(&mut g0, &mut g1);
    }
    let mut converged = false;
    for _ in 0..cfg.max_iter {
        if g1 == C64::new(0.0, 0.0) {
            converged = true;
            break;
        }
        let denom = g1 - g0;
        if denom.norm() == 0.0 || !denom.is_finite() {
            break;
        }
        let mut step = -g1 * (x1 - x0) / denom;
        let mut x2 = x1 + step;
        let mut g2 = g(x2);
        let mut halvings = 0;
        while !(g2.norm() <= g1.norm()) && halvings < 12 {
            step *= 0.5;
            x2 = x1 + step;
            g2 = g(x2);
            halvings += 1;
        }
        x0 = x1;
        g0 = g1;
        x1 = x2;
        g1 = g2;
        if step.norm() <= 1e-14 * x1.norm().max(1.0) {
            converged = true;
            break;
        }
    }
    let root = if in_lambda { x1 } else { x1 * x1 };
    // Local scale: |f| a quarter step away in the refinement variable.
    let scale = if in_lambda {
        f(root + 0.25).norm().max(f(root - 0.25).norm())
    } else {
        let r = root.sqrt();
        f((r + 0.25) * (r + 0.25)).norm().max(f((r - 0.25) * (r - 0.25)).norm())
    };
    let res = f(root).norm();
    if converged && root.is_finite() && res <= cfg.tol * scale.max(f64::MIN_POSITIVE) {
        Ok(root)
    } else {
        Err((root, res / scale.max(f64::MIN_POSITIVE)))
    }
}

/// Winding number of `f` around `rect`, sampling each side until the
/// argument changes by less than `max_arg_step` between samples.
pub fn count_zeros(f: &(dyn Fn(C64) -> C64 + Sync), rect: Rect, cfg: &ZeroConfig) -> Result<i64> {
    let corners = rect.corners();
    let total: Result<Vec<f64>> = (0..4)
        .into_par_iter()
        .map(|i| {
            let (a, b) = (corners[i], corners[(i + 1) % 4]);
            side_winding(f, a, b, cfg.max_arg_step)
        })
        .collect();
    let total: f64 = total?.iter().sum();
    Ok((total / (2.0 * PI)).round() as i64)
}

fn side_winding(f: &(dyn Fn(C64) -> C64 + Sync), a: C64, b: C64, max_step: f64) -> Result<f64> {
    // characteristic functions oscillate on the scale of ρ = √λ
    let n0 = (64.0 + 16.0 * (b.sqrt() - a.sqrt()).norm()).min(20000.0) as usize;
    let mut pts: Vec<(C64, C64)> = (0..=n0)
        .map(|i| {
            let z = a + (b - a) * (i as f64 / n0 as f64);
            (z, f(z))
        })
        .collect();
    let mut acc = 0.0;
    let mut stack: Vec<((C64, C64), (C64, C64), u32)> = Vec::new();
    for w in pts.windows(2).rev() {
        stack.push((w[0], w[1], 0));
    }
    pts.clear();
    while let Some(((z0, f0), (z1, f1), depth)) = stack.pop() {
        if f0 == C64::new(0.0, 0.0) || f1 == C64::new(0.0, 0.0) || !f0.is_finite() || !f1.is_finite() {
            return Err(Error::InvalidInput(format!("zero or non-finite value on the contour near {z0}")));
        }
        let d = (f1 / f0).arg();
        let zm = (z0 + z1) * 0.5;
        let fm = f(zm);
        // the midpoint guards against a full turn hiding between samples
        let split = fm != C64::new(0.0, 0.0) && fm.is_finite() && {
            let d2 = (fm / f0).arg() + (f1 / fm).arg();
            d.abs() > max_step || (d2 - d).abs() > 1e-6
        };
        if split && depth < 40 {
            stack.push(((zm, fm), (z1, f1), depth + 1));
            stack.push(((z0, f0), (zm, fm), depth + 1));
        } else {
            acc += d;
        }
    }
    Ok(acc)
}

/// All zeros inside `rect`, by recursive bisection on the winding number.
/// A zero of multiplicity `m` is listed `m` times.
pub fn locate_in_rect(f: &(dyn Fn(C64) -> C64 + Sync), rect: Rect, cfg: &ZeroConfig) -> Result<Vec<C64>> {
    let count = count_zeros(f, rect, cfg)?;
    locate_counted(f, rect, count, cfg, 0)
}

fn locate_counted(f: &(dyn Fn(C64) -> C64 + Sync), rect: Rect, count: i64, cfg: &ZeroConfig, depth: u32) -> Result<Vec<C64>> {
    if count <= 0 {
        return Ok(Vec::new());
    }
    if count == 1 || depth > 30 || rect.diameter() < 1e-9 {
        let center = C64::new(0.5 * (rect.re_lo + rect.re_hi), 0.5 * (rect.im_lo + rect.im_hi));
        if let Ok(z) = refine_zero(f, center, cfg) {
            if rect.contains(z) || count > 1 {
                return Ok(vec![z; count as usize]);
            }
        }
        if depth > 30 || rect.diameter() < 1e-9 {
            return Err(Error::MissedZero { rect: rect.as_array(), counted: count, found: 0 });
        }
    }
    let mut halves = rect.split();
    let mut c0 = count_zeros(f, halves[0], cfg);
    let mut nudge = 1e-7;
    while c0.is_err() && nudge < 1e-2 {
        // a zero sits on the dividing line
        halves = split_offset(&rect, SPLIT_OFFSET + nudge);
        c0 = count_zeros(f, halves[0], cfg);
        nudge *= 10.0;
    }
    let c0 = c0?;
    let mut out = locate_counted(f, halves[0], c0, cfg, depth + 1)?;
    out.extend(locate_counted(f, halves[1], count - c0, cfg, depth + 1)?);
    Ok(out)
}

fn split_offset(r: &Rect, frac: f64) -> [Rect; 2] {
    if r.re_hi - r.re_lo >= r.im_hi - r.im_lo {
        let mid = 0.5 * (r.re_lo + r.re_hi) + frac * (r.re_hi - r.re_lo);
        [Rect { re_hi: mid, ..*r }, Rect { re_lo: mid, ..*r }]
    } else {
        let mid = 0.5 * (r.im_lo + r.im_hi) + frac * (r.im_hi - r.im_lo);
        [Rect { im_hi: mid, ..*r }, Rect { im_lo: mid, ..*r }]
    }
}

/// Refines one zero per seed, then audits the count over `rect`.
/// Returns the refined zeros in seed order plus any extra zeros the audit
/// uncovered, located by bisection.
pub fn find_zeros(
    f: &(dyn Fn(C64) -> C64 + Sync),
    seeds: &[(i64, C64)],
    rect: Option<Rect>,
    cfg: &ZeroConfig,
) -> Result<(Vec<C64>, Vec<C64>)> {
    let refined: Vec<std::result::Result<C64, Error>> = seeds
        .par_iter()
        .map(|&(k, s)| {
            refine_zero(f, s, cfg).map_err(|(_, res)| Error::ZeroNotConverged { index: k, seed: s, residual: res })
        })
        .collect();
    let mut found = Vec::with_capacity(seeds.len());
    for r in refined {
        found.push(r?);
    }
    let mut extra = Vec::new();
    if cfg.audit && seeds.len() >= 2 {
        let rect = rect.unwrap_or_else(|| default_rect(seeds, cfg));
        let counted = count_zeros(f, rect, cfg)?;
        let inside: Vec<C64> = found.iter().copied().filter(|z| rect.contains(*z)).collect();
        let distinct = dedup_count(&inside);
        if distinct < inside.len() || inside.len() < seeds.len() {
            return Err(Error::MissedZero { rect: rect.as_array(), counted, found: distinct });
        }
        if counted > inside.len() as i64 {
            let all = locate_in_rect(f, rect, cfg)?;
            let mut pool = inside.clone();
            for z in all {
                let scale = z.norm().max(1.0);
                if let Some(i) = pool.iter().position(|p| (p - z).norm() < 1e-6 * scale) {
                    pool.swap_remove(i);
                } else {
                    extra.push(z);
                }
            }
            if (inside.len() + extra.len()) as i64 != counted {
                return Err(Error::MissedZero { rect: rect.as_array(), counted, found: inside.len() + extra.len() });
            }
        } else if counted < inside.len() as i64 {
            return Err(Error::MissedZero { rect: rect.as_array(), counted, found: inside.len() });
        }
    }
    Ok((found, extra))
}

fn default_rect(seeds: &[(i64, C64)], cfg: &ZeroConfig) -> Rect {
    let first = seeds[0].1.re;
    let second = seeds[1].1.re;
    let n = seeds.len();
    let last = seeds[n - 1].1.re;
    let before = seeds[n - 2].1.re;
    let gap0 = second - first;
    Rect {
        re_lo: first - 0.5 * gap0,
        re_hi: last + 0.5 * (last - before),
        im_lo: -cfg.window_height.unwrap_or(0.5 * gap0),
        im_hi: cfg.window_height.unwrap_or(0.5 * gap0),
    }
}

fn dedup_count(zs: &[C64]) -> usize {
    let mut n = 0;
    for (i, z) in zs.iter().enumerate() {
        let scale = z.norm().max(1.0);
        if !zs[..i].iter().any(|p| (p - z).norm() < 1e-8 * scale) {
            n += 1;
        }
    }
    n
}
