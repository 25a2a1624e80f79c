//! Transformation-operator kernel `K(x,t)` on the triangle `|t| ≤ x ≤ 1`.
//!
//! The kernel is computed in characteristic coordinates `u = (x+t)/2`,
//! `v = (x−t)/2`, where `H(u,v) = K(u+v, u−v)` satisfies
//!
//! ```text
//! H(u,v) = ½∫₀ᵘ q − ½∫₀ᵛ q + ∫₀ᵘ∫₀ᵛ q(α+β) H(α,β) dβ dα,
//! ```
//!
//! which is the integral equation for `K` with the double integral taken
//! along characteristics. A kernel on an `x`-grid with `n` intervals uses
//! a `(u,v)` grid of step `h/2`, so that every node `(x_i, t_j)` with
//! `|j| ≤ i` is a grid node and `q` is needed on a grid with `2n` intervals.
//! The odd continuation `K(x,−t) = −K(x,t)` is exact: `H(u,v) = −H(v,u)`.

use std::fmt::Write as _;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::quad;
use crate::types::{GridSpec, Potential, SampledFn};

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

#[derive(Clone, Copy, Debug)]
pub struct KernelConfig {
    /// Sup-norm change between successive approximations.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for KernelConfig {
    fn default() -> Self {
        Self { tol: 1e-10, max_iter: 60 }
    }
}

/// Values on the triangular `(u,v)` grid `p + r ≤ m`.
#[derive(Clone, Debug)]
struct UvField {
    m: usize,
    data: Vec<C64>,
}

impl UvField {
    fn zeros(m: usize) -> Self {
        Self { m, data: vec![ZERO; (m + 1) * (m + 2) / 2] }
    }

    #[inline]
    fn idx(&self, p: usize, r: usize) -> usize {
        debug_assert!(p + r <= self.m);
        p * (self.m + 1) - p * p.saturating_sub(1) / 2 + r
    }

    #[inline]
    fn get(&self, p: usize, r: usize) -> C64 {
        self.data[self.idx(p, r)]
    }

    #[inline]
    fn set(&mut self, p: usize, r: usize, v: C64) {
        let i = self.idx(p, r);
        self.data[i] = v;
    }
}

#[derive(Clone, Debug)]
struct Derivatives {
    hu: UvField,
    hv: UvField,
}

/// Solved kernel with optional partial derivatives.
#[derive(Clone, Debug)]
pub struct TriangularKernel {
    grid: GridSpec,
    /// `q` at `u = s h/2`, `s = 0..=2n`.
    q_fine: Vec<C64>,
    h: UvField,
    derivs: Option<Derivatives>,
    converged: bool,
    /// Sup-norm change per successive approximation.
    pub history: Vec<f64>,
}

/// `q` sampled at the `2n + 1` half-step nodes used by a kernel on `grid`.
pub fn fine_potential(q: &Potential, grid: &GridSpec) -> Result<Vec<C64>> {
    let n = grid.n;
    let nq = q.n();
    if !(nq.is_multiple_of(n) || (2 * n).is_multiple_of(nq)) {
        return Err(Error::InvalidInput(format!(
            "potential grid n = {nq} is not commensurate with kernel grid n = {n}"
        )));
    }
    if (grid.a, grid.b) != (0.0, 1.0) {
        return Err(Error::InvalidInput("kernel grid must cover [0, 1]".into()));
    }
    let m = 2 * n;
    Ok((0..=m).map(|s| q.eval(s as f64 / m as f64)).collect())
}

/// Successive approximations for the kernel equation.
pub fn solve_kernel(q: &Potential, grid: GridSpec, cfg: KernelConfig) -> Result<TriangularKernel> {
    let q_fine = fine_potential(q, &grid)?;
    solve_kernel_fine(q_fine, grid, cfg)
}

/// Same as [`solve_kernel`] with `q` given directly on the half-step grid.
pub fn solve_kernel_fine(q_fine: Vec<C64>, grid: GridSpec, cfg: KernelConfig) -> Result<TriangularKernel> {
    let m = 2 * grid.n;
    if q_fine.len() != m + 1 {
        return Err(Error::InvalidInput(format!(
            "half-step potential needs {} samples, got {}",
            m + 1,
            q_fine.len()
        )));
    }
    let sigma = 1.0 / m as f64;
    let g: Vec<C64> = quad::cumulative_trapezoid(&q_fine, sigma).into_iter().map(|v| v * 0.5).collect();

    let mut h0 = UvField::zeros(m);
    for p in 0..=m {
        for r in 0..=(m - p) {
            h0.set(p, r, g[p] - g[r]);
        }
    }
    let mut h = h0.clone();
    let mut history = Vec::new();
    let mut integral = UvField::zeros(m);
    let w = 0.25 * sigma * sigma;
    let mut converged = false;
    for _ in 0..cfg.max_iter {
        // Product trapezoid of F = q(α+β) H(α,β) over [0,u_p]×[0,v_r].
        // Filled by anti-diagonals for p ≥ r and mirrored, which keeps the
        // antisymmetry exact in floating point.
        for s in 0..=m {
            for r in 0..=s / 2 {
                let p = s - r;
                let val = if r == 0 || p == r {
                    ZERO
                } else {
                    let f = |a: usize, b: usize| q_fine[a + b] * h.get(a, b);
                    integral.get(p - 1, r) + integral.get(p, r - 1) - integral.get(p - 1, r - 1)
                        + (f(p, r) + f(p - 1, r) + f(p, r - 1) + f(p - 1, r - 1)) * w
                };
                integral.set(p, r, val);
                integral.set(r, p, -val);
            }
        }
        let mut diff: f64 = 0.0;
        for (k, slot) in h.data.iter_mut().enumerate() {
            let next = h0.data[k] + integral.data[k];
            diff = diff.max((next - *slot).norm());
            *slot = next;
        }
        history.push(diff);
        if !diff.is_finite() {
            break;
        }
        if diff <= cfg.tol {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::IterationLimit {
            iterations: history.len(),
            residual: history.last().copied().unwrap_or(f64::NAN),
        });
    }
    Ok(TriangularKernel { grid, q_fine, h, derivs: None, converged, history })
}

impl TriangularKernel {
    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    pub fn n(&self) -> usize {
        self.grid.n
    }

    pub fn q_fine(&self) -> &[C64] {
        &self.q_fine
    }

    pub fn iterations(&self) -> usize {
        self.history.len()
    }

    /// `K(x_i, t_j)` for `|j| ≤ i`, zero outside the triangle.
    pub fn value(&self, i: usize, j: i64) -> C64 {
        if j.unsigned_abs() as usize > i {
            return ZERO;
        }
        let p = (i as i64 + j) as usize;
        let r = (i as i64 - j) as usize;
        self.h.get(p, r)
    }

    /// `K(1, t_j)`, `j = 0..=n`.
    pub fn top_row(&self) -> Vec<C64> {
        (0..=self.n()).map(|j| self.value(self.n(), j as i64)).collect()
    }

    pub fn has_derivatives(&self) -> bool {
        self.derivs.is_some()
    }

    /// `(K_x, K_t)` at `(x_i, t_j)`.
    pub fn derivatives_at(&self, i: usize, j: i64) -> Option<(C64, C64)> {
        let d = self.derivs.as_ref()?;
        if j.unsigned_abs() as usize > i {
            return Some((ZERO, ZERO));
        }
        let p = (i as i64 + j) as usize;
        let r = (i as i64 - j) as usize;
        let (hu, hv) = (d.hu.get(p, r), d.hv.get(p, r));
        Some(((hu + hv) * 0.5, (hu - hv) * 0.5))
    }

    /// Largest `|K|` over the stored triangle.
    pub fn sup_norm(&self) -> f64 {
        self.h.data.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// CSV rows `x,t,re,im` over `|t| ≤ x` on the `x`-grid.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("x,t,re,im\n");
        let h = self.grid.h();
        for i in 0..=self.n() {
            for j in -(i as i64)..=(i as i64) {
                let v = self.value(i, j);
                let _ = writeln!(s, "{},{},{:e},{:e}", i as f64 * h, j as f64 * h, v.re, v.im);
            }
        }
        s
    }
}

/// `K_x`, `K_t` from the differentiated kernel equation:
///
/// ```text
/// H_u(u,v) =  ½q(u) + ∫₀ᵛ q(u+β) H(u,β) dβ
/// H_v(u,v) = −½q(v) + ∫₀ᵘ q(α+v) H(α,v) dα
/// ```
///
/// with `K_x = (H_u + H_v)/2` and `K_t = (H_u − H_v)/2`.
pub fn kernel_derivatives(mut k: TriangularKernel, q: &Potential) -> Result<TriangularKernel> {
    if !k.converged {
        return Err(Error::InvalidState("kernel was not solved to tolerance".into()));
    }
    let q_fine = fine_potential(q, &k.grid)?;
    let scale = q_fine.iter().map(|v| v.norm()).fold(1.0, f64::max);
    if q_fine.iter().zip(&k.q_fine).any(|(a, b)| (a - b).norm() > 1e-12 * scale) {
        return Err(Error::InvalidInput("potential differs from the one used to solve the kernel".into()));
    }
    k.derivs = Some(derivative_fields(&k));
    Ok(k)
}

fn derivative_fields(k: &TriangularKernel) -> Derivatives {
    let m = k.h.m;
    let sigma = 1.0 / m as f64;
    let q = &k.q_fine;
    let mut hu = UvField::zeros(m);
    let mut hv = UvField::zeros(m);
    for p in 0..=m {
        let mut acc = ZERO;
        let mut prev = q[p] * k.h.get(p, 0);
        hu.set(p, 0, q[p] * 0.5);
        for r in 1..=(m - p) {
            let cur = q[p + r] * k.h.get(p, r);
            acc += (prev + cur) * (0.5 * sigma);
            prev = cur;
            hu.set(p, r, q[p] * 0.5 + acc);
        }
    }
    for r in 0..=m {
        let mut acc = ZERO;
        let mut prev = q[r] * k.h.get(0, r);
        hv.set(0, r, -q[r] * 0.5);
        for p in 1..=(m - r) {
            let cur = q[p + r] * k.h.get(p, r);
            acc += (prev + cur) * (0.5 * sigma);
            prev = cur;
            hv.set(p, r, -q[r] * 0.5 + acc);
        }
    }
    Derivatives { hu, hv }
}

/// `(H_u, H_v)` at the hypotenuse nodes `(p, 2n − p)`, `p = 0..=2n`,
/// without storing the full derivative fields.
pub(crate) fn hypotenuse_derivatives(k: &TriangularKernel) -> (Vec<C64>, Vec<C64>) {
    let m = k.h.m;
    let sigma = 1.0 / m as f64;
    let q = &k.q_fine;
    let mut hu = Vec::with_capacity(m + 1);
    let mut hv = Vec::with_capacity(m + 1);
    for p in 0..=m {
        let r = m - p;
        let fu: Vec<C64> = (0..=r).map(|b| q[p + b] * k.h.get(p, b)).collect();
        let fv: Vec<C64> = (0..=p).map(|a| q[a + r] * k.h.get(a, r)).collect();
        let iu = if r == 0 { ZERO } else { quad::trapezoid(&fu, sigma).unwrap_or(ZERO) };
        let iv = if p == 0 { ZERO } else { quad::trapezoid(&fv, sigma).unwrap_or(ZERO) };
        hu.push(q[p] * 0.5 + iu);
        hv.push(-q[r] * 0.5 + iv);
    }
    (hu, hv)
}

/// Boundary traces `w₀(t) = K_t(1,t)`, `w₁(t) = K_x(1,t)` on `[0,1]`.
/// `w₀` extends evenly and `w₁` oddly to `[−1, 0)`.
#[derive(Clone, Debug, PartialEq)]
pub struct CauchyData {
    pub w0: SampledFn,
    pub w1: SampledFn,
}

impl CauchyData {
    pub fn new(w0: SampledFn, w1: SampledFn) -> Result<Self> {
        if w0.grid != w1.grid || (w0.grid.a, w0.grid.b) != (0.0, 1.0) {
            return Err(Error::InvalidInput("Cauchy data must share one grid on [0,1]".into()));
        }
        Ok(Self { w0, w1 })
    }

    pub fn zeros(n: usize) -> Result<Self> {
        let g = GridSpec::unit(n)?;
        Self::new(SampledFn::zeros(g), SampledFn::zeros(g))
    }

    pub fn grid(&self) -> GridSpec {
        self.w0.grid
    }

    /// `w_j(t)` on `[−1, 1]` with `w_j(−t) = (−1)^j w_j(t)`.
    pub fn eval_extended(&self, j: usize, t: f64) -> C64 {
        let f = if j == 0 { &self.w0 } else { &self.w1 };
        let v = f.eval(t.abs());
        if t < 0.0 && j == 1 {
            -v
        } else {
            v
        }
    }

    /// `ω = 2K(1,1) = 2∫₀¹ w₀`.
    pub fn omega(&self) -> C64 {
        quad::trapezoid(&self.w0.values, self.grid().h()).unwrap_or(ZERO) * 2.0
    }

    /// `(w₀(1) + w₁(1))/2`, which equals `q(1)/4`.
    pub fn eta(&self) -> C64 {
        (self.w0.values.last().unwrap() + self.w1.values.last().unwrap()) * 0.5
    }

    /// Combines data from grids `n` and `2n` to cancel the `O(h²)` error term.
    pub fn richardson(coarse: &CauchyData, fine: &CauchyData) -> Result<CauchyData> {
        let n = coarse.grid().n;
        if fine.grid().n != 2 * n {
            return Err(Error::InvalidInput("Richardson needs grids n and 2n".into()));
        }
        let comb = |c: &SampledFn, f: &SampledFn| {
            let values = (0..=n).map(|j| (f.values[2 * j] * 4.0 - c.values[j]) / 3.0).collect();
            SampledFn { grid: c.grid, values }
        };
        CauchyData::new(comb(&coarse.w0, &fine.w0), comb(&coarse.w1, &fine.w1))
    }
}

pub fn cauchy_data_from_kernel(k: &TriangularKernel) -> Result<CauchyData> {
    if !k.has_derivatives() {
        return Err(Error::InvalidState("kernel derivatives have not been computed".into()));
    }
    let n = k.n();
    let g = GridSpec::unit(n)?;
    let mut w0 = Vec::with_capacity(n + 1);
    let mut w1 = Vec::with_capacity(n + 1);
    for j in 0..=n {
        let (kx, kt) = k.derivatives_at(n, j as i64).unwrap();
        w0.push(kt);
        w1.push(kx);
    }
    CauchyData::new(SampledFn::new(g, w0)?, SampledFn::new(g, w1)?)
}

/// `max_i |K(x_i,x_i) − ½∫₀^{x_i} q|` with the reference integral taken by
/// a fourth-order rule on the half-step samples.
pub fn goursat_residual(k: &TriangularKernel, q: &Potential) -> f64 {
    let Ok(q_fine) = fine_potential(q, &k.grid) else {
        return f64::INFINITY;
    };
    let m = q_fine.len() - 1;
    let cum = quad::cumulative_simpson(&q_fine, 1.0 / m as f64);
    (0..=k.n()).map(|i| (k.value(i, i as i64) - cum[2 * i] * 0.5).norm()).fold(0.0, f64::max)
}

/// Solve, differentiate and extract Cauchy data in one call.
pub fn cauchy_data_for(q: &Potential, n: usize, cfg: KernelConfig) -> Result<CauchyData> {
    let grid = GridSpec::unit(n)?;
    let k = solve_kernel(q, grid, cfg)?;
    let k = kernel_derivatives(k, q)?;
    cauchy_data_from_kernel(&k)
}

/// Richardson-extrapolated Cauchy data from grids `n` and `2n`.
pub fn cauchy_data_extrapolated(q: &Potential, n: usize, cfg: KernelConfig) -> Result<CauchyData> {
    let coarse = cauchy_data_for(q, n, cfg)?;
    let fine = cauchy_data_for(q, 2 * n, cfg)?;
    CauchyData::richardson(&coarse, &fine)
}

/// `S(1,λ) = sin ρ/ρ + ∫₀¹ K(1,t) sin ρt/ρ dt`.
pub fn s_at_one(k: &TriangularKernel, lambda: C64) -> C64 {
    let rho = lambda.sqrt();
    let row = k.top_row();
    let (_, s_int) = quad::cos_sin_integrals(&row, 0.0, k.grid.h(), rho);
    if rho.norm() < 1e-8 {
        let moments = quad::power_moments(&row, 0.0, k.grid.h(), 1);
        return C64::new(1.0, 0.0) + moments[1];
    }
    rho.sin() / rho + s_int / rho
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fine_grid_index_roundtrip(m: usize) {
        let f = UvField::zeros(m);
        let mut seen = vec![false; f.data.len()];
        for p in 0..=m {
            for r in 0..=(m - p) {
                let i = f.idx(p, r);
                assert!(!seen[i]);
                seen[i] = true;
            }
        }
        assert!(seen.iter().all(|&s| s));
    }

    #[test]
    fn packed_index_is_a_bijection() {
        for m in [2, 3, 8, 17] {
            fine_grid_index_roundtrip(m);
        }
    }

    #[test]
    fn zero_potential_gives_zero_kernel() {
        let q = Potential::zero(20).unwrap();
        let k = solve_kernel(&q, GridSpec::unit(20).unwrap(), KernelConfig::default()).unwrap();
        assert_eq!(k.sup_norm(), 0.0);
        let k = kernel_derivatives(k, &q).unwrap();
        let cd = cauchy_data_from_kernel(&k).unwrap();
        assert_eq!(cd.w0.sup_norm(), 0.0);
        assert_eq!(cd.w1.sup_norm(), 0.0);
        assert_eq!(goursat_residual(&k, &q), 0.0);
    }

    #[test]
    fn constant_potential_diagonal() {
        let c = 1.7;
        let q = Potential::constant(40, c).unwrap();
        let k = solve_kernel(&q, GridSpec::unit(40).unwrap(), KernelConfig::default()).unwrap();
        for i in 0..=40 {
            let x = i as f64 / 40.0;
            assert!((k.value(i, i as i64).re - c * x / 2.0).abs() < 1e-12);
            assert!(k.value(i, 0).norm() < 1e-15);
        }
    }

    #[test]
    fn odd_symmetry_is_exact() {
        let q = Potential::from_real_fn(30, |x| (3.0 * x).cos() + x).unwrap();
        let k = solve_kernel(&q, GridSpec::unit(30).unwrap(), KernelConfig::default()).unwrap();
        for i in 0..=30 {
            for j in 0..=(i as i64) {
                assert_eq!(k.value(i, j) + k.value(i, -j), C64::new(0.0, 0.0));
            }
        }
    }

    #[test]
    fn derivatives_need_converged_kernel() {
        let q = Potential::constant(10, 1.0).unwrap();
        let k = solve_kernel(&q, GridSpec::unit(10).unwrap(), KernelConfig::default()).unwrap();
        assert!(cauchy_data_from_kernel(&k).is_err());
        let cfg = KernelConfig { tol: 1e-30, max_iter: 3 };
        match solve_kernel(&q, GridSpec::unit(10).unwrap(), cfg) {
            Err(Error::IterationLimit { iterations, .. }) => assert_eq!(iterations, 3),
            other => panic!("expected iteration limit, got {other:?}"),
        }
    }

    #[test]
    fn incommensurate_grid_is_rejected() {
        let q = Potential::constant(7, 1.0).unwrap();
        assert!(solve_kernel(&q, GridSpec::unit(10).unwrap(), KernelConfig::default()).is_err());
    }

    #[test]
    fn w1_vanishes_at_zero() {
        let q = Potential::linear_centered(50).unwrap();
        let cd = cauchy_data_for(&q, 50, KernelConfig::default()).unwrap();
        assert!(cd.w1.values[0].norm() < 1e-15);
    }
}
