//! Shared data model: uniform grids, sampled functions, potentials and
//! eigenvalue sequences.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad;

pub type C64 = Complex64;

/// Uniform grid with `n` intervals on `[a, b]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub n: usize,
    pub a: f64,
    pub b: f64,
}

impl GridSpec {
    pub fn new(n: usize, a: f64, b: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidInput(format!("grid needs n >= 2 intervals, got {n}")));
        }
        if !(b > a) || !a.is_finite() || !b.is_finite() {
            return Err(Error::InvalidInput(format!("grid endpoints [{a}, {b}] are not increasing")));
        }
        Ok(Self { n, a, b })
    }

    /// Grid on the unit interval.
    pub fn unit(n: usize) -> Result<Self> {
        Self::new(n, 0.0, 1.0)
    }

    pub fn h(&self) -> f64 {
        (self.b - self.a) / self.n as f64
    }

    pub fn len(&self) -> usize {
        self.n + 1
    }

    pub fn node(&self, i: usize) -> f64 {
        if i == self.n {
            self.b
        } else {
            self.a + i as f64 * self.h()
        }
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..=self.n).map(move |i| self.node(i))
    }

    pub fn refined(&self, factor: usize) -> GridSpec {
        GridSpec { n: self.n * factor, a: self.a, b: self.b }
    }
}

/// Complex samples of a function at the nodes of a uniform grid.
#[derive(Clone, Debug, PartialEq)]
pub struct SampledFn {
    pub grid: GridSpec,
    pub values: Vec<C64>,
}

impl SampledFn {
    pub fn new(grid: GridSpec, values: Vec<C64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidInput(format!(
                "{} samples for a grid of {} nodes",
                values.len(),
                grid.len()
            )));
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: GridSpec, f: impl Fn(f64) -> C64) -> Self {
        let values = grid.nodes().map(f).collect();
        Self { grid, values }
    }

    pub fn zeros(grid: GridSpec) -> Self {
        Self { grid, values: vec![C64::new(0.0, 0.0); grid.len()] }
    }

    /// Piecewise-linear interpolation; clamps to the grid's endpoints.
    pub fn eval(&self, x: f64) -> C64 {
        quad::interp_linear(&self.values, self.grid.a, self.grid.h(), x)
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Sup-norm distance to `f` sampled at the same nodes.
    pub fn sup_dist(&self, f: impl Fn(f64) -> C64) -> f64 {
        self.grid
            .nodes()
            .zip(&self.values)
            .map(|(x, v)| (v - f(x)).norm())
            .fold(0.0, f64::max)
    }

    pub fn map(&self, f: impl Fn(C64) -> C64) -> SampledFn {
        SampledFn { grid: self.grid, values: self.values.iter().map(|&v| f(v)).collect() }
    }

    pub fn is_real(&self, tol: f64) -> bool {
        let scale = self.sup_norm().max(1.0);
        self.values.iter().all(|v| v.im.abs() <= tol * scale)
    }
}

/// Composite trapezoid quadrature over the function's grid.
pub fn trapezoid(f: &SampledFn) -> Result<C64> {
    quad::trapezoid(&f.values, f.grid.h())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Smoothness {
    L2,
    W21,
}

/// A potential `q` sampled at the nodes of a uniform grid on `[0, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Potential {
    samples: SampledFn,
    mean: C64,
    pub smoothness: Smoothness,
}

impl Potential {
    pub fn from_samples(samples: Vec<C64>, smoothness: Smoothness) -> Result<Self> {
        if samples.len() < 3 {
            return Err(Error::InvalidInput("a potential needs at least 3 samples".into()));
        }
        let grid = GridSpec::unit(samples.len() - 1)?;
        let samples = SampledFn::new(grid, samples)?;
        let mean = trapezoid(&samples)?;
        Ok(Self { samples, mean, smoothness })
    }

    pub fn from_fn(n: usize, smoothness: Smoothness, f: impl Fn(f64) -> C64) -> Result<Self> {
        let grid = GridSpec::unit(n)?;
        Self::from_samples(SampledFn::from_fn(grid, f).values, smoothness)
    }

    pub fn from_real_fn(n: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::from_fn(n, Smoothness::W21, |x| C64::new(f(x), 0.0))
    }

    pub fn zero(n: usize) -> Result<Self> {
        Self::from_real_fn(n, |_| 0.0)
    }

    pub fn constant(n: usize, c: f64) -> Result<Self> {
        Self::from_real_fn(n, |_| c)
    }

    /// `q(x) = x - 1/2`: zero mean, `q(1) = 1/2`.
    pub fn linear_centered(n: usize) -> Result<Self> {
        Self::from_real_fn(n, |x| x - 0.5)
    }

    pub fn n(&self) -> usize {
        self.samples.grid.n
    }

    pub fn grid(&self) -> GridSpec {
        self.samples.grid
    }

    pub fn samples(&self) -> &[C64] {
        &self.samples.values
    }

    pub fn as_sampled(&self) -> &SampledFn {
        &self.samples
    }

    /// Cached trapezoid value of `∫₀¹ q`.
    pub fn mean(&self) -> C64 {
        self.mean
    }

    /// Recomputes the mean and compares it with the cached value.
    pub fn revalidate_mean(&self, tol: f64) -> bool {
        trapezoid(&self.samples).map(|m| (m - self.mean).norm() <= tol).unwrap_or(false)
    }

    pub fn endpoint(&self) -> C64 {
        *self.samples.values.last().expect("nonempty")
    }

    /// `η = q(1) / 4`.
    pub fn eta(&self) -> C64 {
        self.endpoint() / 4.0
    }

    pub fn eval(&self, x: f64) -> C64 {
        self.samples.eval(x)
    }

    /// Linear resampling onto a grid with `n` intervals.
    pub fn resample(&self, n: usize) -> Result<Potential> {
        if n == self.n() {
            return Ok(self.clone());
        }
        Potential::from_fn(n, self.smoothness, |x| self.eval(x))
    }

    pub fn is_real(&self, tol: f64) -> bool {
        self.samples.is_real(tol)
    }

    /// `∫₀¹ |q|` by the trapezoid rule.
    pub fn l1_norm(&self) -> f64 {
        let abs: Vec<C64> = self.samples.values.iter().map(|v| C64::new(v.norm(), 0.0)).collect();
        quad::trapezoid(&abs, self.samples.grid.h()).map(|v| v.re).unwrap_or(0.0)
    }
}

/// Membership test for the class of `a = 1` problems with a zero-mean
/// `W₂¹` potential and `q(1) ≠ 0`. Sobolev membership cannot be inferred
/// from samples, so the declared smoothness is trusted.
pub fn validate_class_r(q: &Potential, mean_tol: f64) -> bool {
    q.mean().norm() <= mean_tol && q.endpoint().norm() > 0.0 && q.smoothness == Smoothness::W21
}

/// Norm `‖f‖_{L2} + ‖f'‖_{L2}` with `f'` by central differences and
/// one-sided second-order differences at the ends.
pub fn w21_norm(f: &SampledFn) -> f64 {
    let h = f.grid.h();
    let sq: Vec<C64> = f.values.iter().map(|v| C64::new(v.norm_sqr(), 0.0)).collect();
    let l2 = quad::trapezoid(&sq, h).map(|v| v.re.sqrt()).unwrap_or(0.0);
    let d = quad::derivative(&f.values, h);
    let dsq: Vec<C64> = d.iter().map(|v| C64::new(v.norm_sqr(), 0.0)).collect();
    let l2d = quad::trapezoid(&dsq, h).map(|v| v.re.sqrt()).unwrap_or(0.0);
    l2 + l2d
}

/// `‖p − q‖_{W₂¹}` on the finer of the two grids.
pub fn w21_distance(p: &Potential, q: &Potential) -> Result<f64> {
    let n = p.n().max(q.n());
    let (p, q) = (p.resample(n)?, q.resample(n)?);
    let diff: Vec<C64> = p.samples().iter().zip(q.samples()).map(|(a, b)| a - b).collect();
    Ok(w21_norm(&SampledFn::new(p.grid(), diff)?))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpectrumKind {
    /// `a = 1` transmission problem, indexed from 2.
    TransmissionA1,
    /// `y(0) = y(1) = 0`.
    DirichletDirichlet,
    /// `y(0) = y'(1) = 0`.
    DirichletNeumann,
    /// Transmission problem with `a ≠ 1`.
    TransmissionGeneral,
}

/// Indexed sequence of eigenvalues.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectrumSeq {
    pub start_index: i64,
    pub values: Vec<C64>,
    pub kind: SpectrumKind,
    /// Transmission parameter; fixes the lattice of the general kind.
    pub a: f64,
    /// Per-entry membership in the almost real subspectrum; empty when unused.
    pub almost_real: Vec<bool>,
}

/// Share of `Σ|r_k|²` contributed by the last quartile of terms must stay
/// below this for a residual sequence to look square summable.
pub const L2_TAIL_SHARE: f64 = 0.1;

impl SpectrumSeq {
    pub fn new(kind: SpectrumKind, start_index: i64, values: Vec<C64>) -> Self {
        let a = match kind {
            SpectrumKind::TransmissionA1 => 1.0,
            _ => 0.0,
        };
        Self { start_index, values, kind, a, almost_real: Vec::new() }
    }

    /// Spectrum of the transmission problem with parameter `a ≠ 1`.
    pub fn general(a: f64, start_index: i64, values: Vec<C64>) -> Self {
        Self { start_index, values, kind: SpectrumKind::TransmissionGeneral, a, almost_real: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn indices(&self) -> impl Iterator<Item = i64> + '_ {
        (0..self.values.len() as i64).map(move |i| i + self.start_index)
    }

    pub fn get(&self, k: i64) -> Option<C64> {
        let i = k - self.start_index;
        if i < 0 {
            None
        } else {
            self.values.get(i as usize).copied()
        }
    }

    /// Leading-order lattice value for index `k` (without the `ω` shift).
    pub fn lattice(&self, k: i64) -> f64 {
        let k = k as f64;
        match self.kind {
            SpectrumKind::TransmissionA1 => (PI * k).powi(2) / 4.0,
            SpectrumKind::DirichletDirichlet => (PI * k).powi(2),
            SpectrumKind::DirichletNeumann => (PI * (k - 0.5)).powi(2),
            SpectrumKind::TransmissionGeneral => (PI * k / (1.0 - self.a)).powi(2),
        }
    }

    /// Residuals against the kind's asymptote: `(λ_k − (πk)²/4)/k` for the
    /// `a = 1` problem, `λ_k − lattice_k − ω/(1−a)` otherwise.
    pub fn asymptotic_residuals(&self, omega: C64) -> Vec<C64> {
        self.indices()
            .zip(&self.values)
            .map(|(k, &l)| match self.kind {
                SpectrumKind::TransmissionA1 => (l - self.lattice(k)) / k as f64,
                SpectrumKind::TransmissionGeneral => l - self.lattice(k) - omega / (1.0 - self.a),
                _ => l - self.lattice(k) - omega,
            })
            .collect()
    }

    pub fn passes_l2_heuristic(&self, omega: C64) -> bool {
        l2_tail_share(&self.asymptotic_residuals(omega)) < L2_TAIL_SHARE
    }

    pub fn is_real(&self, tol: f64) -> bool {
        self.values.iter().all(|v| v.im.abs() <= tol * v.norm().max(1.0))
    }
}

/// Fraction of `Σ|r_k|²` carried by the last quarter of the sequence.
/// Returns 0 for an all-zero or too short sequence.
pub fn l2_tail_share(residuals: &[C64]) -> f64 {
    let n = residuals.len();
    if n < 4 {
        return 0.0;
    }
    let total: f64 = residuals.iter().map(|r| r.norm_sqr()).sum();
    if total == 0.0 {
        return 0.0;
    }
    let tail: f64 = residuals[n - n / 4..].iter().map(|r| r.norm_sqr()).sum();
    tail / total
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn grid_rejects_degenerate() {
        assert!(GridSpec::new(1, 0.0, 1.0).is_err());
        assert!(GridSpec::new(4, 1.0, 1.0).is_err());
        let g = GridSpec::new(4, 0.0, 2.0).unwrap();
        assert_eq!(g.h(), 0.5);
        assert_eq!(g.node(4), 2.0);
    }

    #[test]
    fn trapezoid_examples() {
        let g = GridSpec::unit(100).unwrap();
        let zero = SampledFn::zeros(g);
        assert_eq!(trapezoid(&zero).unwrap(), c(0.0));
        let lin = SampledFn::from_fn(g, |x| c(x - 0.5));
        assert!(trapezoid(&lin).unwrap().norm() < 1e-15);
        let g = GridSpec::unit(1000).unwrap();
        let s = SampledFn::from_fn(g, |x| c((PI * x / 2.0).sin()));
        assert!((trapezoid(&s).unwrap() - c(2.0 / PI)).norm() < 1e-5);
        assert!(quad::trapezoid(&[], 0.1).is_err());
    }

    #[test]
    fn quadratic_error_ratio() {
        let err = |n| {
            let g = GridSpec::unit(n).unwrap();
            let f = SampledFn::from_fn(g, |x| c(x * x));
            (trapezoid(&f).unwrap() - c(1.0 / 3.0)).norm()
        };
        let ratio = err(50) / err(100);
        assert!((ratio - 4.0).abs() < 0.4, "ratio {ratio}");
    }

    #[test]
    fn class_r_examples() {
        assert!(validate_class_r(&Potential::linear_centered(100).unwrap(), 1e-12));
        assert!(!validate_class_r(&Potential::zero(100).unwrap(), 1e-12));
        assert!(!validate_class_r(&Potential::constant(100, 1.0).unwrap(), 1e-12));
        let mut q = Potential::linear_centered(100).unwrap();
        q.smoothness = Smoothness::L2;
        assert!(!validate_class_r(&q, 1e-12));
    }

    #[test]
    fn mean_is_cached() {
        let q = Potential::constant(10, 2.0).unwrap();
        assert!((q.mean() - c(2.0)).norm() < 1e-14);
        assert!(q.revalidate_mean(1e-14));
        assert_eq!(q.eta(), c(0.5));
    }

    #[test]
    fn l2_heuristic_separates_decay_from_constant() {
        let decaying: Vec<C64> = (2..32).map(|k| c(1.0 / k as f64)).collect();
        assert!(l2_tail_share(&decaying) < L2_TAIL_SHARE);
        let flat: Vec<C64> = (2..32).map(|_| c(1.0)).collect();
        assert!(l2_tail_share(&flat) > L2_TAIL_SHARE);
    }

    #[test]
    fn w21_of_linear() {
        // f = x on [0,1]: ‖f‖ = 1/√3, ‖f'‖ = 1.
        let g = GridSpec::unit(200).unwrap();
        let f = SampledFn::from_fn(g, c);
        assert!((w21_norm(&f) - (1.0 / 3f64.sqrt() + 1.0)).abs() < 1e-5);
    }
}
