//! Characteristic functions: integral representations with a sampled
//! density, and truncated Hadamard products over a reference lattice.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad;
use crate::types::{l2_tail_share, SampledFn, SpectrumSeq, L2_TAIL_SHARE};

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
const ONE: C64 = C64 { re: 1.0, im: 0.0 };

/// Below this `|λ|` all ratios are evaluated by their Taylor series.
const SMALL_LAMBDA: f64 = 0.25;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IntegralKind {
    /// `sin ρ/ρ − ω cos ρ/(2ρ²) + ∫₀¹ w₀ cos ρt/ρ²`
    Delta0,
    /// `cos ρ + ω sin ρ/(2ρ) + ∫₀¹ w₁ sin ρt/ρ`
    Delta1,
    /// `sin ρ(1−a)/ρ − ω cos ρ(1−a)/(2ρ²) + ∫_{a−1}^{a+1} w cos ρt/ρ²`
    DeltaGeneralA,
    /// `−ω/(2ρ²) + ∫₀² w cos ρt/ρ²`
    DeltaA1Cos,
    /// `η sin 2ρ/ρ³ + ∫₀² v sin ρt/ρ³`
    DeltaA1Sin,
}

/// Entire function given by one of the integral representations.
///
/// The `1/λ` parts of the representations cancel for consistent data
/// (`ω = 2∫w` or `2η + ∫t v = 0`); that cancellation is assumed, and the
/// small-`λ` branch evaluates the remaining entire part by series.
#[derive(Clone, Debug)]
pub struct IntegralCharFn {
    pub kind: IntegralKind,
    pub a: f64,
    pub omega: C64,
    pub eta: C64,
    pub density: SampledFn,
    /// Quadratic interpolation of the density on panel pairs (even grids).
    quadratic: bool,
    moments: Vec<C64>,
}

fn domain_for(kind: IntegralKind, a: f64) -> (f64, f64) {
    match kind {
        IntegralKind::Delta0 | IntegralKind::Delta1 => (0.0, 1.0),
        IntegralKind::DeltaGeneralA => (a - 1.0, a + 1.0),
        IntegralKind::DeltaA1Cos | IntegralKind::DeltaA1Sin => (0.0, 2.0),
    }
}

fn series_terms(tmax: f64) -> usize {
    (24.0 + 2.0 * tmax).min(80.0) as usize
}

impl IntegralCharFn {
    pub fn new(kind: IntegralKind, a: f64, omega: C64, eta: C64, density: SampledFn) -> Result<Self> {
        let (lo, hi) = domain_for(kind, a);
        let g = density.grid;
        let tol = 1e-12 * (1.0 + lo.abs().max(hi.abs()));
        if (g.a - lo).abs() > tol || (g.b - hi).abs() > tol {
            return Err(Error::InvalidInput(format!(
                "{kind:?} density must live on [{lo}, {hi}], got [{}, {}]",
                g.a, g.b
            )));
        }
        if kind == IntegralKind::DeltaA1Sin && eta == ZERO {
            return Err(Error::InvalidInput("the sine form requires eta != 0".into()));
        }
        if kind == IntegralKind::DeltaA1Cos && a != 1.0 {
            return Err(Error::InvalidInput("the cosine form is the a = 1 case".into()));
        }
        let tmax = lo.abs().max(hi.abs());
        let kmax = 2 * series_terms(tmax) + 1;
        let quadratic = g.n.is_multiple_of(2);
        let moments = if quadratic {
            quad::power_moments_quadratic(&density.values, g.a, g.h(), kmax)
        } else {
            quad::power_moments(&density.values, g.a, g.h(), kmax)
        };
        Ok(Self { kind, a, omega, eta, density, quadratic, moments })
    }

    pub fn delta0(w0: SampledFn, omega: C64) -> Result<Self> {
        Self::new(IntegralKind::Delta0, 0.0, omega, ZERO, w0)
    }

    pub fn delta1(w1: SampledFn, omega: C64) -> Result<Self> {
        Self::new(IntegralKind::Delta1, 0.0, omega, ZERO, w1)
    }

    pub fn general(a: f64, w: SampledFn, omega: C64) -> Result<Self> {
        Self::new(IntegralKind::DeltaGeneralA, a, omega, ZERO, w)
    }

    pub fn a1_cos(w: SampledFn, omega: C64) -> Result<Self> {
        Self::new(IntegralKind::DeltaA1Cos, 1.0, omega, ZERO, w)
    }

    pub fn a1_sin(v: SampledFn, eta: C64) -> Result<Self> {
        Self::new(IntegralKind::DeltaA1Sin, 1.0, ZERO, eta, v)
    }

    fn cos_sin(&self, rho: C64) -> (C64, C64) {
        let g = self.density.grid;
        if self.quadratic {
            let i = C64::new(0.0, 1.0);
            let plus = quad::exp_integral_quadratic(&self.density.values, g.a, g.h(), i * rho);
            let minus = quad::exp_integral_quadratic(&self.density.values, g.a, g.h(), -(i * rho));
            ((plus + minus) * 0.5, (plus - minus) / (2.0 * i))
        } else {
            quad::cos_sin_integrals(&self.density.values, g.a, g.h(), rho)
        }
    }

    /// `∫ density` by the same interpolation the evaluation uses.
    pub fn density_integral(&self) -> C64 {
        self.moments[0]
    }

    pub fn eval(&self, lambda: C64) -> C64 {
        self.eval_rho(lambda.sqrt())
    }

    /// Evaluates at `λ = ρ²`; the result is even in `ρ`.
    pub fn eval_rho(&self, rho: C64) -> C64 {
        let lambda = rho * rho;
        if lambda.norm() < SMALL_LAMBDA {
            return self.eval_series(lambda);
        }
        let half_omega = self.omega * 0.5;
        match self.kind {
            IntegralKind::Delta0 => {
                let (c, _) = self.cos_sin(rho);
                rho.sin() / rho + (c - half_omega * rho.cos()) / lambda
            }
            IntegralKind::Delta1 => {
                let (_, s) = self.cos_sin(rho);
                rho.cos() + (half_omega * rho.sin() + s) / rho
            }
            IntegralKind::DeltaGeneralA => {
                let b = rho * (1.0 - self.a);
                let (c, _) = self.cos_sin(rho);
                let lead = if self.a == 1.0 { ZERO } else { b.sin() / rho };
                lead + (c - half_omega * b.cos()) / lambda
            }
            IntegralKind::DeltaA1Cos => {
                let (c, _) = self.cos_sin(rho);
                (c - half_omega) / lambda
            }
            IntegralKind::DeltaA1Sin => {
                let (_, s) = self.cos_sin(rho);
                (self.eta * (rho * 2.0).sin() + s) / (lambda * rho)
            }
        }
    }

    /// Taylor branch. `cm(k)` is `∫ f t^k`, and point masses use `T^k`.
    fn eval_series(&self, lambda: C64) -> C64 {
        let terms = self.moments.len() / 2;
        let dens = |j: usize| self.moments[j];
        let half_omega = self.omega * 0.5;
        match self.kind {
            IntegralKind::Delta0 => s1(lambda, point(1.0), terms) - half_omega * c2(lambda, point(1.0), terms) + c2(lambda, dens, terms),
            IntegralKind::Delta1 => c0(lambda, point(1.0), terms) + half_omega * s1(lambda, point(1.0), terms) + s1(lambda, dens, terms),
            IntegralKind::DeltaGeneralA => {
                let b = 1.0 - self.a;
                s1(lambda, point(b), terms) - half_omega * c2(lambda, point(b), terms) + c2(lambda, dens, terms)
            }
            IntegralKind::DeltaA1Cos => c2(lambda, dens, terms),
            IntegralKind::DeltaA1Sin => self.eta * s3(lambda, point(2.0), terms) + s3(lambda, dens, terms),
        }
    }

    /// Coefficient of the dropped `1/λ` part; zero for consistent data.
    pub fn consistency_defect(&self) -> C64 {
        let m0 = self.moments[0];
        match self.kind {
            IntegralKind::Delta0 | IntegralKind::DeltaGeneralA | IntegralKind::DeltaA1Cos => m0 - self.omega * 0.5,
            IntegralKind::Delta1 => ZERO,
            IntegralKind::DeltaA1Sin => self.eta * 2.0 + self.moments[1],
        }
    }
}

fn point(t: f64) -> impl Fn(usize) -> C64 {
    move |j| C64::new(t.powi(j as i32), 0.0)
}

fn inv_fact(k: usize) -> f64 {
    (1..=k).fold(1.0, |acc, i| acc / i as f64)
}

/// `∫ f cos ρt = Σ_k (−λ)^k M_{2k}/(2k)!`
fn c0(lambda: C64, m: impl Fn(usize) -> C64, terms: usize) -> C64 {
    let mut acc = ZERO;
    let mut pow = ONE;
    for k in 0..terms {
        acc += pow * m(2 * k) * inv_fact(2 * k);
        pow *= -lambda;
    }
    acc
}

/// `∫ f (cos ρt − 1)/λ = Σ_{k≥1} (−1)^k λ^{k−1} M_{2k}/(2k)!`
fn c2(lambda: C64, m: impl Fn(usize) -> C64, terms: usize) -> C64 {
    let mut acc = ZERO;
    let mut pow = -ONE;
    for k in 1..terms {
        acc += pow * m(2 * k) * inv_fact(2 * k);
        pow *= -lambda;
    }
    acc
}

/// `∫ f sin ρt/ρ = Σ_k (−λ)^k M_{2k+1}/(2k+1)!`
fn s1(lambda: C64, m: impl Fn(usize) -> C64, terms: usize) -> C64 {
    let mut acc = ZERO;
    let mut pow = ONE;
    for k in 0..terms {
        acc += pow * m(2 * k + 1) * inv_fact(2 * k + 1);
        pow *= -lambda;
    }
    acc
}

/// `∫ f (sin ρt/ρ − t)/λ = Σ_{k≥1} (−1)^k λ^{k−1} M_{2k+1}/(2k+1)!`
fn s3(lambda: C64, m: impl Fn(usize) -> C64, terms: usize) -> C64 {
    let mut acc = ZERO;
    let mut pow = -ONE;
    for k in 1..terms {
        acc += pow * m(2 * k + 1) * inv_fact(2 * k + 1);
        pow *= -lambda;
    }
    acc
}

/// `sin z / z`, stable near zero.
pub fn sinc(z: C64) -> C64 {
    if z.norm() < 1e-3 {
        let z2 = z * z;
        ONE - z2 / 6.0 + z2 * z2 / 120.0
    } else {
        z.sin() / z
    }
}

/// Zeros of the reference product sit at `L_k = (πk/scale)²`, `k ≥ start`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReferenceLattice {
    pub scale: f64,
    pub start: i64,
}

impl ReferenceLattice {
    /// `{π²k²/4}_{k≥2}` of the `a = 1` problem.
    pub const A1: ReferenceLattice = ReferenceLattice { scale: 2.0, start: 2 };

    /// `{π²k²/(1−a)²}_{k≥1}`.
    pub fn general(a: f64) -> Result<Self> {
        if a == 1.0 {
            return Err(Error::Precondition("a = 1 has no sin ρ(1−a) lattice".into()));
        }
        Ok(Self { scale: (1.0 - a).abs(), start: 1 })
    }

    pub fn value(&self, k: i64) -> f64 {
        (PI * k as f64 / self.scale).powi(2)
    }

    /// `∏_{k≥start} (1 − λ/L_k)` with the factor at index `m` divided out,
    /// i.e. multiplied by `L_m/(L_m − λ)` when `m ≥ start` and untouched
    /// for `m = 0`. Returns `(value, λ-dependence of the paired factor)`.
    fn paired(&self, rho: C64, m: i64) -> C64 {
        let s = self.scale;
        let z = rho * s;
        // sin(ρs)/(ρs) / ∏_{1≤k<start}(1 − λ/L_k)
        let lambda = rho * rho;
        let mut value = if m == 0 {
            sinc(z)
        } else {
            // sin(ρs)/(L_m − λ) with ρ_m = πm/s, δ = ρ − ρ_m
            let rho_m = PI * m as f64 / s;
            let delta = rho - rho_m;
            let sign = if m % 2 == 0 { -1.0 } else { 1.0 };
            sign * s * sinc(delta * s) / (rho_m * 2.0 + delta) / z * self.value(m)
        };
        for k in 1..self.start {
            let lk = self.value(k);
            let f = if k == m { C64::new(1.0, 0.0) } else { ONE - lambda / lk };
            value /= f;
        }
        value
    }
}

/// Model for zeros beyond the supplied ones.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum TailModel {
    /// `λ_k = L_k` for every `k` past the last supplied zero.
    Lattice,
    /// `λ_k = L_k + α + (−1)^k β`.
    LatticeWithShift { alpha: C64, beta: C64 },
}

impl TailModel {
    /// Fits `λ_k − L_k ≈ α + (−1)^k β` over the last `frac` of the zeros.
    pub fn fit_shift(zeros: &SpectrumSeq, lattice: ReferenceLattice, frac: f64) -> TailModel {
        let n = zeros.len();
        let take = ((n as f64 * frac).ceil() as usize).clamp(2.min(n), n);
        if take < 2 {
            return TailModel::Lattice;
        }
        let (mut se, mut so, mut ne, mut no) = (ZERO, ZERO, 0usize, 0usize);
        for (k, &l) in zeros.indices().zip(&zeros.values).skip(n - take) {
            let s = l - lattice.value(k);
            if k % 2 == 0 {
                se += s;
                ne += 1;
            } else {
                so += s;
                no += 1;
            }
        }
        if ne == 0 || no == 0 {
            return TailModel::Lattice;
        }
        let (me, mo) = (se / ne as f64, so / no as f64);
        TailModel::LatticeWithShift { alpha: (me + mo) * 0.5, beta: (me - mo) * 0.5 }
    }

    fn shift(&self, k: i64) -> C64 {
        match *self {
            TailModel::Lattice => ZERO,
            TailModel::LatticeWithShift { alpha, beta } => alpha + if k % 2 == 0 { beta } else { -beta },
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProductStyle {
    /// `c ∏ (λ_k − λ)/L_k`, as for the `a = 1` problem.
    Leading,
    /// `γ λ^s ∏ (1 − λ/λ_k)`.
    Hadamard,
}

/// Truncated Hadamard product whose dropped factors are replaced by a
/// reference lattice with a closed-form infinite product.
#[derive(Clone, Debug)]
pub struct ProductCharFn {
    pub normalization: C64,
    pub style: ProductStyle,
    pub zeros: SpectrumSeq,
    pub zero_multiplicity_s: u32,
    pub truncation: usize,
    pub lattice: ReferenceLattice,
    pub tail_model: TailModel,
    /// Zeros not matched to the lattice (Hadamard style only).
    pub extra: Vec<C64>,
    /// Explicit tail factors before switching to the integral estimate.
    pub tail_terms: usize,
    scale0: C64,
}

/// `a = 1` product normalized by `η`: `−(8η/π²) ∏_{k≥2} 4(λ_k − λ)/(πk)²`.
pub fn build_product(zeros: &SpectrumSeq, eta: C64, n: usize) -> Result<ProductCharFn> {
    if eta == ZERO {
        return Err(Error::InvalidInput("the product needs eta != 0".into()));
    }
    if n < 2 {
        return Err(Error::InvalidInput(format!("truncation N = {n} must be at least 2")));
    }
    if zeros.start_index != 2 {
        return Err(Error::Validation("a = 1 zeros are indexed from 2".into()));
    }
    check_matched(zeros, ReferenceLattice::A1)?;
    if zeros.len() >= 8 {
        let kappa: Vec<C64> = zeros
            .indices()
            .zip(&zeros.values)
            .map(|(k, &l)| {
                let d = l - ReferenceLattice::A1.value(k);
                // rounding in exact lattice data is not a shift
                if d.norm() <= 64.0 * f64::EPSILON * l.norm() {
                    ZERO
                } else {
                    d / k as f64
                }
            })
            .collect();
        if l2_tail_share(&kappa) >= L2_TAIL_SHARE {
            return Err(Error::Validation("zeros fail the (λ_k − π²k²/4)/k decay check".into()));
        }
    }
    ProductCharFn::new(
        -eta * 8.0 / (PI * PI),
        ProductStyle::Leading,
        zeros.clone(),
        0,
        n,
        ReferenceLattice::A1,
        TailModel::Lattice,
        Vec::new(),
    )
}

fn check_matched(zeros: &SpectrumSeq, lattice: ReferenceLattice) -> Result<()> {
    for (k, &l) in zeros.indices().zip(&zeros.values) {
        if k < lattice.start {
            return Err(Error::Validation(format!("index {k} is below the lattice start {}", lattice.start)));
        }
        let half_gap = (lattice.value(k + 1) - lattice.value(k)) / 2.0;
        if (l - lattice.value(k)).norm() >= half_gap.max(lattice.value(k) - lattice.value(k - 1)) {
            return Err(Error::Validation(format!("zero {l} at index {k} is far from its lattice point")));
        }
    }
    Ok(())
}

impl ProductCharFn {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        normalization: C64,
        style: ProductStyle,
        zeros: SpectrumSeq,
        s: u32,
        truncation: usize,
        lattice: ReferenceLattice,
        tail_model: TailModel,
        extra: Vec<C64>,
    ) -> Result<Self> {
        if normalization == ZERO {
            return Err(Error::InvalidInput("normalization must be nonzero".into()));
        }
        if zeros.start_index < lattice.start {
            return Err(Error::InvalidInput("zeros start below the reference lattice".into()));
        }
        let mut p = Self {
            normalization,
            style,
            zeros,
            zero_multiplicity_s: s,
            truncation,
            lattice,
            tail_model,
            extra,
            tail_terms: 4000,
            scale0: ONE,
        };
        p.refresh()?;
        Ok(p)
    }

    pub fn with_tail(mut self, tail: TailModel) -> Result<Self> {
        self.tail_model = tail;
        self.refresh()?;
        Ok(self)
    }

    fn refresh(&mut self) -> Result<()> {
        if self.style == ProductStyle::Hadamard {
            let p0 = self.raw(ZERO);
            if p0 == ZERO || !p0.is_finite() {
                return Err(Error::InvalidInput("a zero at λ = 0 must be carried by s".into()));
            }
            self.scale0 = ONE / p0;
        }
        Ok(())
    }

    fn matched(&self) -> &[C64] {
        let n = self.truncation.min(self.zeros.len());
        &self.zeros.values[..n]
    }

    fn last_matched_index(&self) -> i64 {
        self.zeros.start_index + self.matched().len() as i64 - 1
    }

    /// Zero carried at lattice index `k` (data, tail model, or none).
    fn zero_at(&self, k: i64) -> Option<C64> {
        if k < self.lattice.start {
            return None;
        }
        if k < self.zeros.start_index {
            return Some(C64::new(self.lattice.value(k), 0.0));
        }
        let i = (k - self.zeros.start_index) as usize;
        self.matched().get(i).copied().or_else(|| Some(self.lattice.value(k) + self.tail_model.shift(k)))
    }

    /// `∏_{k≥start}(1 − λ/L_k) · ∏ (λ_k − λ)/(L_k − λ) · ∏ extra`.
    fn raw(&self, lambda: C64) -> C64 {
        let rho = lambda.sqrt();
        let lat = self.lattice;
        let m = (rho.re * lat.scale / PI).round().max(0.0) as i64;
        let mut value = lat.paired(rho, m);
        // The paired factor: ref contributed L_m/(L_m − λ) · (1 − λ/L_m)
        // removed; put back the actual zero.
        if m >= lat.start {
            let lm = lat.value(m);
            match self.zero_at(m) {
                Some(z) => value *= (z - lambda) / lm,
                None => value *= (lm - lambda) / lm,
            }
        }
        let last = self.last_matched_index();
        for (i, &z) in self.matched().iter().enumerate() {
            let k = self.zeros.start_index + i as i64;
            if k == m {
                continue;
            }
            let lk = lat.value(k);
            value *= (z - lambda) / (lk - lambda);
        }
        if let TailModel::LatticeWithShift { alpha, beta } = self.tail_model {
            let k_explicit = (last + self.tail_terms as i64).max(2 * m + 50);
            let mut log_tail = ZERO;
            for k in (last + 1)..=k_explicit {
                if k == m {
                    continue;
                }
                let lk = lat.value(k);
                log_tail += (ONE + self.tail_model.shift(k) / (lk - lambda)).ln();
            }
            // Σ_{k>K} α/(c k² − λ) ≈ α ∫_{K+½}^∞ dk/(c k² − λ), c = (π/scale)²
            let sc = PI / lat.scale;
            let kk = k_explicit as f64 + 0.5;
            let rest = if rho.norm() < 1e-8 {
                C64::new(1.0 / (sc * sc * kk), 0.0)
            } else {
                ((C64::new(sc * kk, 0.0) + rho) / (C64::new(sc * kk, 0.0) - rho)).ln() / (rho * 2.0 * sc)
            };
            log_tail += alpha * rest;
            let next = k_explicit + 1;
            let sign = if next % 2 == 0 { 1.0 } else { -1.0 };
            log_tail += beta * sign * 0.5 / (lat.value(next) - lambda);
            value *= log_tail.exp();
        }
        for &e in &self.extra {
            value *= ONE - lambda / e;
        }
        value
    }

    pub fn eval(&self, lambda: C64) -> C64 {
        let base = self.raw(lambda) * self.normalization;
        match self.style {
            ProductStyle::Leading => base,
            ProductStyle::Hadamard => base * self.scale0 * lambda.powu(self.zero_multiplicity_s),
        }
    }

    /// `Θ(λ) = Δ(λ)/γ` for the Hadamard style.
    pub fn theta(&self, lambda: C64) -> C64 {
        self.eval(lambda) / self.normalization
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "eta_re": (self.normalization * (-PI * PI / 8.0)).re,
            "eta_im": (self.normalization * (-PI * PI / 8.0)).im,
            "N": self.truncation,
            "zeros": "spectrum.csv",
        })
    }
}

/// `Θ` for eq. (3) with the reference lattice `π²k²/(1−a)²`: `zeros` must
/// be matched one-per-index from `k = 1`; `extra` holds unmatched zeros.
pub fn hadamard_theta(a: f64, zeros: &SpectrumSeq, extra: Vec<C64>, s: u32, n: usize) -> Result<ProductCharFn> {
    let lattice = ReferenceLattice::general(a)?;
    ProductCharFn::new(ONE, ProductStyle::Hadamard, zeros.clone(), s, n, lattice, TailModel::Lattice, extra)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GammaEstimate {
    pub gamma: C64,
    pub error: f64,
}

/// `γ = 2(1−a)/π · lim (−1)^{n+1}/(2n−1) · Θ(η_n)^{-1}`,
/// `η_n = (π/(1−a))²(n−½)²`, extrapolated over `n ∈ [n_max/2, n_max]`
/// with a `γ + c/n` least-squares fit.
pub fn gamma_limit(theta: impl Fn(C64) -> C64, a: f64, n_max: usize) -> Result<GammaEstimate> {
    if !(a <= -1.0 || a > 1.0) {
        return Err(Error::Precondition(format!("gamma limit needs a <= -1 or a > 1, got {a}")));
    }
    gamma_fit(theta, a, n_max)
}

/// As [`gamma_limit`] for any `a ≠ 1`. On the real axis `ρΔ(λ)/sin ρ(1−a)`
/// still tends to 1 when `−1 < a < 1`.
pub(crate) fn gamma_fit(theta: impl Fn(C64) -> C64, a: f64, n_max: usize) -> Result<GammaEstimate> {
    if a == 1.0 {
        return Err(Error::Precondition("gamma limit needs a != 1".into()));
    }
    if n_max < 8 {
        return Err(Error::InvalidInput("gamma limit needs n_max >= 8".into()));
    }
    let b = 1.0 - a;
    let lo = n_max / 2;
    let mut seq = Vec::new();
    for n in lo..=n_max {
        let nf = n as f64;
        let eta_n = (PI / b).powi(2) * (nf - 0.5).powi(2);
        let sign = if n % 2 == 1 { 1.0 } else { -1.0 };
        let g = C64::new(2.0 * b / PI * sign / (2.0 * nf - 1.0), 0.0) / theta(C64::new(eta_n, 0.0));
        seq.push((nf, g));
    }
    let q = seq.len() - seq.len() / 4;
    let last: Vec<C64> = seq[q..].iter().map(|p| p.1).collect();
    let mean = last.iter().sum::<C64>() / last.len() as f64;
    let spread = last.iter().map(|g| (g - mean).norm()).fold(0.0, f64::max);
    if !mean.is_finite() || spread > 0.1 * mean.norm() {
        return Err(Error::Divergence { history: seq.iter().map(|p| p.1.norm()).collect() });
    }
    // γ_n ≈ γ + c/n
    let m = seq.len() as f64;
    let sx: f64 = seq.iter().map(|p| 1.0 / p.0).sum();
    let sxx: f64 = seq.iter().map(|p| 1.0 / (p.0 * p.0)).sum();
    let sy: C64 = seq.iter().map(|p| p.1).sum();
    let sxy: C64 = seq.iter().map(|p| p.1 / p.0).sum();
    let det = m * sxx - sx * sx;
    let gamma = (sy * sxx - sxy * sx) / det;
    let c = (sxy * m - sy * sx) / det;
    let error = seq.iter().map(|p| (p.1 - gamma - c / p.0).norm()).fold(0.0, f64::max);
    Ok(GammaEstimate { gamma, error })
}
