//! Reconstruction of `q` for the `a = 1` problem from `{λ_k}_{k≥2}` and
//! `η = q(1)/4`.
//!
//! The spectrum and `η` fix `Δ` through its product. The sine coefficients
//! of `v` on `[0,2]` are `ρ_m³ Δ(ρ_m²)` at `ρ_m = πm/2`; `w` follows by
//! integration from `w(2) = η`, its even/odd parts about `x = 1` are the
//! Cauchy data, and the last stage inverts the kernel map for `q`.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::charfn::{build_product, ProductCharFn, ReferenceLattice, TailModel};
use crate::error::{Error, Result, StageExt};
use crate::forward::{forward_spectrum, ForwardConfig, Via};
use crate::kernel::{self, CauchyData, KernelConfig};
use crate::quad;
use crate::types::{l2_tail_share, w21_distance, GridSpec, Potential, SampledFn, Smoothness, SpectrumSeq};

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// Share of `Σ|c_m|²` allowed in the last quarter of the coefficients.
const COEFF_TAIL_SHARE: f64 = 0.1;

#[derive(Clone, Copy, Debug)]
pub struct InverseConfig {
    /// Kernel grid for the Cauchy-data inversion; `q̃` lives on `2n`.
    pub n: usize,
    pub k_terms: usize,
    /// Zeros used in the product; `None` takes all of them.
    pub truncation: Option<usize>,
    /// Fraction of the zeros used to fit the shifted tail.
    pub tail_fraction: f64,
    pub fp_tol: f64,
    pub max_sweeps: usize,
    pub kernel: KernelConfig,
    /// Entries of the re-computed spectrum compared with the input.
    pub residual_count: usize,
    pub eta_tol: f64,
    pub mean_tol: f64,
}

impl Default for InverseConfig {
    fn default() -> Self {
        Self {
            n: 400,
            k_terms: 2000,
            truncation: None,
            tail_fraction: 0.25,
            fp_tol: 1e-10,
            max_sweeps: 200,
            kernel: KernelConfig::default(),
            residual_count: 14,
            eta_tol: 1e-4,
            mean_tol: 1e-4,
        }
    }
}

/// `v` with the pieces used to build it.
#[derive(Clone, Debug)]
pub struct RecoveredV {
    pub v: SampledFn,
    /// `ρ_m³ Δ(ρ_m²)`, `m = 1..=K`.
    pub coefficients: Vec<C64>,
    /// `v(0)`, `v(2)` read off the `1/ρ` decay of the coefficients.
    pub endpoints: (C64, C64),
    /// `Σ_{m>K} |d_m|` estimated from the last coefficients after the
    /// endpoint part is removed.
    pub tail_bound: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct InverseDiagnostics {
    pub sweeps: usize,
    pub residual_history: Vec<f64>,
    pub cauchy_residual: f64,
    pub k_terms: usize,
    pub fourier_tail_bound: f64,
    pub truncation: usize,
    pub tail_model: String,
}

#[derive(Clone, Debug)]
pub struct InverseReport {
    pub q_tilde: Potential,
    /// `q̃(1) − 4η̃`.
    pub eta_check: C64,
    pub lambda_metric: Option<f64>,
    pub residual_spectrum: f64,
    pub iterations: InverseDiagnostics,
}

impl InverseReport {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "lambda_metric": self.lambda_metric,
            "residual_spectrum": self.residual_spectrum,
            "eta_check_abs": self.eta_check.norm(),
            "iterations": self.iterations,
        })
    }
}

/// Product for `Δ̃` with a shifted lattice tail fitted to the last zeros.
pub fn product_for(spectrum: &SpectrumSeq, eta: C64, truncation: Option<usize>, tail_fraction: f64) -> Result<ProductCharFn> {
    let n = truncation.unwrap_or(spectrum.len()).max(2);
    let p = build_product(spectrum, eta, n)?;
    if spectrum.len() < 8 {
        return Ok(p);
    }
    match TailModel::fit_shift(spectrum, ReferenceLattice::A1, tail_fraction) {
        TailModel::LatticeWithShift { alpha, beta } if alpha.norm() + beta.norm() > 0.0 => {
            p.with_tail(TailModel::LatticeWithShift { alpha, beta })
        }
        _ => Ok(p),
    }
}

/// `ṽ(x) = Σ_m ρ_m³ Δ̃(ρ_m²) sin ρ_m x`, `ρ_m = πm/2`, on `grid ⊂ [0,2]`.
pub fn recover_v(spectrum: &SpectrumSeq, eta: C64, grid: GridSpec, k_terms: usize) -> Result<SampledFn> {
    let p = product_for(spectrum, eta, None, InverseConfig::default().tail_fraction)?;
    Ok(recover_v_from(&p, grid, k_terms)?.v)
}

/// As [`recover_v`] from an assembled product.
///
/// The coefficients decay like `(v(0) − (−1)^m v(2))/ρ_m`. That part is
/// the sine series of the linear function through `v(0)` and `v(2)`, which
/// is added back in closed form so the remaining series converges fast.
pub fn recover_v_from(delta: &ProductCharFn, grid: GridSpec, k_terms: usize) -> Result<RecoveredV> {
    if (grid.a, grid.b) != (0.0, 2.0) {
        return Err(Error::InvalidInput("v is recovered on [0, 2]".into()));
    }
    if k_terms < 8 {
        return Err(Error::InvalidInput(format!("k_terms = {k_terms} is too small")));
    }
    let rho = |m: usize| PI * m as f64 / 2.0;
    let coefficients: Vec<C64> = (1..=k_terms)
        .into_par_iter()
        .map(|m| {
            let r = rho(m);
            delta.eval(C64::new(r * r, 0.0)) * r.powi(3)
        })
        .collect();
    if coefficients.iter().any(|c| !c.is_finite()) {
        return Err(Error::Validation("non-finite Fourier coefficient".into()));
    }
    if l2_tail_share(&coefficients) >= COEFF_TAIL_SHARE {
        return Err(Error::Validation("Fourier coefficients of v do not decay".into()));
    }

    sine_series(coefficients, grid)
}

/// `Σ_m c_m sin ρ_m x` on `grid ⊂ [0,2]`, `ρ_m = πm/2`, with the `1/ρ_m`
/// endpoint part read off the last half of the coefficients and summed in
/// closed form.
pub(crate) fn sine_series(coefficients: Vec<C64>, grid: GridSpec) -> Result<RecoveredV> {
    let k_terms = coefficients.len();
    let rho = |m: usize| PI * m as f64 / 2.0;
    let (mut even, mut odd, mut ne, mut no) = (ZERO, ZERO, 0usize, 0usize);
    for m in (k_terms / 2)..=k_terms {
        let s = coefficients[m - 1] * rho(m);
        if m % 2 == 0 {
            even += s;
            ne += 1;
        } else {
            odd += s;
            no += 1;
        }
    }
    let (even, odd) = (even / ne as f64, odd / no as f64);
    let v0 = (even + odd) * 0.5;
    let v2 = (odd - even) * 0.5;
    let residual = endpoint_residual(&coefficients, (v0, v2));
    let last = &residual[3 * k_terms / 4..];
    // |d_m| ≲ C/m³ past the data, so the tail is about K|d_K|/2
    let tail_bound = last.iter().map(|d| d.norm()).fold(0.0, f64::max) * k_terms as f64 / 2.0;

    let values: Vec<C64> = grid
        .nodes()
        .collect::<Vec<_>>()
        .par_iter()
        .map(|&x| {
            let mut acc = v0 * (1.0 - x / 2.0) + v2 * (x / 2.0);
            for (i, d) in residual.iter().enumerate() {
                acc += d * (rho(i + 1) * x).sin();
            }
            acc
        })
        .collect();
    Ok(RecoveredV { v: SampledFn::new(grid, values)?, coefficients, endpoints: (v0, v2), tail_bound })
}

/// `d_m = c_m − (v(0) − (−1)^m v(2))/ρ_m`.
fn endpoint_residual(coefficients: &[C64], (v0, v2): (C64, C64)) -> Vec<C64> {
    coefficients
        .iter()
        .enumerate()
        .map(|(i, &c)| {
            let m = i + 1;
            let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
            c - (v0 - v2 * sign) / (PI * m as f64 / 2.0)
        })
        .collect()
}

impl RecoveredV {
    /// Coefficients with the endpoint part removed.
    pub fn residual(&self) -> Vec<C64> {
        endpoint_residual(&self.coefficients, self.endpoints)
    }

    /// `v′` from the differentiated series, on `grid ⊂ [0,2]`.
    pub fn derivative(&self, grid: GridSpec) -> SampledFn {
        let (v0, v2) = self.endpoints;
        let residual = self.residual();
        SampledFn::from_fn(grid, |x| {
            let mut acc = (v2 - v0) * 0.5;
            for (i, d) in residual.iter().enumerate() {
                let r = PI * (i + 1) as f64 / 2.0;
                acc += d * r * (r * x).cos();
            }
            acc
        })
    }
}

/// `w̃(x) = η̃ + ∫ₓ² ṽ`, fourth-order cumulative rule from `x = 2`.
pub fn assemble_w(v: &SampledFn, eta: C64) -> SampledFn {
    let rev: Vec<C64> = v.values.iter().rev().copied().collect();
    let cum = quad::cumulative_simpson(&rev, v.grid.h());
    SampledFn { grid: v.grid, values: cum.into_iter().rev().map(|c| c + eta).collect() }
}

/// `w̃_j(x) = w̃(1+x) + (−1)^j w̃(1−x)` on `[0,1]`.
pub fn split_cauchy(w: &SampledFn) -> Result<CauchyData> {
    let g = w.grid;
    if (g.a, g.b) != (0.0, 2.0) {
        return Err(Error::InvalidInput("w must be sampled on [0, 2]".into()));
    }
    if !g.n.is_multiple_of(2) {
        return Err(Error::InvalidInput(format!("w needs an even number of intervals, got {}", g.n)));
    }
    let n = g.n / 2;
    let unit = GridSpec::unit(n)?;
    let (mut w0, mut w1) = (Vec::with_capacity(n + 1), Vec::with_capacity(n + 1));
    for j in 0..=n {
        let (plus, minus) = (w.values[n + j], w.values[n - j]);
        w0.push(plus + minus);
        w1.push(plus - minus);
    }
    debug_assert!(w1[0] == ZERO);
    CauchyData::new(SampledFn::new(unit, w0)?, SampledFn::new(unit, w1)?)
}

/// Inverts the Cauchy-data map: finds `q` whose kernel has traces
/// `K_t(1,·) = w₀`, `K_x(1,·) = w₁`.
///
/// On the hypotenuse `u + v = 1` the traces give `H_u = w₀ + w₁` and
/// `H_v = w₁ − w₀`, and
///
/// ```text
/// H_u(u, 1−u) =  ½q(u) + ∫₀^{1−u} q(u+β) H(u,β) dβ,   u ∈ [½, 1]
/// H_v(1−v, v) = −½q(v) + ∫₀^{1−v} q(α+v) H(α,v) dα,   v ∈ [0, ½]
/// ```
///
/// which is solved for `q` by fixed-point sweeps, each re-solving the
/// kernel on the current iterate. `q̃` is returned on `grid`.
pub fn invert_cauchy(cd: &CauchyData, grid: GridSpec, fp_tol: f64, max_sweeps: usize) -> Result<Potential> {
    invert_cauchy_with(cd, grid, fp_tol, max_sweeps, KernelConfig::default()).map(|r| r.0)
}

/// [`invert_cauchy`] returning the sweep history and the final trace
/// residual as well.
pub fn invert_cauchy_with(
    cd: &CauchyData,
    grid: GridSpec,
    fp_tol: f64,
    max_sweeps: usize,
    kcfg: KernelConfig,
) -> Result<(Potential, Vec<f64>, f64)> {
    if (grid.a, grid.b) != (0.0, 1.0) {
        return Err(Error::InvalidInput("q must be recovered on [0, 1]".into()));
    }
    let n = cd.grid().n;
    let m = 2 * n;
    let kgrid = GridSpec::unit(n)?;
    // targets indexed by j = p − n on the hypotenuse
    let tu: Vec<C64> = (0..=n).map(|j| cd.w0.values[j] + cd.w1.values[j]).collect();
    let tv: Vec<C64> = (0..=n).map(|j| cd.w1.values[j] - cd.w0.values[j]).collect();

    let update = |iu: &[C64], iv: &[C64]| -> Vec<C64> {
        let mut q = vec![ZERO; m + 1];
        for j in 0..=n {
            q[n + j] = (tu[j] - iu[j]) * 2.0;
            q[n - j] = -(tv[j] - iv[j]) * 2.0;
        }
        q[n] = ((tu[0] - iu[0]) * 2.0 - (tv[0] - iv[0]) * 2.0) * 0.5;
        q
    };
    let zeros = vec![ZERO; n + 1];
    let mut q = update(&zeros, &zeros);
    let mut history = Vec::new();
    let mut rises = 0;
    let mut converged = false;
    for _ in 0..max_sweeps {
        let k = kernel::solve_kernel_fine(q.clone(), kgrid, kcfg)?;
        let (hu, hv) = kernel::hypotenuse_derivatives(&k);
        let iu: Vec<C64> = (0..=n).map(|j| hu[n + j] - q[n + j] * 0.5).collect();
        let iv: Vec<C64> = (0..=n).map(|j| hv[n + j] + q[n - j] * 0.5).collect();
        let next = update(&iu, &iv);
        let change = next.iter().zip(&q).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        if !change.is_finite() {
            history.push(change);
            return Err(Error::Divergence { history });
        }
        if history.last().is_some_and(|&prev| change > prev) {
            rises += 1;
        } else {
            rises = 0;
        }
        history.push(change);
        q = next;
        if rises >= 3 {
            return Err(Error::Divergence { history });
        }
        if change <= fp_tol {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::IterationLimit { iterations: history.len(), residual: *history.last().unwrap_or(&f64::NAN) });
    }
    let k = kernel::solve_kernel_fine(q.clone(), kgrid, kcfg)?;
    let (hu, hv) = kernel::hypotenuse_derivatives(&k);
    let residual = (0..=n)
        .map(|j| (hu[n + j] - tu[j]).norm().max((hv[n + j] - tv[j]).norm()))
        .fold(0.0, f64::max);
    let fine = Potential::from_samples(q, Smoothness::W21)?;
    let out = if grid.n == m { fine } else { fine.resample(grid.n)? };
    Ok((out, history, residual))
}

/// Spectrum and `η̃` to `q̃`, with a re-computed spectrum for the residual.
pub fn run_algorithm1(spectrum: &SpectrumSeq, eta: C64, cfg: &InverseConfig) -> Result<InverseReport> {
    if eta == ZERO {
        return Err(Error::InvalidInput("eta must be nonzero".into())).stage("recover_v");
    }
    let n = cfg.n;
    let product = product_for(spectrum, eta, cfg.truncation, cfg.tail_fraction).stage("recover_v")?;
    let vgrid = GridSpec::new(2 * n, 0.0, 2.0).stage("recover_v")?;
    let rec = recover_v_from(&product, vgrid, cfg.k_terms).stage("recover_v")?;
    let w = assemble_w(&rec.v, eta);
    let cd = split_cauchy(&w).stage("split_cauchy")?;
    let (q, history, cauchy_residual) =
        invert_cauchy_with(&cd, GridSpec::unit(2 * n).stage("invert_cauchy")?, cfg.fp_tol, cfg.max_sweeps, cfg.kernel)
            .stage("invert_cauchy")?;
    if q.mean().norm() > cfg.mean_tol {
        return Err(Error::Validation(format!("recovered potential has mean {:e}", q.mean().norm())))
            .stage("invert_cauchy");
    }
    let eta_check = q.endpoint() - eta * 4.0;
    if eta_check.norm() > cfg.eta_tol {
        return Err(Error::Validation(format!("|q(1) - 4 eta| = {:e}", eta_check.norm()))).stage("invert_cauchy");
    }

    let count = cfg.residual_count.min(spectrum.len()).max(2);
    let fcfg = ForwardConfig { kernel_n: Some(n), mean_tol: cfg.mean_tol, kernel: cfg.kernel, ..Default::default() };
    let again = forward_spectrum(&q, 1.0, count, Via::Kernel, &fcfg).stage("residual_spectrum")?;
    let residual_spectrum = again
        .values
        .iter()
        .zip(&spectrum.values)
        .map(|(a, b)| (a - b).norm() / b.norm())
        .fold(0.0, f64::max);

    let tail_model = match product.tail_model {
        TailModel::Lattice => "lattice".to_string(),
        TailModel::LatticeWithShift { alpha, beta } => format!("shift(alpha={alpha}, beta={beta})"),
    };
    Ok(InverseReport {
        q_tilde: q,
        eta_check,
        lambda_metric: None,
        residual_spectrum,
        iterations: InverseDiagnostics {
            sweeps: history.len(),
            residual_history: history,
            cauchy_residual,
            k_terms: cfg.k_terms,
            fourier_tail_bound: rec.tail_bound,
            truncation: product.truncation.min(spectrum.len()),
            tail_model,
        },
    })
}

/// `|η − η̃| + (Σ_k |λ_k − λ̃_k|²/k²)^{1/2}` over the indices both carry.
pub fn lambda_metric(model: &SpectrumSeq, eta: C64, other: &SpectrumSeq, eta_tilde: C64) -> Result<f64> {
    if model.start_index != other.start_index {
        return Err(Error::InvalidInput("spectra must share their first index".into()));
    }
    let s: f64 = model
        .indices()
        .zip(model.values.iter().zip(&other.values))
        .map(|(k, (a, b))| (a - b).norm_sqr() / (k * k) as f64)
        .sum();
    Ok((eta - eta_tilde).norm() + s.sqrt())
}

#[derive(Clone, Debug)]
pub struct StabilityReport {
    pub lambda: f64,
    pub w21_error: f64,
    /// Last index entering `Λ`.
    pub truncation_index: i64,
    pub report: InverseReport,
}

/// `Λ` between the model and the input data, and `‖q − q̃‖_{W21}`.
pub fn stability_report(model_q: &Potential, spectrum: &SpectrumSeq, eta_tilde: C64, cfg: &InverseConfig) -> Result<StabilityReport> {
    let fcfg = ForwardConfig { kernel_n: Some(model_q.n().min(cfg.n)), ..Default::default() };
    let model = forward_spectrum(model_q, 1.0, spectrum.len(), Via::Kernel, &fcfg).stage("model_spectrum")?;
    stability_report_with(model_q, &model, spectrum, eta_tilde, cfg)
}

/// [`stability_report`] with the model spectrum supplied.
pub fn stability_report_with(
    model_q: &Potential,
    model: &SpectrumSeq,
    spectrum: &SpectrumSeq,
    eta_tilde: C64,
    cfg: &InverseConfig,
) -> Result<StabilityReport> {
    let lambda = lambda_metric(model, model_q.eta(), spectrum, eta_tilde)?;
    let mut report = run_algorithm1(spectrum, eta_tilde, cfg)?;
    report.lambda_metric = Some(lambda);
    let w21_error = w21_distance(model_q, &report.q_tilde)?;
    let truncation_index = spectrum.start_index + model.len().min(spectrum.len()) as i64 - 1;
    Ok(StabilityReport { lambda, w21_error, truncation_index, report })
}

/// One perturbed reconstruction of a ratio study.
#[derive(Clone, Debug, Serialize)]
pub struct StudyRun {
    pub level: f64,
    pub draw: usize,
    pub lambda: f64,
    pub w21_error: f64,
    pub ratio: f64,
}

/// `λ_k + δ_k` with real `δ_k` drawn so that `(Σ|δ_k|²/k²)^{1/2} = level`.
pub fn perturb_spectrum(spectrum: &SpectrumSeq, level: f64, rng: &mut impl Rng) -> SpectrumSeq {
    let u: Vec<f64> = (0..spectrum.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let norm = u.iter().map(|x| x * x).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);
    let mut out = spectrum.clone();
    for ((k, v), d) in spectrum.indices().zip(out.values.iter_mut()).zip(&u) {
        *v += C64::new(k as f64 * level * d / norm, 0.0);
    }
    out
}

/// `‖q − q̃‖_{W21}/Λ` over `draws` seeded perturbations at each level.
/// Run `i` draws from stream `i` of a generator seeded with `seed`, so the
/// result does not depend on scheduling.
pub fn stability_study(
    model_q: &Potential,
    model: &SpectrumSeq,
    levels: &[f64],
    draws: usize,
    seed: u64,
    cfg: &InverseConfig,
) -> Result<Vec<StudyRun>> {
    let jobs: Vec<(f64, usize)> = levels.iter().flat_map(|&l| (0..draws).map(move |d| (l, d))).collect();
    jobs.par_iter()
        .enumerate()
        .map(|(i, &(level, draw))| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let perturbed = perturb_spectrum(model, level, &mut rng);
            let r = stability_report_with(model_q, model, &perturbed, model_q.eta(), cfg)?;
            Ok(StudyRun { level, draw, lambda: r.lambda, w21_error: r.w21_error, ratio: r.w21_error / r.lambda })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::SpectrumKind;

    fn example1(n_zeros: usize) -> SpectrumSeq {
        let values = (2..2 + n_zeros as i64).map(|k| C64::new((PI * k as f64).powi(2) / 4.0, 0.0)).collect();
        SpectrumSeq::new(SpectrumKind::TransmissionA1, 2, values)
    }

    #[test]
    fn lattice_spectrum_gives_one_mode() {
        let eta = 1.0;
        let g = GridSpec::new(400, 0.0, 2.0).unwrap();
        let v = recover_v(&example1(200), C64::new(eta, 0.0), g, 200).unwrap();
        let err = v.sup_dist(|x| C64::new(-PI * eta / 2.0 * (PI * x / 2.0).sin(), 0.0));
        assert!(err < 1e-9, "{err}");
    }

    #[test]
    fn zero_eta_is_rejected() {
        let g = GridSpec::new(40, 0.0, 2.0).unwrap();
        assert!(matches!(recover_v(&example1(20), ZERO, g, 40), Err(Error::InvalidInput(_))));
        let e = run_algorithm1(&example1(20), ZERO, &InverseConfig::default()).unwrap_err();
        assert!(matches!(e, Error::Stage { stage: "recover_v", .. }));
    }

    #[test]
    fn assemble_constant_and_zero() {
        let g = GridSpec::new(10, 0.0, 2.0).unwrap();
        let w = assemble_w(&SampledFn::zeros(g), C64::new(0.3, -1.0));
        assert!(w.values.iter().all(|&x| x == C64::new(0.3, -1.0)));
        let v = SampledFn::from_fn(g, |x| C64::new(x * x, 0.0));
        let w = assemble_w(&v, ZERO);
        assert_eq!(w.values[10], ZERO);
    }

    #[test]
    fn split_constant_and_odd_grid() {
        let g = GridSpec::new(10, 0.0, 2.0).unwrap();
        let cd = split_cauchy(&SampledFn::from_fn(g, |_| C64::new(1.5, 0.0))).unwrap();
        assert!(cd.w0.values.iter().all(|&x| x == C64::new(3.0, 0.0)));
        assert!(cd.w1.values.iter().all(|&x| x == ZERO));
        let g = GridSpec::new(11, 0.0, 2.0).unwrap();
        assert!(split_cauchy(&SampledFn::zeros(g)).is_err());
    }

    #[test]
    fn split_inverts_density_assembly() {
        let q = Potential::linear_centered(40).unwrap();
        let cd = kernel::cauchy_data_for(&q, 40, KernelConfig::default()).unwrap();
        // w on [0,2] is ½(w₀ ∓ w₁) on either side of 1
        let w = crate::forward::assemble_w(&cd, 1.0).unwrap();
        let w = SampledFn { grid: GridSpec::new(80, 0.0, 2.0).unwrap(), values: w.values };
        let back = split_cauchy(&w).unwrap();
        for j in 0..=40 {
            assert!((back.w0.values[j] - cd.w0.values[j]).norm() < 1e-15);
            assert!((back.w1.values[j] - cd.w1.values[j]).norm() < 1e-15);
        }
    }

    #[test]
    fn zero_data_gives_zero_potential() {
        let cd = CauchyData::zeros(20).unwrap();
        let q = invert_cauchy(&cd, GridSpec::unit(40).unwrap(), 1e-12, 20).unwrap();
        assert!(q.samples().iter().all(|&x| x == ZERO));
    }

    #[test]
    fn discrete_forward_map_is_inverted_exactly() {
        let q = Potential::from_real_fn(80, |x| x - 0.5 + 0.3 * (2.0 * PI * x).sin()).unwrap();
        let cd = kernel::cauchy_data_for(&q, 40, KernelConfig::default()).unwrap();
        let back = invert_cauchy(&cd, GridSpec::unit(80).unwrap(), 1e-12, 100).unwrap();
        let err = back.samples().iter().zip(q.samples()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(err < 1e-9, "{err}");
    }

    #[test]
    fn lambda_metric_of_identical_data_is_zero() {
        let s = example1(10);
        assert_eq!(lambda_metric(&s, C64::new(1.0, 0.0), &s, C64::new(1.0, 0.0)).unwrap(), 0.0);
    }
}
