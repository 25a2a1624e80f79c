//! Growth of the Green's function on expanding contours, as a numerical
//! estimate of Birkhoff or Stone regularity.
//!
//! `G(x,t,λ) = −ψ(max(x,t),λ) S(min(x,t),λ) / Δ(λ)` with `S` shot forward
//! from `0` and `ψ` shot backward from `ψ(1) = sin ρa/ρ`,
//! `ψ′(1) = cos ρa`. Samples are taken on `|λ| = r` away from the
//! lattices `πk/σ` in the `ρ`-plane. `log|G|` is fitted against `|Im ρ|`
//! to detect exponential growth, and `log max|G|` against `log r` for the
//! polynomial exponent.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::charfn::{sinc, IntegralCharFn};
use crate::error::{Error, Result};
use crate::forward::{shoot, CharacteristicFn, ForwardConfig};
use crate::types::Potential;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
const ONE: C64 = C64 { re: 1.0, im: 0.0 };

/// `|Δ|` relative to its terms below which `λ` counts as a pole.
pub const POLE_FLOOR: f64 = 1e-10;

/// Allowed drift of `W(ψ,S)` away from `−Δ` at a probe point.
pub const WRONSKIAN_TOL: f64 = 1e-2;

/// One value of `G` with a flag for numerical trust.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GreenValue {
    pub g: C64,
    /// `W(ψ,S)` at both probe points agrees with `−Δ`. Backward shooting of
    /// `ψ` loses accuracy like `exp(2|Im ρ|(1−x))`, which this catches.
    pub reliable: bool,
}

/// Green's function of `R(a,q)`: `S` and `ψ` by shooting, `Δ` from the
/// transformation-operator representation.
#[derive(Clone, Debug)]
pub struct GreensFn {
    q: Potential,
    a: f64,
    delta: IntegralCharFn,
    pub steps: usize,
}

impl GreensFn {
    pub fn new(q: &Potential, a: f64, steps: usize) -> Result<Self> {
        let cfg = ForwardConfig::default();
        let delta = match CharacteristicFn::kernel(q, a, &cfg)? {
            CharacteristicFn::Integral(f) => f,
            CharacteristicFn::Shooting { .. } => unreachable!("kernel path"),
        };
        Ok(Self { q: q.clone(), a, delta, steps })
    }

    /// `Δ(λ)` and the size of its leading and remaining parts.
    fn delta(&self, lambda: C64) -> (C64, f64) {
        let d = self.delta.eval(lambda);
        let rho = lambda.sqrt();
        let b = 1.0 - self.a;
        let omega = self.delta.omega;
        let lead = if self.a == 1.0 {
            if lambda == ZERO {
                ZERO
            } else {
                -omega / (lambda * 2.0)
            }
        } else if lambda == ZERO {
            C64::new(b, 0.0)
        } else {
            sinc(rho * b) * b - omega * (rho * b).cos() / (lambda * 2.0)
        };
        (d, lead.norm() + (d - lead).norm())
    }

    pub fn at(&self, probes: &[(f64, f64)], lambda: C64) -> Result<Vec<GreenValue>> {
        for &(x, t) in probes {
            if !(0.0..=1.0).contains(&x) || !(0.0..=1.0).contains(&t) {
                return Err(Error::InvalidInput(format!("probe ({x}, {t}) is outside [0,1]²")));
            }
        }
        let (delta, scale) = self.delta(lambda);
        if delta.norm() <= POLE_FLOOR * scale {
            return Err(Error::NearPole { lambda, value: delta.norm() });
        }
        let (q, a, steps) = (&self.q, self.a, self.steps);
        let rho = lambda.sqrt();
        let mut pts: Vec<f64> = probes.iter().flat_map(|&(x, t)| [x, t]).collect();
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        let seg = |len: f64| ((steps as f64 * len).ceil() as usize).max(100);

        // S forward through the sorted points
        let mut s_at = Vec::with_capacity(pts.len());
        let (mut y, mut x0) = ((ZERO, ONE), 0.0);
        for &p in &pts {
            if p > x0 {
                y = shoot(q, lambda, seg(p - x0), x0, p, y)?;
                x0 = p;
            }
            s_at.push(y);
        }
        // ψ backward through the same points
        let (ca, sa) = ((rho * a).cos(), sinc(rho * a) * a);
        let mut psi_at = vec![(ZERO, ZERO); pts.len()];
        let (mut z, mut x1) = ((sa, ca), 1.0);
        for (i, &p) in pts.iter().enumerate().rev() {
            if p < x1 {
                z = shoot(q, lambda, seg(x1 - p), x1, p, z)?;
                x1 = p;
            }
            psi_at[i] = z;
        }
        let ok: Vec<bool> = s_at
            .iter()
            .zip(&psi_at)
            .map(|(s, p)| {
                let w = p.0 * s.1 - p.1 * s.0;
                (w + delta).norm() <= WRONSKIAN_TOL * delta.norm()
            })
            .collect();
        let idx = |v: f64| pts.binary_search_by(|p| p.total_cmp(&v)).expect("probe point");
        Ok(probes
            .iter()
            .map(|&(x, t)| {
                let (lo, hi) = if t <= x { (idx(t), idx(x)) } else { (idx(x), idx(t)) };
                GreenValue { g: -psi_at[hi].0 * s_at[lo].0 / delta, reliable: ok[lo] && ok[hi] }
            })
            .collect())
    }
}

/// `G(x,t,λ)` at one point.
pub fn greens_eval(q: &Potential, a: f64, x: f64, t: f64, lambda: C64, steps: usize) -> Result<C64> {
    Ok(GreensFn::new(q, a, steps)?.at(&[(x, t)], lambda)?[0].g)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "class", rename_all = "snake_case")]
pub enum Regularity {
    BirkhoffRegular { theta_hat: f64 },
    StoneRegular { theta_hat: f64 },
    /// `exp_rate` is `None` when the Green's function does not exist.
    Irregular { exp_rate: Option<f64> },
}

impl Regularity {
    pub fn name(&self) -> &'static str {
        match self {
            Self::BirkhoffRegular { .. } => "birkhoff_regular",
            Self::StoneRegular { .. } => "stone_regular",
            Self::Irregular { .. } => "irregular",
        }
    }
}

#[derive(Clone, Debug)]
pub struct ClassifyConfig {
    pub radii: Vec<f64>,
    pub epsilon: f64,
    /// `None` uses [`default_probes`].
    pub probes: Option<Vec<(f64, f64)>>,
    pub samples_per_radius: usize,
    pub steps: usize,
    pub seed: u64,
    /// Fitted `|Im ρ|` coefficient above which growth counts as exponential.
    pub exp_tol: f64,
    /// Slack on `θ̂ ≤ −1/2` for Birkhoff regularity.
    pub fit_tol: f64,
}

impl Default for ClassifyConfig {
    fn default() -> Self {
        let radii = (0..12).map(|i| 64.0 * 2f64.powf(i as f64 * 6.0 / 11.0)).collect();
        Self {
            radii,
            epsilon: 0.3,
            probes: None,
            samples_per_radius: 64,
            steps: 8000,
            seed: 0,
            exp_tol: 0.25,
            fit_tol: 0.15,
        }
    }
}

/// Per-probe growth fit.
#[derive(Clone, Debug, Serialize)]
pub struct ProbeFit {
    pub x: f64,
    pub t: f64,
    pub exp_rate: f64,
    pub theta_hat: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct GreensEvaluation {
    pub a: f64,
    pub epsilon: f64,
    pub radii: Vec<f64>,
    /// `max |G|` over samples and probes, per radius.
    pub max_abs: Vec<f64>,
    pub samples_used: Vec<usize>,
    pub poles_skipped: usize,
    pub probes: Vec<ProbeFit>,
    pub witness: (f64, f64),
    pub class: Regularity,
    pub theta_hat: Option<f64>,
    pub exp_rate: Option<f64>,
}

impl GreensEvaluation {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "class": self.class.name(),
            "theta_hat": self.theta_hat,
            "exp_rate": self.exp_rate,
            "radii": self.radii,
            "epsilon": self.epsilon,
            "probes": self.probes,
            "poles_skipped": self.poles_skipped,
        })
    }

    /// Rows `r,max_abs_g`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("abs_lambda,max_abs_g\n");
        for (r, m) in self.radii.iter().zip(&self.max_abs) {
            s.push_str(&format!("{r:e},{m:e}\n"));
        }
        s
    }
}

/// The probe at which exponential growth is known for `q ≡ 0`.
pub fn witness_probe(a: f64) -> (f64, f64) {
    if a > 1.0 && a < 3.0 {
        ((a - 1.0) / 2.0, (a - 1.0) / 2.0)
    } else {
        (1.0, 1.0)
    }
}

/// Witness, four diagonal points, and five seeded random points.
pub fn default_probes(a: f64, seed: u64) -> Vec<(f64, f64)> {
    let mut p = vec![witness_probe(a)];
    for x in [0.25, 0.5, 0.75, 1.0] {
        if !p.contains(&(x, x)) {
            p.push((x, x));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..5 {
        p.push((rng.gen_range(0.05..1.0), rng.gen_range(0.05..1.0)));
    }
    p
}

/// `σ` values whose lattices `πk/σ` are kept at distance `ε` in `ρ`.
pub fn exclusion_sigmas(a: f64) -> Vec<f64> {
    let mut s = vec![if a == 1.0 { 2.0 } else { (1.0 - a).abs() }];
    if a > 1.0 && a < 3.0 {
        s.extend([(a - 1.0) / 2.0, 1.5 * (a - 1.0)]);
    } else if a > 0.0 && a != 1.0 {
        s.extend([1.0, a]);
    }
    s
}

/// `λ = ρ²` lies in every `D_ε(σ)`.
pub fn in_exclusion_sets(rho: C64, sigmas: &[f64], eps: f64) -> bool {
    sigmas.iter().all(|&s| {
        let k = (rho.re * s / PI).round();
        (rho - C64::new(PI * k / s, 0.0)).norm() >= eps
    })
}

/// Least squares for `y ≈ Σ_j c_j φ_j` with two or three basis columns.
fn lstsq(rows: &[Vec<f64>], y: &[f64]) -> Option<Vec<f64>> {
    let n = rows[0].len();
    let mut a = vec![vec![0.0; n + 1]; n];
    for (r, &yy) in rows.iter().zip(y) {
        for i in 0..n {
            for j in 0..n {
                a[i][j] += r[i] * r[j];
            }
            a[i][n] += r[i] * yy;
        }
    }
    // Gaussian elimination with partial pivoting
    for c in 0..n {
        let p = (c..n).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs()))?;
        a.swap(c, p);
        if a[c][c].abs() < 1e-300 {
            return None;
        }
        for r in (c + 1)..n {
            let f = a[r][c] / a[c][c];
            for k in c..=n {
                a[r][k] -= f * a[c][k];
            }
        }
    }
    let mut x = vec![0.0; n];
    for c in (0..n).rev() {
        let s: f64 = ((c + 1)..n).map(|k| a[c][k] * x[k]).sum();
        x[c] = (a[c][n] - s) / a[c][c];
    }
    Some(x)
}

/// `κ` from `log|G| ≈ κ|Im ρ| + θ log|λ| + c` over individual samples.
fn exp_fit(samples: &[(f64, f64, f64)]) -> Result<f64> {
    if samples.len() < 6 {
        return Err(Error::Fit(format!("{} usable samples, need at least 6", samples.len())));
    }
    let rows: Vec<Vec<f64>> = samples.iter().map(|&(s, r, _)| vec![s, r.ln(), 1.0]).collect();
    let y: Vec<f64> = samples.iter().map(|p| p.2).collect();
    Ok(lstsq(&rows, &y).ok_or_else(|| Error::Fit("singular growth fit".into()))?[0])
}

/// `θ` from `log max|G| ≈ θ log r + c`.
fn poly_fit(radii: &[f64], logm: &[f64]) -> Result<f64> {
    if radii.len() < 3 {
        return Err(Error::Fit(format!("{} usable radii, need at least 3", radii.len())));
    }
    let rows: Vec<Vec<f64>> = radii.iter().map(|&r| vec![r.ln(), 1.0]).collect();
    Ok(lstsq(&rows, logm).ok_or_else(|| Error::Fit("singular growth fit".into()))?[0])
}

/// `|Im ρ|` below which `|sin|`-type factors are not yet exponential.
const EXP_FIT_MIN_IM: f64 = 1.5;

/// Classifies `R(a, q)` from the growth of `|G|` on `|λ| = r`.
///
/// Exponential growth is fitted sample by sample against `|Im ρ|`. If
/// none is found, `θ̂` comes from `max|G|` per radius over the top half
/// of the radii, maximized over probes.
pub fn classify(q: &Potential, a: f64, cfg: &ClassifyConfig) -> Result<GreensEvaluation> {
    if cfg.radii.len() < 6 || cfg.radii.windows(2).any(|w| w[1] <= w[0]) || cfg.radii[0] <= 0.0 {
        return Err(Error::InvalidInput("radii must be positive, strictly increasing, at least 6".into()));
    }
    if cfg.samples_per_radius < 8 {
        return Err(Error::InvalidInput("need at least 8 samples per radius".into()));
    }
    let probes = cfg.probes.clone().unwrap_or_else(|| default_probes(a, cfg.seed));
    let sigmas = exclusion_sigmas(a);
    let ns = cfg.samples_per_radius;
    let green = GreensFn::new(q, a, cfg.steps)?;

    #[derive(Default)]
    struct Ring {
        /// `(|Im ρ|, r, log|G|)` per probe, reliable samples only.
        samples: Vec<Vec<(f64, f64, f64)>>,
        used: usize,
        poles: usize,
    }
    let rings: Vec<Ring> = cfg
        .radii
        .par_iter()
        .map(|&r| -> Result<Ring> {
            let mut ring = Ring { samples: vec![Vec::new(); probes.len()], ..Default::default() };
            for j in 0..ns {
                let arg = PI * (j as f64 + 0.5) / ns as f64;
                let rho = C64::from_polar(r.sqrt(), arg);
                if !in_exclusion_sets(rho, &sigmas, cfg.epsilon) {
                    continue;
                }
                match green.at(&probes, rho * rho) {
                    Ok(g) => {
                        ring.used += 1;
                        for (out, v) in ring.samples.iter_mut().zip(&g) {
                            if v.reliable && v.g.norm() > 0.0 {
                                out.push((rho.im.abs(), r, v.g.norm().ln()));
                            }
                        }
                    }
                    Err(Error::NearPole { .. }) => ring.poles += 1,
                    Err(e) => return Err(e),
                }
            }
            Ok(ring)
        })
        .collect::<Result<_>>()?;

    let poles_skipped = rings.iter().map(|r| r.poles).sum();
    let samples_used: Vec<usize> = rings.iter().map(|r| r.used).collect();
    let ring_max = |ring: &Ring, p: usize| ring.samples[p].iter().map(|s| s.2).fold(f64::NEG_INFINITY, f64::max);
    let max_abs: Vec<f64> = rings
        .iter()
        .map(|ring| (0..probes.len()).map(|p| ring_max(ring, p)).fold(f64::NEG_INFINITY, f64::max).exp())
        .collect();
    let witness = probes[0];

    let base = GreensEvaluation {
        a,
        epsilon: cfg.epsilon,
        radii: cfg.radii.clone(),
        max_abs,
        samples_used: samples_used.clone(),
        poles_skipped,
        probes: Vec::new(),
        witness,
        class: Regularity::Irregular { exp_rate: None },
        theta_hat: None,
        exp_rate: None,
    };
    if samples_used.iter().all(|&u| u == 0) {
        if poles_skipped > 0 {
            // Δ vanishes at every sample: no Green's function
            return Ok(base);
        }
        return Err(Error::Fit("no contour samples inside the exclusion sets".into()));
    }

    let lo = cfg.radii.len() / 2;
    let mut fits = Vec::with_capacity(probes.len());
    for (pi, &(x, t)) in probes.iter().enumerate() {
        let exp_samples: Vec<(f64, f64, f64)> =
            rings.iter().flat_map(|r| r.samples[pi].iter().copied()).filter(|s| s.0 >= EXP_FIT_MIN_IM).collect();
        let (mut rs, mut ys) = (Vec::new(), Vec::new());
        for (ri, ring) in rings.iter().enumerate().skip(lo) {
            let m = ring_max(ring, pi);
            if m.is_finite() {
                rs.push(cfg.radii[ri]);
                ys.push(m);
            }
        }
        // probes with too few trusted samples are left out
        let (Ok(exp_rate), Ok(theta_hat)) = (exp_fit(&exp_samples), poly_fit(&rs, &ys)) else {
            continue;
        };
        fits.push(ProbeFit { x, t, exp_rate, theta_hat });
    }
    if fits.is_empty() {
        return Err(Error::Fit("no probe has enough reliable samples".into()));
    }
    let max_rate = fits.iter().map(|f| f.exp_rate).fold(f64::NEG_INFINITY, f64::max);
    let witness_fit = fits.iter().find(|f| (f.x, f.t) == witness);
    let (class, theta_hat, exp_rate) = if max_rate > cfg.exp_tol {
        let rate = match witness_fit {
            Some(f) if f.exp_rate > cfg.exp_tol => f.exp_rate,
            _ => max_rate,
        };
        (Regularity::Irregular { exp_rate: Some(rate) }, None, Some(rate))
    } else {
        let theta = fits.iter().map(|f| f.theta_hat).fold(f64::NEG_INFINITY, f64::max);
        let class = if theta <= -0.5 + cfg.fit_tol {
            Regularity::BirkhoffRegular { theta_hat: theta }
        } else {
            Regularity::StoneRegular { theta_hat: theta }
        };
        (class, Some(theta), Some(max_rate))
    };
    Ok(GreensEvaluation { probes: fits, class, theta_hat, exp_rate, ..base })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_potential_green_function() {
        let q = Potential::zero(10).unwrap();
        let (a, x, t) = (2.0, 0.7, 0.3);
        let l = C64::new(10.0, 5.0);
        let rho = l.sqrt();
        let exact = (rho * (a + x - 1.0)).sin() * (rho * t).sin() / (rho * (rho * (a - 1.0)).sin());
        let g = greens_eval(&q, a, x, t, l, 4000).unwrap();
        assert!((g - exact).norm() < 1e-9 * exact.norm(), "{g} vs {exact}");
    }

    #[test]
    fn no_green_function_for_degenerate_problem() {
        let q = Potential::zero(10).unwrap();
        for l in [C64::new(3.0, 1.0), C64::new(-20.0, 0.0), C64::new(100.0, 40.0)] {
            assert!(matches!(greens_eval(&q, 1.0, 0.5, 0.5, l, 2000), Err(Error::NearPole { .. })));
        }
    }

    #[test]
    fn symmetric_for_dirichlet() {
        let q = Potential::zero(10).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..10 {
            let (x, t) = (rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0));
            let g = GreensFn::new(&q, 0.0, 1000).unwrap().at(&[(x, t), (t, x)], C64::new(2.0, 0.0)).unwrap();
            assert_eq!(g[0].g, g[1].g);
        }
    }

    #[test]
    fn exclusion_sets() {
        let s = exclusion_sigmas(1.0);
        assert_eq!(s, vec![2.0]);
        assert!(!in_exclusion_sets(C64::new(PI / 2.0 + 0.1, 0.0), &s, 0.3));
        assert!(in_exclusion_sets(C64::new(PI / 2.0 + 0.1, 0.5), &s, 0.3));
    }

    #[test]
    fn fit_recovers_exponents() {
        let radii: Vec<f64> = (0..8).map(|i| 100.0 * 1.5f64.powi(i)).collect();
        let samples: Vec<(f64, f64, f64)> = radii
            .iter()
            .flat_map(|&r| [0.3, 0.6, 0.9].map(|f| (f * r.sqrt(), r, 0.8 * f * r.sqrt() - 0.5 * r.ln() + 0.3)))
            .collect();
        assert!((exp_fit(&samples).unwrap() - 0.8).abs() < 1e-8);
        let y: Vec<f64> = radii.iter().map(|r| 0.5 * r.ln() - 1.0).collect();
        assert!((poly_fit(&radii, &y).unwrap() - 0.5).abs() < 1e-10);
    }
}
