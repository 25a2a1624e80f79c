//! Batch front end. Every subcommand reads its inputs, writes JSON/CSV
//! artifacts into `--out`, and returns a process exit code: 0 on success,
//! 2 for a degenerate spectrum, 1 for any other error. Failures also leave
//! `error.json` in the output directory.
//!
//! Numeric knobs resolve as flag, then the `--config` JSON object (same
//! names, snake_case), then the built-in default.

use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::forward::{self, forward_spectrum, ForwardConfig, Via};
use crate::inverse::{self, InverseConfig};
use crate::io;
use crate::regularity::{self, ClassifyConfig};
use crate::solvability::{self, SolvabilityConfig};
use crate::types::{l2_tail_share, w21_distance, Potential, SpectrumKind, SpectrumSeq, C64};

#[derive(Debug, Parser)]
#[command(name = "transeig", version, about = "Transmission eigenvalue problems: forward, inverse, regularity, solvability")]
pub struct Cli {
    /// JSON object of knob defaults.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory; created if missing.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Eigenvalues of R(a, q).
    Forward(ForwardArgs),
    /// Reconstruct q for a = 1 from a spectrum and eta.
    Inverse(InverseArgs),
    /// Forward at a = 1, then reconstruct and compare.
    Roundtrip(RoundtripArgs),
    /// Regularity class from Green's function growth.
    Classify(ClassifyArgs),
    /// Test whether a sequence can be the spectrum of R(a, q) with real q.
    CheckSolvability(SolvabilityArgs),
    /// Seeded perturbation study of the reconstruction error.
    Stability(StabilityArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum ViaArg {
    Kernel,
    Shooting,
}

impl From<ViaArg> for Via {
    fn from(v: ViaArg) -> Self {
        match v {
            ViaArg::Kernel => Via::Kernel,
            ViaArg::Shooting => Via::Shooting,
        }
    }
}

#[derive(Debug, Args)]
pub struct ForwardArgs {
    #[arg(long)]
    pub potential: Option<PathBuf>,
    #[arg(long, allow_hyphen_values = true)]
    pub a: Option<f64>,
    #[arg(long)]
    pub count: Option<usize>,
    #[arg(long, value_enum)]
    pub via: Option<ViaArg>,
    #[arg(long)]
    pub kernel_n: Option<usize>,
}

#[derive(Debug, Args)]
pub struct InverseArgs {
    #[arg(long)]
    pub spectrum: Option<PathBuf>,
    #[arg(long, allow_hyphen_values = true)]
    pub eta_re: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub eta_im: Option<f64>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub k_terms: Option<usize>,
    #[arg(long)]
    pub truncation: Option<usize>,
}

#[derive(Debug, Args)]
pub struct RoundtripArgs {
    #[arg(long)]
    pub potential: Option<PathBuf>,
    #[arg(long)]
    pub count: Option<usize>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub k_terms: Option<usize>,
}

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    #[arg(long)]
    pub potential: Option<PathBuf>,
    #[arg(long, allow_hyphen_values = true)]
    pub a: Option<f64>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Comma-separated contour radii in |λ|.
    #[arg(long, value_delimiter = ',')]
    pub radii: Option<Vec<f64>>,
    #[arg(long)]
    pub samples_per_radius: Option<usize>,
    #[arg(long)]
    pub steps: Option<usize>,
}

#[derive(Debug, Args)]
pub struct SolvabilityArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub a: Option<f64>,
    #[arg(long)]
    pub spectrum: Option<PathBuf>,
    /// Cosine basis size for the w₋ search (|a| < 1).
    #[arg(long)]
    pub basis_dim: Option<usize>,
    /// First scale of the a = 1 scan.
    #[arg(long, allow_hyphen_values = true)]
    pub gamma: Option<f64>,
    /// For a = 1, start the scan at γ = −8η/π².
    #[arg(long, allow_hyphen_values = true)]
    pub eta_re: Option<f64>,
    #[arg(long)]
    pub aux_count: Option<usize>,
}

#[derive(Debug, Args)]
pub struct StabilityArgs {
    #[arg(long)]
    pub potential: Option<PathBuf>,
    #[arg(long)]
    pub count: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    pub levels: Option<Vec<f64>>,
    #[arg(long)]
    pub draws: Option<usize>,
    #[arg(long)]
    pub n: Option<usize>,
}

/// Flag, config file, default.
struct Knobs(Map<String, Value>);

impl Knobs {
    fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else { return Ok(Self(Map::new())) };
        match serde_json::from_str(&fs::read_to_string(path)?)? {
            Value::Object(m) => Ok(Self(m)),
            _ => Err(Error::Parse("config must be a JSON object".into())),
        }
    }

    fn opt<T: DeserializeOwned>(&self, flag: Option<T>, key: &str) -> Result<Option<T>> {
        if flag.is_some() {
            return Ok(flag);
        }
        match self.0.get(key) {
            Some(v) => serde_json::from_value(v.clone())
                .map(Some)
                .map_err(|e| Error::Parse(format!("config key {key}: {e}"))),
            None => Ok(None),
        }
    }

    fn get<T: DeserializeOwned>(&self, flag: Option<T>, key: &str, default: T) -> Result<T> {
        Ok(self.opt(flag, key)?.unwrap_or(default))
    }

    fn need<T: DeserializeOwned>(&self, flag: Option<T>, key: &str) -> Result<T> {
        self.opt(flag, key)?.ok_or_else(|| Error::InvalidInput(format!("--{} is required", key.replace('_', "-"))))
    }
}

struct Ctx {
    knobs: Knobs,
    out: PathBuf,
    seed: u64,
}

impl Ctx {
    fn write(&self, name: &str, contents: &str) -> Result<()> {
        fs::write(self.out.join(name), contents)?;
        Ok(())
    }

    fn write_json(&self, name: &str, v: &Value) -> Result<()> {
        self.write(name, &(serde_json::to_string_pretty(v)? + "\n"))
    }

    fn potential(&self, flag: Option<PathBuf>) -> Result<Potential> {
        let path: PathBuf = self.knobs.need(flag, "potential")?;
        io::read_potential(&path)
    }
}

/// Parses `args` and runs the subcommand; returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let out = cli.out.clone();
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            let code = exit_code(&e);
            let report = error_json(&e);
            eprintln!("error: {e}");
            if fs::create_dir_all(&out).is_ok() {
                let _ = fs::write(out.join("error.json"), serde_json::to_string_pretty(&report).unwrap_or_default() + "\n");
            }
            code
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e.root() {
        Error::DegenerateSpectrum => 2,
        _ => 1,
    }
}

pub fn error_json(e: &Error) -> Value {
    let stage = match e {
        Error::Stage { stage, .. } => Some(*stage),
        _ => None,
    };
    json!({ "error": e.to_string(), "stage": stage, "exit_code": exit_code(e) })
}

fn execute(cli: Cli) -> Result<()> {
    let knobs = Knobs::load(cli.config.as_deref())?;
    let seed = knobs.get(cli.seed, "seed", 0u64)?;
    fs::create_dir_all(&cli.out)?;
    let ctx = Ctx { knobs, out: cli.out, seed };
    match cli.command {
        Command::Forward(a) => cmd_forward(&ctx, a),
        Command::Inverse(a) => cmd_inverse(&ctx, a),
        Command::Roundtrip(a) => cmd_roundtrip(&ctx, a),
        Command::Classify(a) => cmd_classify(&ctx, a),
        Command::CheckSolvability(a) => cmd_check_solvability(&ctx, a),
        Command::Stability(a) => cmd_stability(&ctx, a),
    }
}

fn inverse_config(k: &Knobs, n: Option<usize>, k_terms: Option<usize>, truncation: Option<usize>) -> Result<InverseConfig> {
    let d = InverseConfig::default();
    Ok(InverseConfig {
        n: k.get(n, "n", d.n)?,
        k_terms: k.get(k_terms, "k_terms", d.k_terms)?,
        truncation: k.opt(truncation, "truncation")?,
        tail_fraction: k.get(None, "tail_fraction", d.tail_fraction)?,
        fp_tol: k.get(None, "fp_tol", d.fp_tol)?,
        max_sweeps: k.get(None, "max_sweeps", d.max_sweeps)?,
        residual_count: k.get(None, "residual_count", d.residual_count)?,
        eta_tol: k.get(None, "eta_tol", d.eta_tol)?,
        mean_tol: k.get(None, "mean_tol", d.mean_tol)?,
        ..d
    })
}

fn cmd_forward(ctx: &Ctx, args: ForwardArgs) -> Result<()> {
    let k = &ctx.knobs;
    let q = ctx.potential(args.potential)?;
    let a: f64 = k.need(args.a, "a")?;
    let count = k.get(args.count, "count", 30usize)?;
    let via = k.get(args.via.map(Via::from), "via", Via::Kernel)?;
    let d = ForwardConfig::default();
    let cfg = ForwardConfig {
        kernel_n: k.opt(args.kernel_n, "kernel_n")?,
        shoot_steps: k.get(None, "shoot_steps", d.shoot_steps)?,
        mean_tol: k.get(None, "mean_tol", d.mean_tol)?,
        ..d
    };
    let s = forward_spectrum(&q, a, count, via, &cfg)?;
    let omega = q.mean();
    let mut diag = json!({
        "a": a,
        "via": via,
        "count": s.len(),
        "start_index": s.start_index,
        "kind": s.kind,
        "omega": {"re": omega.re, "im": omega.im},
    });
    if s.kind == SpectrumKind::TransmissionA1 {
        let share = l2_tail_share(&s.asymptotic_residuals(C64::new(0.0, 0.0)));
        diag["residual_tail_share"] = json!(share);
        diag["residual_heuristic_pass"] = json!(s.passes_l2_heuristic(C64::new(0.0, 0.0)));
    } else if a != 1.0 {
        let mu = forward::almost_real_subspectrum(&s, a, Some(omega))?;
        diag["almost_real_count"] = json!(mu.len());
    }
    ctx.write("spectrum.csv", &io::spectrum_to_csv(&s))?;
    ctx.write_json("forward.json", &diag)
}

fn cmd_inverse(ctx: &Ctx, args: InverseArgs) -> Result<()> {
    let k = &ctx.knobs;
    let path: PathBuf = k.need(args.spectrum, "spectrum")?;
    let s = io::read_spectrum(&path, SpectrumKind::TransmissionA1, 1.0)?;
    let eta = C64::new(k.need(args.eta_re, "eta_re")?, k.get(args.eta_im, "eta_im", 0.0)?);
    let cfg = inverse_config(k, args.n, args.k_terms, args.truncation)?;
    let r = inverse::run_algorithm1(&s, eta, &cfg)?;
    ctx.write_json("potential.json", &io::potential_to_json(&r.q_tilde))?;
    ctx.write_json("inverse.json", &r.to_json())
}

fn cmd_roundtrip(ctx: &Ctx, args: RoundtripArgs) -> Result<()> {
    let k = &ctx.knobs;
    let q = ctx.potential(args.potential)?;
    let count = k.get(args.count, "count", 40usize)?;
    let cfg = inverse_config(k, args.n, args.k_terms, None)?;
    let fcfg = ForwardConfig { kernel_n: Some(q.n().min(cfg.n)), ..Default::default() };
    let s = forward_spectrum(&q, 1.0, count, Via::Kernel, &fcfg).map_err(|e| e.in_stage("forward"))?;
    let r = inverse::run_algorithm1(&s, q.eta(), &cfg)?;
    let w21 = w21_distance(&q, &r.q_tilde)?;
    let mut report = r.to_json();
    report["w21_error"] = json!(w21);
    report["eta"] = json!({"re": q.eta().re, "im": q.eta().im});
    ctx.write("spectrum.csv", &io::spectrum_to_csv(&s))?;
    ctx.write_json("potential.json", &io::potential_to_json(&r.q_tilde))?;
    ctx.write_json("roundtrip.json", &report)
}

fn cmd_classify(ctx: &Ctx, args: ClassifyArgs) -> Result<()> {
    let k = &ctx.knobs;
    let q = ctx.potential(args.potential)?;
    let a: f64 = k.need(args.a, "a")?;
    let d = ClassifyConfig::default();
    let cfg = ClassifyConfig {
        radii: k.get(args.radii, "radii", d.radii.clone())?,
        epsilon: k.get(args.epsilon, "epsilon", d.epsilon)?,
        samples_per_radius: k.get(args.samples_per_radius, "samples_per_radius", d.samples_per_radius)?,
        steps: k.get(args.steps, "steps", d.steps)?,
        seed: ctx.seed,
        ..d
    };
    let r = regularity::classify(&q, a, &cfg)?;
    ctx.write("greens.csv", &r.to_csv())?;
    ctx.write_json("classify.json", &r.to_json())
}

fn cmd_check_solvability(ctx: &Ctx, args: SolvabilityArgs) -> Result<()> {
    let k = &ctx.knobs;
    let a: f64 = k.need(args.a, "a")?;
    let path: PathBuf = k.need(args.spectrum, "spectrum")?;
    let kind = if a == 1.0 { SpectrumKind::TransmissionA1 } else { SpectrumKind::TransmissionGeneral };
    let s: SpectrumSeq = io::read_spectrum(&path, kind, a)?;
    let d = SolvabilityConfig::default();
    let cfg = SolvabilityConfig { aux_count: k.get(args.aux_count, "aux_count", d.aux_count)?, seed: ctx.seed, ..d };
    let report = if a == 1.0 {
        let gamma = match k.opt(args.eta_re, "eta_re")? {
            Some(eta) => -8.0 * eta / (PI * PI),
            None => k.get(args.gamma, "gamma", -1.0)?,
        };
        solvability::check_theorem_b1_with(&s, gamma, &cfg)?
    } else if a <= -1.0 || a > 1.0 {
        solvability::check_theorem_b2_with(&s, a, &cfg)?
    } else {
        let dim = k.get(args.basis_dim, "basis_dim", 3usize)?;
        solvability::check_theorem_b3_with(&s, a, dim, &cfg)?
    };
    ctx.write_json("solvability.json", &report.to_json())
}

fn cmd_stability(ctx: &Ctx, args: StabilityArgs) -> Result<()> {
    let k = &ctx.knobs;
    let q = match k.opt(args.potential, "potential")? {
        Some(p) => io::read_potential(&p)?,
        None => Potential::linear_centered(400)?,
    };
    let count = k.get(args.count, "count", 40usize)?;
    let levels = k.get(args.levels, "levels", vec![1e-3, 1e-2])?;
    let draws = k.get(args.draws, "draws", 5usize)?;
    let cfg = inverse_config(k, args.n, None, None)?;
    let fcfg = ForwardConfig { kernel_n: Some(q.n().min(cfg.n)), ..Default::default() };
    let model = forward_spectrum(&q, 1.0, count, Via::Kernel, &fcfg).map_err(|e| e.in_stage("model_spectrum"))?;
    let runs = inverse::stability_study(&q, &model, &levels, draws, ctx.seed, &cfg)?;
    let mut ratios: Vec<f64> = runs.iter().map(|r| r.ratio).collect();
    ratios.sort_by(f64::total_cmp);
    let median = ratios.get(ratios.len() / 2).copied().unwrap_or(f64::NAN);
    let spread = ratios.iter().map(|r| (r / median).max(median / r)).fold(1.0, f64::max);
    ctx.write_json(
        "stability.json",
        &json!({ "seed": ctx.seed, "runs": runs, "median_ratio": median, "max_factor_from_median": spread }),
    )
}
