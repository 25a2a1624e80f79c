//! File formats.
//!
//! Potentials are JSON, either sampled
//! `{"n", "samples_re", "samples_im", "smoothness"}` or a preset
//! `{"preset": "zero" | "linear_centered" | "constant", "c"}`. Spectra are CSV
//! with header `k,re,im` and `# key=value` comment lines carrying
//! `start_index`, `kind` and `a`.

use std::fmt::Write as _;
use std::path::Path;

use serde_json::{json, Value};

use crate::charfn::ProductCharFn;
use crate::error::{Error, Result};
use crate::types::{Potential, Smoothness, SpectrumKind, SpectrumSeq, C64};

/// Grid used for presets that do not name one.
pub const PRESET_N: usize = 400;

pub fn potential_from_json(v: &Value) -> Result<Potential> {
    let obj = v.as_object().ok_or_else(|| Error::Parse("potential must be a JSON object".into()))?;
    if let Some(p) = obj.get("preset") {
        let n = match obj.get("n") {
            Some(n) => n.as_u64().ok_or_else(|| Error::Parse("n must be a positive integer".into()))? as usize,
            None => PRESET_N,
        };
        let c = obj.get("c").map(|c| c.as_f64().ok_or_else(|| Error::Parse("c must be a number".into()))).transpose()?;
        return match p.as_str() {
            Some("zero") => Potential::zero(n),
            Some("linear_centered") => Potential::linear_centered(n),
            Some("constant") => Potential::constant(n, c.ok_or_else(|| Error::Parse("preset constant needs c".into()))?),
            other => Err(Error::Parse(format!("unknown preset {other:?}"))),
        };
    }
    #[derive(serde::Deserialize)]
    struct Sampled {
        n: usize,
        samples_re: Vec<f64>,
        #[serde(default)]
        samples_im: Vec<f64>,
        smoothness: Smoothness,
    }
    let s: Sampled = serde_json::from_value(v.clone())?;
    if s.samples_re.len() != s.n + 1 {
        return Err(Error::Parse(format!("n = {} needs {} samples, got {}", s.n, s.n + 1, s.samples_re.len())));
    }
    if !s.samples_im.is_empty() && s.samples_im.len() != s.samples_re.len() {
        return Err(Error::Parse("samples_im and samples_re differ in length".into()));
    }
    let samples = s
        .samples_re
        .iter()
        .enumerate()
        .map(|(i, &re)| C64::new(re, s.samples_im.get(i).copied().unwrap_or(0.0)))
        .collect();
    Potential::from_samples(samples, s.smoothness)
}

pub fn potential_to_json(q: &Potential) -> Value {
    json!({
        "n": q.n(),
        "samples_re": q.samples().iter().map(|v| v.re).collect::<Vec<_>>(),
        "samples_im": q.samples().iter().map(|v| v.im).collect::<Vec<_>>(),
        "smoothness": q.smoothness,
    })
}

pub fn read_potential(path: &Path) -> Result<Potential> {
    let v: Value = serde_json::from_str(&std::fs::read_to_string(path)?)?;
    potential_from_json(&v)
}

fn kind_name(kind: SpectrumKind) -> String {
    serde_json::to_value(kind).ok().and_then(|v| v.as_str().map(str::to_string)).unwrap_or_default()
}

pub fn spectrum_to_csv(s: &SpectrumSeq) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# start_index={}", s.start_index);
    let _ = writeln!(out, "# kind={}", kind_name(s.kind));
    let _ = writeln!(out, "# a={}", s.a);
    out.push_str("k,re,im\n");
    for (k, v) in s.indices().zip(&s.values) {
        let _ = writeln!(out, "{k},{},{}", v.re, v.im);
    }
    out
}

/// Parses [`spectrum_to_csv`] output. `kind` and `a` apply when the file
/// does not declare them; a missing `start_index` falls back to the first `k`.
pub fn spectrum_from_csv(text: &str, kind: SpectrumKind, a: f64) -> Result<SpectrumSeq> {
    let (mut start, mut kind, mut a) = (None, kind, a);
    for line in text.lines().filter_map(|l| l.trim().strip_prefix('#')) {
        let Some((key, val)) = line.split_once('=') else { continue };
        let val = val.trim();
        match key.trim() {
            "start_index" => start = Some(val.parse::<i64>().map_err(|e| Error::Parse(format!("start_index: {e}")))?),
            "kind" => kind = serde_json::from_value(Value::String(val.into()))?,
            "a" => a = val.parse().map_err(|e| Error::Parse(format!("a: {e}")))?,
            _ => {}
        }
    }
    let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).trim(csv::Trim::All).from_reader(text.as_bytes());
    let mut ks = Vec::new();
    let mut values = Vec::new();
    for rec in rdr.deserialize::<(i64, f64, f64)>() {
        let (k, re, im) = rec.map_err(|e| Error::Parse(e.to_string()))?;
        ks.push(k);
        values.push(C64::new(re, im));
    }
    let start = start.or(ks.first().copied()).ok_or_else(|| Error::Parse("empty spectrum".into()))?;
    if let Some((i, k)) = ks.iter().enumerate().find(|&(i, &k)| k != start + i as i64) {
        return Err(Error::Parse(format!("row {i} has k = {k}, expected {}", start + i as i64)));
    }
    let mut s = SpectrumSeq::new(kind, start, values);
    if kind == SpectrumKind::TransmissionGeneral {
        s.a = a;
    }
    Ok(s)
}

pub fn read_spectrum(path: &Path, kind: SpectrumKind, a: f64) -> Result<SpectrumSeq> {
    spectrum_from_csv(&std::fs::read_to_string(path)?, kind, a)
}

/// Product metadata with its zeros referenced by file name.
pub fn product_to_json(p: &ProductCharFn, eta: C64, zeros_ref: &str) -> Value {
    json!({ "eta_re": eta.re, "eta_im": eta.im, "N": p.truncation, "zeros": zeros_ref })
}
