use std::f64::consts::PI;
use std::fs;
use std::path::Path;

use serde_json::Value;
use transeig::cli::run;
use transeig::io;
use transeig::{SpectrumKind, SpectrumSeq, C64};

fn call(dir: &Path, args: &[&str]) -> i32 {
    let out = dir.to_str().unwrap();
    let mut v = vec!["transeig"];
    v.extend_from_slice(args);
    v.extend_from_slice(&["--out", out]);
    run(v)
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn preset(dir: &Path, name: &str) -> String {
    let p = dir.join(format!("{name}.json"));
    fs::write(&p, format!(r#"{{"preset": "{name}"}}"#)).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn forward_writes_the_zero_lattice() {
    let d = tempfile::tempdir().unwrap();
    let q = preset(d.path(), "zero");
    assert_eq!(call(d.path(), &["forward", "--potential", &q, "--a", "0.5", "--count", "6"]), 0);
    let s = io::read_spectrum(&d.path().join("spectrum.csv"), SpectrumKind::TransmissionA1, 1.0).unwrap();
    assert_eq!((s.kind, s.a, s.start_index, s.len()), (SpectrumKind::TransmissionGeneral, 0.5, 1, 6));
    for (n, v) in (1..).zip(&s.values) {
        let want = 4.0 * (PI * n as f64).powi(2);
        assert!((v.re - want).abs() <= 1e-8 * want);
    }
    assert_eq!(json(&d.path().join("forward.json"))["via"], "kernel");
}

#[test]
fn degenerate_and_failing_runs_leave_error_json() {
    let d = tempfile::tempdir().unwrap();
    let q = preset(d.path(), "zero");
    assert_eq!(call(d.path(), &["forward", "--potential", &q, "--a", "1"]), 2);
    assert_eq!(json(&d.path().join("error.json"))["exit_code"], 2);

    let s = SpectrumSeq::new(SpectrumKind::TransmissionA1, 2, (2..40).map(|k| C64::new((PI * k as f64).powi(2) / 4.0, 0.0)).collect());
    let csv = d.path().join("lattice.csv");
    fs::write(&csv, io::spectrum_to_csv(&s)).unwrap();
    let e = tempfile::tempdir().unwrap();
    assert_eq!(call(e.path(), &["inverse", "--spectrum", csv.to_str().unwrap(), "--eta-re", "0"]), 1);
    let err = json(&e.path().join("error.json"));
    assert_eq!(err["stage"], "recover_v");
    assert_eq!(err["exit_code"], 1);
}

#[test]
fn flags_override_config() {
    let d = tempfile::tempdir().unwrap();
    let q = preset(d.path(), "zero");
    let cfg = d.path().join("cfg.json");
    fs::write(&cfg, format!(r#"{{"potential": "{q}", "a": 2.0, "count": 3}}"#)).unwrap();
    let c = cfg.to_str().unwrap();
    assert_eq!(call(d.path(), &["forward", "--config", c]), 0);
    let s = io::read_spectrum(&d.path().join("spectrum.csv"), SpectrumKind::TransmissionA1, 1.0).unwrap();
    assert_eq!((s.a, s.len()), (2.0, 3));
    assert_eq!(call(d.path(), &["forward", "--config", c, "--count", "5", "--a", "-1"]), 0);
    let s = io::read_spectrum(&d.path().join("spectrum.csv"), SpectrumKind::TransmissionA1, 1.0).unwrap();
    assert_eq!((s.a, s.len()), (-1.0, 5));
}

#[test]
fn seeded_outputs_are_byte_identical() {
    let d = tempfile::tempdir().unwrap();
    let q = preset(d.path(), "linear_centered");
    let args = ["stability", "--potential", &q, "--count", "30", "--levels", "1e-3", "--draws", "2", "--seed", "11"];
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    assert_eq!(call(a.path(), &args), 0);
    assert_eq!(call(b.path(), &args), 0);
    let x = fs::read(a.path().join("stability.json")).unwrap();
    assert_eq!(x, fs::read(b.path().join("stability.json")).unwrap());
    assert_eq!(json(&a.path().join("stability.json"))["runs"].as_array().unwrap().len(), 2);
}

#[test]
fn example_one_tie_is_reported() {
    let d = tempfile::tempdir().unwrap();
    let s = SpectrumSeq::new(SpectrumKind::TransmissionA1, 2, (2..402).map(|k| C64::new((PI * k as f64).powi(2) / 4.0, 0.0)).collect());
    let csv = d.path().join("lattice.csv");
    fs::write(&csv, io::spectrum_to_csv(&s)).unwrap();
    let eta = format!("{}", 3.0 * PI * PI / 8.0);
    assert_eq!(call(d.path(), &["check-solvability", "--a", "1", "--spectrum", csv.to_str().unwrap(), "--eta-re", &eta]), 0);
    let r = json(&d.path().join("solvability.json"));
    let first = &r["gamma_scan"][0];
    assert!((first["gamma"].as_f64().unwrap() + 3.0).abs() < 1e-12);
    assert_eq!(first["interlace_ok"], false);
}
