use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

fn sphpoly(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sphpoly")).args(args).env_remove("SPHPOLY_THREADS").output().unwrap()
}

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data").join(name)
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn lut_build_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.splt");
    let b = dir.path().join("b.splt");
    let out = sphpoly(&["lut-build", "--K", "2", "--D", "1", "--n", "64", "--out", s(&a)]);
    assert!(out.status.success(), "{out:?}");
    let text = stdout(&out);
    let e: f64 = text.lines().last().unwrap().split_whitespace().last().unwrap().parse().unwrap();
    assert!((e - 0.058).abs() / 0.058 < 0.15, "{text}");
    let out = sphpoly(&["lut-build", "--K", "2", "--D", "1", "--n", "64", "--threads", "2", "--out", s(&b)]);
    assert!(out.status.success());
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn usage_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x.splt");
    assert_eq!(sphpoly(&["lut-build", "--K", "0", "--D", "1", "--out", s(&out)]).status.code(), Some(2));
    assert_eq!(sphpoly(&["lut-build", "--K", "2", "--D", "9", "--out", s(&out)]).status.code(), Some(2));
    assert_eq!(sphpoly(&["lut-build", "--K", "2", "--D", "1"]).status.code(), Some(2));
    let missing = dir.path().join("missing.splt");
    let r = sphpoly(&["error-report", "--lut", s(&missing)]);
    assert_eq!(r.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&r.stderr).contains("does not exist"));
    assert_eq!(
        sphpoly(&["error-report", "--K", "2", "--D", "1", "--n", "8", "--format", "xml"]).status.code(),
        Some(2)
    );
    assert!(!sphpoly(&["frobnicate"]).status.success());
}

#[test]
fn error_report_json() {
    let out = sphpoly(&["error-report", "--K", "2,3", "--D", "1,2,3", "--n", "16", "--format", "json"]);
    assert!(out.status.success(), "{out:?}");
    let rep: Value = serde_json::from_slice(&out.stdout).unwrap();
    let rows = rep["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 6);
    for r in rows {
        let (e, q, c) = (r["e_star"].as_f64().unwrap(), r["q_d"].as_f64().unwrap(), r["combined"].as_f64().unwrap());
        assert!(c >= e.max(q));
    }
    assert_eq!(rep["trends"]["q_d_rises_in_d"], Value::Bool(true));
    assert_eq!(rep["trends"]["e_star_falls_in_d"], Value::Bool(true));
    assert!((rep["kappa"].as_f64().unwrap() - 0.352).abs() < 2e-3);

    let table = stdout(&sphpoly(&["error-report", "--K", "2", "--D", "1", "--n", "16"]));
    assert!(table.contains("Q_D") && table.contains("trends"), "{table}");
}

fn render(dir: &Path, particles: &Path, name: &str, extra: &[&str]) -> (Output, Vec<u8>, Value) {
    let out = dir.join(format!("{name}.ppm"));
    let config = data("desk_render.json");
    let mut args = vec!["render", "--config", s(&config)];
    args.extend_from_slice(&["--particles", s(particles), "--out", s(&out), "--n", "64"]);
    args.extend_from_slice(extra);
    let o = sphpoly(&args);
    let img = std::fs::read(&out).unwrap_or_default();
    let rep =
        std::fs::read(out.with_extension("json")).map(|b| serde_json::from_slice(&b).unwrap()).unwrap_or(Value::Null);
    (o, img, rep)
}

#[test]
fn render_desk_scene_and_shuffled_copy() {
    let dir = tempfile::tempdir().unwrap();
    let (o, img, rep) = render(dir.path(), &data("desk_scene.csv"), "desk", &[]);
    assert!(o.status.success(), "{o:?}");
    assert!(img.starts_with(b"P6\n64 64\n255\n"));
    assert_eq!(rep["overflow_count"], 0);
    assert_eq!(rep["particles_on_screen"], 8);
    assert!(img[13..].iter().any(|b| *b > 0));

    let mut particles = sphpoly::scene::desk_scene();
    particles.shuffle(&mut ChaCha8Rng::seed_from_u64(2));
    let shuffled = dir.path().join("shuffled.bin");
    sphpoly::io::write_particles_binary(&shuffled, &particles).unwrap();
    let (o, img2, _) = render(dir.path(), &shuffled, "shuffled", &["--threads", "3"]);
    assert!(o.status.success());
    assert_eq!(img, img2);
}

#[test]
fn empty_particle_file_renders_background() {
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty.csv");
    sphpoly::io::write_particles_csv(&empty, &[]).unwrap();
    let (o, img, rep) = render(dir.path(), &empty, "empty", &[]);
    assert!(o.status.success(), "{o:?}");
    assert_eq!(img.len(), 13 + 3 * 64 * 64);
    assert!(img[13..].iter().all(|b| *b == 0));
    assert_eq!(rep["knot_count"], 0);
}

#[test]
fn render_overflow_fails_with_report() {
    let dir = tempfile::tempdir().unwrap();
    let mut particles = sphpoly::scene::desk_scene();
    let (o, _, _) = render(dir.path(), &data("desk_scene.csv"), "ok", &["--int-width", "32"]);
    assert!(o.status.success());
    // A variance far below the data's range makes the quanta too fine.
    particles[0].mass *= 1e9;
    let path = dir.path().join("heavy.csv");
    sphpoly::io::write_particles_csv(&path, &particles).unwrap();
    let (o, _, rep) = render(dir.path(), &path, "heavy", &["--int-width", "32", "--variance", "1"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(rep["overflow_count"].as_u64().unwrap() > 0);
    assert!(rep["first_error"].as_str().unwrap().contains("particle"));
}

#[test]
fn validate_reports_three_groups() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("v.json");
    let o = sphpoly(&["validate", "--particles", s(&data("desk_scene.csv")), "--n", "64", "--report", s(&report)]);
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 3, "{text}");
    assert!(lines[0].starts_with("PASS telescoping"));
    assert!(lines[1].starts_with("PASS superposition"));
    assert!(lines[2].contains("dense-L2 envelope"));
    assert_eq!(o.status.success(), lines[2].starts_with("PASS"));
    let rep: Value = serde_json::from_slice(&std::fs::read(report).unwrap()).unwrap();
    assert_eq!(rep["groups"].as_array().unwrap().len(), 3);
}
