use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn workdir(name: &str) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("cli").join(name);
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn write_config(dir: &Path, text: &str) -> PathBuf {
    let path = dir.join("run.toml");
    fs::write(&path, text).unwrap();
    path
}

fn cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_singular-toda")).args(args).output().unwrap()
}

fn run(dir: &Path, command: &str, text: &str) -> Output {
    let config = write_config(dir, text);
    let out = dir.join("out");
    cli(&["run", command, config.to_str().unwrap(), "--output-dir", out.to_str().unwrap()])
}

fn json(path: PathBuf) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

const SPHERE: &str = "[surface]\nkind = \"sphere\"\nresolution = 3\n";

#[test]
fn classify_regular_sphere() {
    let dir = workdir("classify");
    let out = run(&dir, "classify", &format!("rho = [6.283185307179586, 6.283185307179586]\n{SPHERE}"));
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report = json(dir.join("out/classify.json"));
    assert_eq!(report["m"], serde_json::json!([0, 0, 0]));
    assert_eq!(report["coercive"], true);
}

#[test]
fn betti_prints_pair_and_check() {
    let dir = workdir("betti");
    let out = run(&dir, "betti", &format!("{SPHERE}[betti]\nm = [2, 4, 2]\n"));
    assert_eq!(out.status.code(), Some(0));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("(b0~, b1) = (0, 1)"), "{stdout}");
    assert!(stdout.contains("formula check: PASS"), "{stdout}");
}

#[test]
fn unknown_key_exits_2_with_path() {
    let dir = workdir("unknown_key");
    let out = run(&dir, "classify", &format!("rho = [1.0, 1.0]\n{SPHERE}levl = 3\n"));
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("surface.levl"));
}

#[test]
fn validate_reports_constraint_and_separation() {
    let dir = workdir("validate");
    let bad = format!(
        "{SPHERE}[[singular]]\nat = [0.5, 0.5]\nalpha = [-1.2, 0.0]\n[[singular]]\nat = [0.5, 0.5]\nalpha = [0.0, 0.0]\n"
    );
    let config = write_config(&dir, &bad);
    let out = cli(&["validate", config.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("α_{im} > −1"), "{stderr}");
    assert!(stderr.contains("coincide"), "{stderr}");
    let good = write_config(&dir, SPHERE);
    assert_eq!(cli(&["validate", good.to_str().unwrap()]).status.code(), Some(0));
}

#[test]
fn missing_section_is_a_validation_error() {
    let dir = workdir("missing_section");
    assert_eq!(run(&dir, "scan", SPHERE).status.code(), Some(2));
}

#[test]
fn numerical_failure_exits_3() {
    let dir = workdir("numerical");
    // Far outside the coercive range with a tiny iteration budget.
    let text = format!("units = \"4pi\"\nrho = [1.6, 0.2]\n{SPHERE}[background]\nh1 = {{ constant = 1.0, linear = [0.0, 0.0, 0.9] }}\n[solve]\nmax_iters = 3\n");
    let out = run(&dir, "solve", &text);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
    // Artifacts of the failed run are still written.
    assert_eq!(json(dir.join("out/solve.json"))["converged"], false);
    assert!(dir.join("out/trace.csv").exists());
}

#[test]
fn solve_then_concentration_from_file() {
    let dir = workdir("roundtrip");
    let body = format!("rho = [3.0, 3.0]\n{SPHERE}[[singular]]\nat = [0.0, 0.0]\nalpha = [-0.5, -0.5]\n[solve]\ninit = \"random\"\ninit_amplitude = 0.5\n");
    let out = run(&dir, "solve", &body);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let summary = json(dir.join("out/solve.json"));
    assert_eq!(summary["converged"], true);
    let field = dir.join("out/field.csv");
    let header = fs::read_to_string(&field).unwrap();
    assert!(header.starts_with("vertex_id,u1,u2"));

    let conc = format!("{body}[concentration]\ndelta = 0.3\nsource = \"file\"\nfield = \"{}\"\n", field.display());
    let out = run(&dir, "concentration", &conc);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let j = json(dir.join("out/concentration.json"));
    // A coercive minimizer does not concentrate.
    assert!(j["sigma"][0].as_f64().unwrap() > 0.1, "{j}");
}

#[test]
fn csv_and_json_precision() {
    let dir = workdir("precision");
    let out = run(
        &dir,
        "solve",
        &format!("rho = [2.0, 3.0]\n{SPHERE}[background]\nh1 = {{ constant = 1.0, linear = [0.3, 0.0, 0.0] }}\n"),
    );
    assert_eq!(out.status.code(), Some(0));
    let trace = fs::read_to_string(dir.join("out/trace.csv")).unwrap();
    let j = trace.lines().nth(1).unwrap().split(',').nth(1).unwrap();
    let mantissa = j.trim_start_matches('-').split('e').next().unwrap().replace('.', "");
    assert_eq!(mantissa.len(), 17, "{j}");
    let text = fs::read_to_string(dir.join("out/solve.json")).unwrap();
    let v: Value = serde_json::from_str(&text).unwrap();
    let jv = v["j_value"].as_f64().unwrap();
    assert_eq!(jv, format!("{jv:.11e}").parse::<f64>().unwrap());
}

#[test]
fn scan_emits_svg_with_csv_twin() {
    let dir = workdir("scan");
    let text = "units = \"4pi\"\n[surface]\nkind = \"disk\"\nresolution = 8\n[scan]\nrho1 = [0.0, 3.0]\nrho2 = [0.0, 3.0]\nsteps = [30, 30]\n";
    let out = run(&dir, "scan", text);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(dir.join("out/regions.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 900);
    assert!(fs::read_to_string(dir.join("out/regions.svg")).unwrap().starts_with("<svg"));
}
