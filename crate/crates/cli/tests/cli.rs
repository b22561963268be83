use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use beta_lab::output::{parse_profile_csv, CSV_HEADER};
use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_beta-lab"))
        .args(args)
        .env_remove("BETA_LAB_SEED")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap()
}

fn failed_checks(v: &Value) -> Vec<String> {
    v["checks"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|c| c["passed"] == false)
        .map(|c| c["name"].as_str().unwrap().to_string())
        .collect()
}

const SMALL: [&str; 6] = ["--eps", "0.5", "--r-max", "5", "--nodes", "257"];

#[test]
fn solve_csv_round_trips_the_profile_invariants() {
    let o = run(&[&["solve", "--beta", "2"], &SMALL[..]].concat());
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.starts_with(CSV_HEADER));
    let rows = parse_profile_csv(&text).unwrap();
    assert_eq!(rows.len(), 257);
    for row in rows {
        let a = 1.0 + row.fp * row.fp + row.gp * row.gp;
        assert!((row.r * row.fp * a.powf(0.5) - 1.0).abs() < 1e-12);
        assert!((row.cos_alpha - a.powf(-0.5)).abs() < 1e-15);
        assert!(row.residual < 1e-8);
    }
}

#[test]
fn solve_log_profile() {
    let o = run(&["solve", "--beta", "1", "--c1", "1", "--c2", "1", "--eps", "0.1", "--r-max", "10", "--f0", "0.25"]);
    assert!(o.status.success());
    for row in parse_profile_csv(&stdout(&o)).unwrap() {
        assert!((row.f - (row.r / 0.1).ln() - 0.25).abs() < 1e-10);
    }
}

#[test]
fn solve_inside_the_neck_fails_numerically() {
    let o = run(&["solve", "--beta", "0", "--c1", "1", "--c2", "1", "--eps", "1.0"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("NoSolution"));
}

#[test]
fn solve_svg_has_one_path_per_profile() {
    let o = run(&[&["solve", "--beta", "0.5,2,5", "--format", "svg"], &SMALL[..]].concat());
    assert!(o.status.success(), "{}", stderr(&o));
    let svg = stdout(&o);
    assert!(svg.starts_with("<svg"));
    assert_eq!(svg.matches("<path").count(), 3);
    assert!(svg.contains(">r</text>") && svg.contains(">f(r)</text>"));
    assert!(!svg.contains("href") && !svg.contains("<style"));
}

#[test]
fn csv_needs_a_single_beta() {
    let o = run(&["solve", "--beta", "1,2"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn sweep_writes_family_and_matches_solve() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = run(&["sweep", "--beta", "0.1,1,10", "--nodes", "257", "--out", out]);
    assert!(o.status.success(), "{}", stderr(&o));
    for name in ["profile_beta_0.1.csv", "profile_beta_1.csv", "profile_beta_10.csv", "family.svg", "continuity.json"] {
        assert!(dir.path().join(name).exists(), "{name}");
    }
    let report: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("continuity.json")).unwrap()).unwrap();
    assert_eq!(report["slope_decreasing_in_beta"], true);
    assert_eq!(report["catenoid_reference"], true);
    let svg = fs::read_to_string(dir.path().join("family.svg")).unwrap();
    assert_eq!(svg.matches("<path").count(), 4);
    assert!(svg.contains("stroke-dasharray"));

    let single = tempfile::tempdir().unwrap();
    let o = run(&["sweep", "--beta", "1", "--nodes", "257", "--out", single.path().to_str().unwrap()]);
    assert!(o.status.success());
    let swept = fs::read_to_string(single.path().join("profile_beta_1.csv")).unwrap();
    let solved = run(&["solve", "--beta", "1", "--eps", "2", "--r-max", "5", "--nodes", "257"]);
    assert_eq!(swept, stdout(&solved));
}

#[test]
fn sweep_with_negative_integrals_mirrors() {
    let read = |c: &str, dir: &Path| {
        let (c1, c2) = (format!("--c1={c}"), format!("--c2={c}"));
        let o = run(&["sweep", "--beta", "2", "--nodes", "129", &c1, &c2, "--out", dir.to_str().unwrap()]);
        assert!(o.status.success(), "{}", stderr(&o));
        parse_profile_csv(&fs::read_to_string(dir.join("profile_beta_2.csv")).unwrap()).unwrap()
    };
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let plus = read("1", a.path());
    let minus = read("-1", b.path());
    for (p, m) in plus.iter().zip(&minus) {
        assert_eq!(p.fp, -m.fp);
        assert!((p.f + m.f).abs() < 1e-14);
    }
}

#[test]
fn verify_passes_and_negative_control_fails() {
    let o = run(&["verify"]);
    let v = json(&o);
    assert_eq!(o.status.code(), Some(0), "{:?}", failed_checks(&v));
    assert_eq!(v["passed"], true);
    for c in v["checks"].as_array().unwrap() {
        assert!(c["tolerance"].is_number());
    }
    let o = run(&["verify", "--corrupt-fp", "1.01"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(failed_checks(&json(&o)), ["first_integral"]);
}

#[test]
fn verify_catenoid_closed_form() {
    let o = run(&["verify", "--beta", "0", "--eps", "2", "--r-max", "10"]);
    let v = json(&o);
    assert!(o.status.success(), "{:?}", failed_checks(&v));
    let names: Vec<&str> = v["checks"].as_array().unwrap().iter().map(|c| c["name"].as_str().unwrap()).collect();
    assert!(names.contains(&"closed_form"));
}

#[test]
fn config_file_env_and_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "# symbol run\nbeta = 2\nsamples = 5\nseed = 3\n").unwrap();
    let c = cfg.to_str().unwrap();
    let seed_of = |o: &Output| json(o)["seed"].as_u64().unwrap();

    let o = run(&["symbol", "--config", c]);
    assert_eq!(seed_of(&o), 3);
    assert_eq!(json(&o)["sweeps"][0]["pairs"], 5);

    let o = Command::new(env!("CARGO_BIN_EXE_beta-lab"))
        .args(["symbol", "--config", c])
        .env("BETA_LAB_SEED", "17")
        .output()
        .unwrap();
    assert_eq!(seed_of(&o), 17);

    let o = Command::new(env!("CARGO_BIN_EXE_beta-lab"))
        .args(["symbol", "--config", c, "--seed", "99", "--samples", "7"])
        .env("BETA_LAB_SEED", "17")
        .output()
        .unwrap();
    assert_eq!(seed_of(&o), 99);
    assert_eq!(json(&o)["sweeps"][0]["pairs"], 7);
}

#[test]
fn usage_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    fs::write(&cfg, "bta = 2\n").unwrap();
    let o = run(&["symbol", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("UnknownKey"));
    assert_eq!(run(&["solve", "--bogus"]).status.code(), Some(2));
    assert_eq!(run(&["solve", "--beta", "-1"]).status.code(), Some(2));
    assert_eq!(run(&["solve", "--tol", "nonsense=1"]).status.code(), Some(2));
}

#[test]
fn tolerance_overrides_are_reported() {
    let o = run(&["symbol", "--beta", "1", "--samples", "10", "--tol", "factorization=1e-9"]);
    let v = json(&o);
    let c = v["checks"].as_array().unwrap().iter().find(|c| c["name"] == "factorization_error").unwrap().clone();
    assert_eq!(c["tolerance"].as_f64(), Some(1e-9));
}

#[test]
fn variation_reports_routes_and_negative_control() {
    let o = run(&["variation", "--samples", "1", "--nodes", "1025"]);
    let v = json(&o);
    assert!(o.status.success(), "{:?}", failed_checks(&v));
    let control = &v["negative_control"][0];
    assert!(control["dl_formula"].as_f64().unwrap().abs() > 1e-3);
    assert!(v["fields"][0]["d2l_pair"].is_number());
}

#[test]
fn outputs_are_deterministic() {
    let a = run(&[&["solve", "--beta", "2"], &SMALL[..]].concat());
    let b = run(&[&["solve", "--beta", "2"], &SMALL[..]].concat());
    assert_eq!(a.stdout, b.stdout);
    let a = run(&["symbol", "--seed", "5"]);
    let b = run(&["symbol", "--seed", "5"]);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn out_flag_writes_a_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("p.json");
    let o = run(&[&["solve", "--format", "json", "--out", path.to_str().unwrap()], &SMALL[..]].concat());
    assert!(o.status.success());
    assert!(o.stdout.is_empty());
    let v: Value = serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap();
    assert!(v[0]["first_integral_residual"].as_f64().unwrap() < 1e-10);
}
