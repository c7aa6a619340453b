use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use plasticwalk::config::ExperimentConfig;
use plasticwalk::plastic::half_half_pde;
use plasticwalk::Mat2;
use serde_json::Value;
use tempfile::TempDir;

const TIME: &str = r#"
seed = 3

[walk]
tau = 2
a = "0"

[walk.coin_x]
delta = "-pi/2"
zeta0 = 0.1
theta0 = "pi"
theta1 = 0.3

[walk.coin_y]
theta0 = 0
theta1 = -0.8
phi0 = 0.4

[lattice]
nx = 8
ny = 8

[run]
grid = 8
steps = 20
eps = 0.05
"#;

const HALF: &str = r#"
[walk]
a = "1/2"
b = "1/2"

[walk.coin_x]
delta = "pi/2"
zeta0 = 0.3
theta0 = 0
theta1 = 0.4
phi0 = "pi"

[walk.coin_y]
zeta0 = 0
theta0 = "pi"
theta1 = 0.2
phi0 = -0.3
"#;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_plasticwalk"))
}

fn write(dir: &TempDir, name: &str, text: &str) -> String {
    let p = dir.path().join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

/// Data rows of a CSV file, skipping the schema comment and the header.
fn csv_rows(text: &str) -> (String, Vec<Vec<String>>) {
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    let header = lines.next().unwrap().to_string();
    (
        header,
        lines.map(|l| l.split(',').map(str::to_string).collect()).collect(),
    )
}

fn matrix(v: &Value) -> Mat2 {
    let r: Vec<f64> = v.as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
    Mat2::from_reals(r.try_into().unwrap())
}

#[test]
fn check_compliant_time_walk() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "t.toml", TIME);
    let out = run(&["check", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let v = json(&out);
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["passed"], true);
    let branch = &v["conditions"][0];
    assert_eq!(branch["name"], "theta_branch");
    assert_eq!(branch["witness"]["nu"], 1);
    assert_eq!(v["conditions"][1]["witness"]["p"], 1);
}

#[test]
fn check_odd_tau_fails() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "t.toml", &TIME.replace("tau = 2", "tau = 3"));
    let out = run(&["check", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("tau_even: false"));
    assert_eq!(json(&out)["passed"], false);
}

#[test]
fn check_plastic_reports_conditions() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "h.toml", HALF);
    let out = run(&["check", "--config", &cfg, "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let (header, rows) = csv_rows(&String::from_utf8(out.stdout).unwrap());
    assert_eq!(header, "name,satisfied,residual,witness");
    let names: Vec<_> = rows.iter().map(|r| r[0].as_str()).collect();
    assert!(names.contains(&"no_divergence"));
    assert!(rows.iter().all(|r| r[1] == "true"));

    let divergent = write(&dir, "d.toml", &HALF.replace("phi0 = \"pi\"", "phi0 = \"pi/2\""));
    assert_eq!(run(&["check", "--config", &divergent]).status.code(), Some(1));
}

#[test]
fn usage_and_parse_errors_exit_2() {
    let dir = TempDir::new().unwrap();
    let bad_rational = write(&dir, "r.toml", &HALF.replace("a = \"1/2\"", "a = \"1/0\""));
    assert_eq!(run(&["check", "--config", &bad_rational]).status.code(), Some(2));
    let float_exp = write(&dir, "f.toml", &HALF.replace("a = \"1/2\"", "a = 0.5"));
    assert_eq!(run(&["check", "--config", &float_exp]).status.code(), Some(2));
    let missing = dir.path().join("missing.toml");
    assert_eq!(
        run(&["check", "--config", missing.to_str().unwrap()]).status.code(),
        Some(2)
    );
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(run(&["check", "--format", "xml"]).status.code(), Some(2));
    assert_eq!(run(&["check", "--threads", "0"]).status.code(), Some(2));
    let time = write(&dir, "t.toml", TIME);
    assert_eq!(run(&["pde", "--config", &time]).status.code(), Some(2));
}

#[test]
fn hamiltonian_zero_angle_branch_zero() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        &dir,
        "z.toml",
        r#"
[walk.coin_x]
delta = "-pi/2"
theta1 = 0.6
[walk.coin_y]
theta0 = "pi"
theta1 = -0.2
"#,
    );
    let out = run(&["hamiltonian", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let v = json(&out);
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["nu"], 0);
    let terms = v["terms"].as_array().unwrap();
    let shifts: Vec<(i64, i64)> = terms
        .iter()
        .map(|t| (t["px"].as_i64().unwrap(), t["py"].as_i64().unwrap()))
        .collect();
    assert_eq!(shifts, [(2, 0), (0, 2), (0, 0), (2, 2)]);
    // with every phase angle zero each term is θ1 σy / 4
    let sy = Mat2::from_reals([0.0, 0.0, 0.0, -1.0, 0.0, 1.0, 0.0, 0.0]);
    for (t, th) in terms.iter().zip([0.6, 0.6, -0.2, -0.2]) {
        assert!(matrix(&t["matrix"]).approx_eq(&(sy * (th / 4.0)), 1e-15));
        assert_eq!(t["matrix"].as_array().unwrap().len(), 8);
    }
    assert!(v["rendered"]
        .as_str()
        .unwrap()
        .starts_with("Ĥ = [M₁]Sx² + [M₂]Sy² + [M₃]I + [M₄]Sx²Sy²"));
}

#[test]
fn hamiltonian_rejects_non_compliant() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "t.toml", &TIME.replace("theta0 = \"pi\"", "theta0 = 0"));
    let out = run(&["hamiltonian", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("theta_branch"));
}

#[test]
fn pde_matches_closed_form() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "h.toml", HALF);
    let out = run(&["pde", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let v = json(&out);
    assert_eq!(v["schema_version"], 1);
    assert!(v["rendered"]
        .as_str()
        .unwrap()
        .starts_with("∂t Ψ = [M₁]∂x Ψ + [M₂]∂y Ψ"));
    let terms = v["terms"].as_array().unwrap();
    assert_eq!(terms.len(), 4);
    let axis = |dx: u64| -> Mat2 {
        let picked: Vec<_> = terms.iter().filter(|t| t["dx_power"] == dx).collect();
        assert_eq!(picked.len(), 2);
        picked.iter().map(|t| matrix(&t["matrix"])).sum()
    };
    let walk = ExperimentConfig::from_toml_str(HALF).unwrap().walk_config().unwrap();
    let (px, py) = half_half_pde(&walk).unwrap();
    assert!(axis(1).approx_eq(&px, 1e-12));
    assert!(axis(0).approx_eq(&py, 1e-12));

    let divergent = write(&dir, "d.toml", &HALF.replace("phi0 = \"pi\"", "phi0 = \"pi/2\""));
    let out = run(&["pde", "--config", &divergent]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("no_divergence"));
}

fn sidecar(csv: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(csv.with_extension("json")).unwrap()).unwrap()
}

#[test]
fn converge_writes_csv_and_sidecar() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "t.toml", TIME);
    let path = dir.path().join("conv.csv");
    let out = run(&[
        "converge",
        "--config",
        &cfg,
        "--format",
        "csv",
        "--output",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("# schema_version: 1\n"));
    let (header, rows) = csv_rows(&text);
    assert_eq!(header, "eps,error");
    assert_eq!(rows.len(), 7);
    for r in &rows {
        for cell in r {
            let mantissa = cell.split('e').next().unwrap().replace(['-', '.'], "");
            assert_eq!(mantissa.len(), 17, "{cell}");
        }
    }
    let meta = sidecar(&path);
    assert_eq!(meta["schema_version"], 1);
    assert!((meta["slope"].as_f64().unwrap() - 1.0).abs() < 0.15);
    assert_eq!(meta["strictly_decreasing"], true);

    let plastic = write(&dir, "h.toml", HALF);
    let out = run(&["converge", "--config", &plastic]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let v = json(&out);
    assert_eq!(v["samples"].as_array().unwrap().len(), 7);
    assert!(v["slope"].as_f64().unwrap() > 0.3);
}

#[test]
fn simulate_reports_norm_drift() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        &dir,
        "t.toml",
        &TIME
            .replace("nx = 8\nny = 8", "nx = 64\nny = 64")
            .replace("steps = 20", "steps = 1000"),
    );
    let out = run(&["simulate", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let v = json(&out);
    assert_eq!(v["schema_version"], 1);
    assert!(v["max_norm_drift"].as_f64().unwrap() <= 1e-12);
    assert_eq!(v["trajectory"].as_array().unwrap().len(), 1001);
}

#[test]
fn output_is_deterministic_per_seed() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "t.toml", TIME);
    let a = run(&["simulate", "--config", &cfg]);
    let b = run(&["simulate", "--config", &cfg, "--threads", "2"]);
    assert_eq!(a.stdout, b.stdout);
    let c = run(&["simulate", "--config", &cfg, "--seed", "4"]);
    assert_ne!(a.stdout, c.stdout);
    assert_eq!(json(&c)["seed"], 4);
}

#[test]
fn dispersion_grid() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "t.toml", TIME);
    let path = dir.path().join("bands.csv");
    let out = run(&[
        "dispersion",
        "--config",
        &cfg,
        "--format",
        "csv",
        "--output",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let (header, rows) = csv_rows(&fs::read_to_string(&path).unwrap());
    assert_eq!(header, "kx,ky,phase1,phase2");
    assert_eq!(rows.len(), 64);
    for r in &rows {
        let p1: f64 = r[2].parse().unwrap();
        let p2: f64 = r[3].parse().unwrap();
        assert!(p1 <= p2);
    }
    assert_eq!(sidecar(&path)["nx"], 8);

    let v = json(&run(&["dispersion", "--config", &cfg]));
    assert_eq!(v["points"].as_array().unwrap().len(), 64);
}

#[test]
fn terms_half_half() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "h.toml", HALF);
    let out = run(&["terms", "--config", &cfg, "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    let (header, rows) = csv_rows(&String::from_utf8(out.stdout).unwrap());
    assert!(header.ends_with(",group"));
    assert_eq!(rows.len(), 36);
    let count = |g: &str| rows.iter().filter(|r| r.last().unwrap() == g).count();
    assert_eq!(
        [count("two_l"), count("l_and_n"), count("two_n"), count("single_two")],
        [6, 16, 6, 8]
    );
    let v = json(&run(&["terms", "--config", &cfg]));
    assert_eq!(v["count"], 36);
    assert_eq!(v["schema_version"], 1);
}
