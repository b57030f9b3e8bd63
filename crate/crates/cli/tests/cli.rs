use std::f64::consts::{FRAC_1_PI, SQRT_2};
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn nlamp(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nlamp"))
        .args(args)
        .arg("--out")
        .arg(dir)
        .output()
        .expect("binary runs")
}

fn ok(out: &Output) {
    assert!(
        out.status.success(),
        "exit {:?}: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
}

fn rows(path: &Path) -> Vec<Vec<String>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

fn f(s: &str) -> f64 {
    s.parse().unwrap()
}

fn grid(path: &Path) -> (Vec<f64>, Vec<(f64, f64, f64)>) {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(f).collect();
    let pts = lines
        .map(|l| {
            let v: Vec<f64> = l.split(',').map(f).collect();
            (v[0], v[1], v[2])
        })
        .collect();
    (header, pts)
}

#[test]
fn table1_default() {
    let dir = TempDir::new().unwrap();
    ok(&nlamp(dir.path(), &["table1"]));
    let path = dir.path().join("table1.csv");
    let text = fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("state,n_qnd,n_pd1,n_pd2,abs_mean_a,one_minus_F,P\n"));
    let rows = rows(&path);
    assert_eq!(rows.len(), 9);
    let first = &rows[0];
    assert_eq!(&first[..4], ["1", "1", "0", "1"]);
    assert!((f(&first[4]) - 0.686).abs() < 5e-4);
    assert!((f(&first[5]) - 4.84e-3).abs() < 5e-6);
    assert!((f(&first[6]) - 1.36e-3).abs() < 5e-6);
    assert_eq!(rows[8][0], "other");
    let total: f64 = rows.iter().map(|r| f(&r[6])).sum();
    assert!((total - 1.0).abs() < 1e-9);
    // 17 significant digits
    assert_eq!(first[6].split('e').next().unwrap().len(), 18);

    // deterministic
    let again = TempDir::new().unwrap();
    ok(&nlamp(again.path(), &["table1"]));
    assert_eq!(
        text,
        fs::read_to_string(again.path().join("table1.csv")).unwrap()
    );
}

#[test]
fn table1_without_signal() {
    let dir = TempDir::new().unwrap();
    ok(&nlamp(dir.path(), &["table1", "--alpha", "0"]));
    let rows = rows(&dir.path().join("table1.csv"));
    assert_eq!(f(&rows[7][6]), 1.0);
    for r in &rows[..7] {
        assert_eq!(f(&r[6]), 0.0);
        assert!(r[4].is_empty());
    }
}

#[test]
fn config_precedence() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("run.json");
    fs::write(&cfg, r#"{"alpha": 0.3, "r": 0.1}"#).unwrap();
    let cfg = cfg.to_str().unwrap();

    // file only
    ok(&nlamp(dir.path(), &["branches", "--config", cfg]));
    let doc: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("branches.json")).unwrap())
            .unwrap();
    assert_eq!(doc["config"]["alpha"][0], 0.3);
    assert_eq!(doc["config"]["r"][1], 0.1);

    // flag wins over file, file wins over default
    ok(&nlamp(
        dir.path(),
        &["branches", "--config", cfg, "--alpha", "0.5"],
    ));
    let doc: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("branches.json")).unwrap())
            .unwrap();
    assert_eq!(doc["config"]["alpha"][0], 0.5);
    assert_eq!(doc["config"]["r"][1], 0.1);
    assert_eq!(doc["config"]["dim"], 30);
    let b = &doc["branches"];
    assert_eq!(b.as_array().unwrap().len(), 8);
    assert_eq!(b[0]["outcome"]["qnd"], 1);
    assert!(b[4]["coherence_deviation"].as_f64().unwrap() < 1e-10);
}

#[test]
fn sweep_file() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("sweep.json");
    fs::write(
        &cfg,
        r#"{"alpha_min": 0.01, "alpha_max": 1.0, "alpha_points": 12, "r_values": [0.05, 0.4]}"#,
    )
    .unwrap();
    let cfg = cfg.to_str().unwrap();
    ok(&nlamp(dir.path(), &["sweep", "--config", cfg]));
    let text = fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    assert!(text.starts_with("alpha_abs,r,g_eff,F_eff,F_ideal,P_succ\n"));
    let rows = rows(&dir.path().join("sweep.csv"));
    assert_eq!(rows.len(), 24);
    let first = &rows[0];
    assert_eq!(f(&first[1]), 0.05);
    let limit = 2.0 * (1.0f64 - 0.05 * 0.05).powf(1.5);
    assert!((f(&first[2]) - limit).abs() < 1e-3);
    for r in [0.05, 0.4] {
        let g: Vec<f64> = rows
            .iter()
            .filter(|x| f(&x[1]) == r)
            .map(|x| f(&x[2]))
            .collect();
        assert!(g.windows(2).all(|w| w[1] < w[0]));
    }

    let again = TempDir::new().unwrap();
    ok(&nlamp(again.path(), &["sweep", "--config", cfg]));
    assert_eq!(
        text,
        fs::read_to_string(again.path().join("sweep.csv")).unwrap()
    );
}

#[test]
fn optimize_single_threshold() {
    let dir = TempDir::new().unwrap();
    ok(&nlamp(
        dir.path(),
        &[
            "optimize",
            "--geff0-min",
            "1.4",
            "--geff0-max",
            "1.4",
            "--geff0-step",
            "0.05",
        ],
    ));
    let text = fs::read_to_string(dir.path().join("optimize.csv")).unwrap();
    assert!(text.starts_with("g_eff0,p_opt,alpha_opt,r_opt,f_opt,converged\n"));
    let rows = rows(&dir.path().join("optimize.csv"));
    assert_eq!(rows.len(), 1);
    let r = &rows[0];
    assert_eq!(f(&r[0]), 1.4);
    assert!((f(&r[1]) - 1.0e-3).abs() < 0.15e-3);
    assert!((f(&r[2]) - 0.51).abs() < 0.01);
    assert!((f(&r[3]) - 0.38).abs() < 0.01);
    assert!(f(&r[4]) > 0.99);
    assert_eq!(r[5], "true");
}

#[test]
fn optimize_refined_range() {
    let dir = TempDir::new().unwrap();
    ok(&nlamp(
        dir.path(),
        &[
            "optimize",
            "--geff0-min",
            "1.05",
            "--geff0-max",
            "1.3",
            "--geff0-step",
            "0.05",
        ],
    ));
    let rows = rows(&dir.path().join("optimize.csv"));
    assert!(rows.len() > 6);
    let g: Vec<f64> = rows.iter().map(|r| f(&r[0])).collect();
    assert!(g.windows(2).all(|w| w[1] > w[0]));
    let peak = rows
        .iter()
        .max_by(|a, b| f(&a[3]).total_cmp(&f(&b[3])))
        .unwrap();
    assert!((f(&peak[3]) - 0.42).abs() < 0.02 && (f(&peak[0]) - 1.18).abs() < 0.03);
    let dip = rows
        .iter()
        .min_by(|a, b| f(&a[4]).total_cmp(&f(&b[4])))
        .unwrap();
    assert!((f(&dip[4]) - 0.982).abs() < 0.002 && (f(&dip[0]) - 1.08).abs() < 0.03);
    assert!(rows.iter().all(|r| r[5] == "true"));
}

#[test]
fn wigner_grids() {
    let dir = TempDir::new().unwrap();
    let spec = "-6,6,-6,6,121,121";
    ok(&nlamp(
        dir.path(),
        &[
            "wigner", "--grid", spec, "--branch", "input", "--branch", "1", "--branch", "5",
        ],
    ));
    let (header, input) = grid(&dir.path().join("wigner_input.csv"));
    assert_eq!(header, [-6.0, 6.0, -6.0, 6.0, 121.0, 121.0]);
    assert_eq!(input.len(), 121 * 121);
    let coherent =
        |amp: f64, x: f64, p: f64| FRAC_1_PI * (-(x - SQRT_2 * amp).powi(2) - p * p).exp();
    for &(x, p, w) in &input {
        assert!((w - coherent(0.5, x, p)).abs() < 1e-15);
    }

    let (_, one) = grid(&dir.path().join("wigner_branch1.csv"));
    let h = 0.1;
    let integral: f64 = one
        .iter()
        .map(|&(x, p, w)| {
            let wx = if x.abs() > 5.99 { 0.5 } else { 1.0 };
            let wp = if p.abs() > 5.99 { 0.5 } else { 1.0 };
            wx * wp * w * h * h
        })
        .sum();
    assert!((integral - 1.0).abs() < 1e-6);

    let (_, five) = grid(&dir.path().join("wigner_branch5.csv"));
    let amp = (1.0f64 - 0.16).powf(1.5) * 0.5;
    let mut differs = 0.0f64;
    for (a, b) in five.iter().zip(&one) {
        assert!((a.2 - coherent(amp, a.0, a.1)).abs() < 1e-6);
        differs = differs.max((a.2 - b.2).abs());
    }
    assert!(differs > 1e-3);
}

#[test]
fn exit_codes() {
    let dir = TempDir::new().unwrap();
    let code = |args: &[&str]| nlamp(dir.path(), args).status.code();
    assert_eq!(code(&["table1", "--r", "1.5"]), Some(2));
    assert_eq!(code(&["optimize", "--geff0-min", "0.5"]), Some(2));
    assert_eq!(code(&["wigner", "--branch", "9"]), Some(2));
    assert_eq!(code(&["wigner", "--grid", "1,2,3"]), Some(2));
    let cfg = dir.path().join("bad.json");
    fs::write(&cfg, r#"{"alpha": 0.5, "typo": 1}"#).unwrap();
    assert_eq!(
        code(&["table1", "--config", cfg.to_str().unwrap()]),
        Some(2)
    );
    assert_eq!(
        code(&["table1", "--config", "/nonexistent/run.json"]),
        Some(2)
    );

    let out = nlamp(dir.path(), &["wigner", "--alpha", "0", "--branch", "1"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("zero probability"));
}
