//! End-to-end tests of the binary: exit codes, CSV shape, determinism, and
//! the forced-failure hook.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_fermitherm")
}

fn run(args: &[&str]) -> Output {
    Command::new(bin())
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_config(name: &str, body: &str) -> PathBuf {
    let dir = std::env::temp_dir().join("fermitherm-cli-tests");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path
}

fn tmp_out(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join("fermitherm-cli-tests");
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

/// Small but physically meaningful grid for the fast CLI tests.
const SMALL_CONFIG: &str = r#"{
  "d": [1, 2],
  "beta": [1.0, 4.0],
  "hbar": [0.1, 0.5],
  "lambda": [0.1, 6.283185307179586],
  "p": [2, "inf"]
}"#;

fn read_rows(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let text = std::fs::read_to_string(path).unwrap();
    let mut header = Vec::new();
    let mut rows = Vec::new();
    for line in text.lines() {
        if line.starts_with('#') {
            continue;
        }
        let fields: Vec<String> = line.split(',').map(|s| s.to_string()).collect();
        if header.is_empty() {
            header = fields;
        } else {
            rows.push(fields);
        }
    }
    (header, rows)
}

fn col(header: &[String], name: &str) -> usize {
    header.iter().position(|h| h == name).unwrap()
}

#[test]
fn verify_default_grid_exits_zero() {
    let out = tmp_out("verify_default.csv");
    let res = run(&["verify", "--out", out.to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&res.stderr));
    let (header, rows) = read_rows(&out);
    let pass = col(&header, "pass");
    assert!(!rows.is_empty());
    assert!(rows.iter().all(|r| r[pass] == "true"));
}

#[test]
fn verify_small_grid_columns_and_infinity_norm() {
    let cfg = write_config("small.json", SMALL_CONFIG);
    let out = tmp_out("verify_small.csv");
    let res = run(&[
        "verify",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(res.status.code(), Some(0));
    let (header, rows) = read_rows(&out);
    assert_eq!(
        header,
        vec![
            "d", "beta", "hbar", "lambda", "mu", "Z_beta", "Z_mu", "p", "n", "bound_id", "lhs",
            "rhs", "ratio", "pass", "K_used", "tail_est", "wall_ms"
        ]
    );
    // the p=inf main-theorem lhs equals the L∞ proposition lhs (both are
    // the largest singular value of the same gradient)
    let (ip, ib, il) = (col(&header, "p"), col(&header, "bound_id"), col(&header, "lhs"));
    let key_cols = [0usize, 1, 2, 3];
    for row in rows.iter().filter(|r| r[ib] == "main_theorem" && r[ip] == "inf") {
        let partner = rows
            .iter()
            .find(|r| r[ib] == "linf_prop" && key_cols.iter().all(|&k| r[k] == row[k]))
            .expect("matching linf row");
        assert_eq!(row[il], partner[il]);
    }
}

#[test]
fn verify_is_deterministic_modulo_timestamp_and_wall_ms() {
    let cfg = write_config("det.json", SMALL_CONFIG);
    let out1 = tmp_out("det1.csv");
    let out2 = tmp_out("det2.csv");
    // different thread counts must not change the bytes either
    assert_eq!(
        run(&["verify", "--config", cfg.to_str().unwrap(), "--out", out1.to_str().unwrap(), "--threads", "1"])
            .status
            .code(),
        Some(0)
    );
    assert_eq!(
        run(&["verify", "--config", cfg.to_str().unwrap(), "--out", out2.to_str().unwrap(), "--threads", "4"])
            .status
            .code(),
        Some(0)
    );
    let normalize = |p: &Path| -> Vec<String> {
        std::fs::read_to_string(p)
            .unwrap()
            .lines()
            .filter(|l| !l.starts_with("# generated_unix"))
            .map(|l| {
                if l.starts_with('#') || l.starts_with("d,") {
                    l.to_string()
                } else {
                    // wall_ms is the last column
                    let mut f: Vec<&str> = l.split(',').collect();
                    f.pop();
                    f.join(",")
                }
            })
            .collect()
    };
    assert_eq!(normalize(&out1), normalize(&out2));
}

#[test]
fn corrupted_constant_exits_two() {
    let cfg = write_config("corrupt.json", SMALL_CONFIG);
    let out = tmp_out("corrupt.csv");
    let res = run(&[
        "verify",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--corrupt-cdp",
        "1e-3",
    ]);
    assert_eq!(res.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&res.stderr);
    assert!(stderr.contains("bound_violation"), "stderr: {stderr}");
    let (header, rows) = read_rows(&out);
    let (ib, ipass) = (col(&header, "bound_id"), col(&header, "pass"));
    assert!(rows
        .iter()
        .any(|r| r[ib] == "main_theorem" && r[ipass] == "false"));
    // the sandwich is untouched by the corrupted constant
    assert!(rows
        .iter()
        .filter(|r| r[ib] == "fugacity_upper")
        .all(|r| r[ipass] == "true"));
}

#[test]
fn empty_grid_exits_one_without_csv() {
    let cfg = write_config("empty.json", r#"{"beta": []}"#);
    let out = tmp_out("empty.csv");
    std::fs::remove_file(&out).ok();
    let res = run(&[
        "verify",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(res.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&res.stderr).contains("empty grid"));
    assert!(!out.exists());
}

#[test]
fn mu_solve_prints_solution() {
    let res = run(&["mu-solve", "--d", "1", "--beta", "1", "--hbar", "0.5", "--lambda", "1"]);
    assert_eq!(res.status.code(), Some(0));
    let stdout = String::from_utf8_lossy(&res.stdout);
    for key in ["mu = ", "Z_mu = ", "Z_beta_spectral = ", "Z_beta_closed = ", "K = "] {
        assert!(stdout.contains(key), "missing {key} in {stdout}");
    }
    // Z_mu <= Z_beta in the printout
    let grab = |key: &str| -> f64 {
        stdout
            .lines()
            .find(|l| l.starts_with(key))
            .and_then(|l| l.split(" = ").nth(1))
            .unwrap()
            .parse()
            .unwrap()
    };
    assert!(grab("Z_mu") <= grab("Z_beta_closed"));
}

#[test]
fn sweep_scaling_slope_and_low_density_gap() {
    let cfg = write_config(
        "sweep.json",
        r#"{
          "d": [1],
          "beta": [0.5, 1.0, 2.0, 4.0, 8.0],
          "hbar": [0.001],
          "lambda": [1e-5],
          "p": [2]
        }"#,
    );
    let out = tmp_out("sweep.csv");
    let res = run(&[
        "sweep-scaling",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(res.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&res.stderr));
    let (header, rows) = read_rows(&out);
    let (irec, islope, itgt, ipass, igap, istate) = (
        col(&header, "record"),
        col(&header, "slope"),
        col(&header, "slope_target"),
        col(&header, "pass"),
        col(&header, "gap_vs_mb"),
        col(&header, "state"),
    );
    let slope_row = rows.iter().find(|r| r[irec] == "slope").unwrap();
    let slope: f64 = slope_row[islope].parse().unwrap();
    let target: f64 = slope_row[itgt].parse().unwrap();
    assert!(((slope - target) / target).abs() < 0.05);
    assert_eq!(slope_row[ipass], "true");
    // Fermi-Dirac converges to Maxwell-Boltzmann at λ = 1e-5
    for row in rows.iter().filter(|r| r[istate] == "fermi_dirac") {
        let gap: f64 = row[igap].parse().unwrap();
        assert!(gap < 1e-3, "gap {gap}");
    }
}

#[test]
fn sweep_scaling_refuses_short_sweeps() {
    let cfg = write_config(
        "short.json",
        r#"{"d": [1], "beta": [1.0, 2.0, 4.0], "hbar": [0.01], "lambda": [1.0], "p": [2]}"#,
    );
    let res = run(&["sweep-scaling", "--config", cfg.to_str().unwrap(), "--out", tmp_out("short.csv").to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&res.stderr).contains("regression refused"));
}

#[test]
fn wigner_moments_samples_and_normalization() {
    let cfg = write_config(
        "wig.json",
        r#"{"d": [1], "beta": [1.0], "hbar": [0.5], "lambda": [1.0], "wigner_zmax": 6.0, "wigner_samples": 121}"#,
    );
    let out = tmp_out("wig.csv");
    let res = run(&["wigner", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(0));
    let (header, rows) = read_rows(&out);
    let (irec, irel, ir, idens) = (
        col(&header, "record"),
        col(&header, "rel_err"),
        col(&header, "r"),
        col(&header, "density"),
    );
    for row in rows.iter().filter(|r| r[irec] == "moment") {
        let rel: f64 = row[irel].parse().unwrap();
        assert!(rel < 1e-7, "moment rel err {rel}");
    }
    // peak equals the closed-form prefactor (βθ(βħ/2)/2π)^d
    let theta = |x: f64| x.tanh() / x;
    let prefactor = 1.0 * theta(0.25) / (2.0 * std::f64::consts::PI);
    let first = rows.iter().find(|r| r[irec] == "sample").unwrap();
    let d0: f64 = first[idens].parse().unwrap();
    assert!(((d0 - prefactor) / prefactor).abs() < 1e-12);
    // coarse trapezoid of ∫ f dz = ∫ 2πr f(r) dr over the sample grid
    let samples: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r[irec] == "sample")
        .map(|r| (r[ir].parse().unwrap(), r[idens].parse().unwrap()))
        .collect();
    let mut integral = 0.0;
    for pair in samples.windows(2) {
        let (r0, f0) = pair[0];
        let (r1, f1) = pair[1];
        integral += 0.5 * (r1 - r0) * (r0 * f0 + r1 * f1) * 2.0 * std::f64::consts::PI;
    }
    assert!((integral - 1.0).abs() < 1e-3, "trapezoid integral {integral}");
}

#[test]
fn selftest_passes() {
    let res = run(&["selftest"]);
    assert_eq!(res.status.code(), Some(0));
    let stdout = String::from_utf8_lossy(&res.stdout);
    assert!(stdout.contains("selftest partition-identity: ok"));
    assert!(stdout.contains("selftest oracle-gradient-spectra: ok"));
}

#[test]
fn schatten_exponent_flag_changes_norms() {
    // d=2 rows react to the 3/p prefactor; the ∞ norm does not
    let cfg = write_config(
        "expo.json",
        r#"{"d": [2], "beta": [1.0], "hbar": [0.5], "lambda": [1.0], "p": [2, "inf"], "bounds": ["main_theorem"]}"#,
    );
    let out_d = tmp_out("expo_d.csv");
    let out_3 = tmp_out("expo_3.csv");
    run(&["verify", "--config", cfg.to_str().unwrap(), "--out", out_d.to_str().unwrap()]);
    run(&["verify", "--config", cfg.to_str().unwrap(), "--out", out_3.to_str().unwrap(), "--schatten-exponent", "3"]);
    let (h1, r1) = read_rows(&out_d);
    let (_, r2) = read_rows(&out_3);
    let (ip, il) = (col(&h1, "p"), col(&h1, "lhs"));
    let find = |rows: &Vec<Vec<String>>, p: &str| -> f64 {
        rows.iter().find(|r| r[ip] == p).unwrap()[il].parse().unwrap()
    };
    let h = std::f64::consts::PI; // 2πħ at ħ = 0.5
    let expected_ratio = h.powf(3.0 / 2.0) / h.powf(2.0 / 2.0);
    let ratio = find(&r2, "2.0000000000000000e0") / find(&r1, "2.0000000000000000e0");
    assert!(((ratio - expected_ratio) / expected_ratio).abs() < 1e-12);
    assert_eq!(find(&r1, "inf"), find(&r2, "inf"));
}
