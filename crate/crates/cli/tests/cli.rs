use std::path::Path;
use std::process::{Command, Output};

use gcselect::config::{parse_overrides, RunConfig, Spacing, SweepAxis};
use gcselect::output::sci;

fn gcselect(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gcselect"))
        .args(args)
        .env_remove("GCSELECT_JOBS")
        .output()
        .expect("binary runs")
}

fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

fn table(path: &Path) -> (Vec<String>, Vec<Vec<f64>>) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|rec| rec.unwrap().iter().map(|f| f.parse().unwrap()).collect())
        .collect();
    (header, rows)
}

#[test]
fn sci_matches_c_printf() {
    assert_eq!(sci(0.0), "0.000000000000e+00");
    assert_eq!(sci(-1234.5), "-1.234500000000e+03");
    assert_eq!(sci(1e-300), "1.000000000000e-300");
    assert_eq!(sci(0.123456789012345), "1.234567890123e-01");
    assert_eq!(sci(f64::NAN), "nan");
}

#[test]
fn config_file_and_overrides() {
    let mut cfg = RunConfig::default();
    cfg.apply_text("# comment\nMU = 0.5\n\n eps=0.05 # trailing\naxis = EPS\n", "test")
        .unwrap();
    assert_eq!(cfg.params.mu, 0.5);
    assert_eq!(cfg.params.eps, 0.05);
    assert_eq!(cfg.axis, SweepAxis::Eps);
    assert!(cfg.is_set("mu") && !cfg.is_set("dt"));
    assert!(cfg.apply_text("nonsense = 1", "test").is_err());
    assert!(cfg.apply_text("mu 1", "test").is_err());
    assert!(cfg.apply_text("dt = fast", "test").is_err());

    let args: Vec<String> = ["--mu", "2", "--dt=1e-4", "--q0", "-1"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    let pairs = parse_overrides(&args).unwrap();
    assert_eq!(pairs[1], ("dt".to_string(), "1e-4".to_string()));
    assert_eq!(pairs[2].1, "-1");
    assert!(parse_overrides(&["--mu".to_string()]).is_err());
    assert!(parse_overrides(&["mu".to_string()]).is_err());
}

#[test]
fn sweep_values_follow_spacing() {
    let mut cfg = RunConfig::default();
    cfg.sweep_start = 1e-2;
    cfg.sweep_stop = 1e2;
    cfg.sweep_count = 5;
    let v = cfg.sweep_values().unwrap();
    for (got, want) in v.iter().zip([1e-2, 1e-1, 1.0, 1e1, 1e2]) {
        assert!((got - want).abs() <= 1e-12 * want);
    }
    cfg.sweep_spacing = Spacing::Lin;
    cfg.sweep_start = 0.0;
    assert_eq!(cfg.sweep_values().unwrap()[4], 1e2);
    cfg.sweep_spacing = Spacing::Log;
    assert!(cfg.sweep_values().is_err());
}

#[test]
fn override_wins_over_file() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("run.cfg");
    std::fs::write(&file, "mu = 0.5\ndt = 1e-2\n").unwrap();
    let cfg = RunConfig::load(Some(&file), &[("MU".into(), "3".into())]).unwrap();
    assert_eq!(cfg.params.mu, 3.0);
    assert_eq!(cfg.dt, 1e-2);
}

#[test]
fn simulate_uniform_selection_reaches_ln_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = gcselect(&["simulate", "--out", out, "--eps", "1", "--dt", "1e-4", "--n_cells", "100"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let stdout = String::from_utf8(o.stdout).unwrap();
    let t: f64 = stdout.split_whitespace().nth(1).unwrap().parse().unwrap();
    assert!((t - 2f64.ln()).abs() < 1e-3, "{stdout}");
    let (header, rows) = table(&dir.path().join("timeseries.csv"));
    assert_eq!(header, ["t", "rho", "mass", "q_regime"]);
    assert!(rows.windows(2).all(|w| w[1][1] >= w[0][1]));
}

#[test]
fn snapshots_have_one_row_per_node() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = gcselect(&[
        "simulate",
        "--out",
        out,
        "--n_cells",
        "80",
        "--snapshot_times",
        "0.25,0.5",
    ]);
    assert!(o.status.success());
    let path = dir.path().join(format!("snapshot_{}.csv", sci(0.25)));
    let (header, rows) = table(&path);
    assert_eq!(header, ["x", "n"]);
    assert_eq!(rows.len(), 81);
    assert!(rows.iter().all(|r| r.len() == 2));
    assert!(!read(&path).contains('\r'));
}

#[test]
fn seeded_runs_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for dir in [&a, &b] {
        let o = gcselect(&[
            "simulate",
            "--out",
            dir.path().to_str().unwrap(),
            "--init",
            "random",
            "--seed",
            "11",
            "--snapshot_times",
            "0.5",
        ]);
        assert!(o.status.success());
    }
    for name in ["timeseries.csv".to_string(), format!("snapshot_{}.csv", sci(0.5))] {
        assert_eq!(read(&a.path().join(&name)), read(&b.path().join(&name)), "{name}");
    }
}

#[test]
fn sweep_output_does_not_depend_on_thread_count() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for (dir, jobs) in [(&a, "1"), (&b, "4")] {
        let o = gcselect(&[
            "sweep",
            "--out",
            dir.path().to_str().unwrap(),
            "--jobs",
            jobs,
            "--axis",
            "mu",
            "--init",
            "dirac",
            "--mass_matrix",
            "lumped",
            "--sweep_start",
            "0.05",
            "--sweep_stop",
            "20",
            "--sweep_count",
            "6",
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let text = read(&a.path().join("sweep_mu.csv"));
    assert_eq!(text, read(&b.path().join("sweep_mu.csv")));
    let mut r = csv::Reader::from_reader(text.as_bytes());
    assert_eq!(r.headers().unwrap().len(), 9);
    for rec in r.records() {
        let rec = rec.unwrap();
        let t: f64 = rec[1].parse().unwrap();
        let (lo, hi): (f64, f64) = (rec[6].parse().unwrap(), rec[7].parse().unwrap());
        assert!(lo <= t && t <= hi, "{rec:?}");
    }
}

#[test]
fn sweep_records_per_point_failures() {
    let dir = tempfile::tempdir().unwrap();
    let o = gcselect(&[
        "sweep",
        "--out",
        dir.path().to_str().unwrap(),
        "--axis",
        "eps",
        "--n_cells",
        "100",
        "--sweep_spacing",
        "lin",
        "--sweep_start",
        "0.01",
        "--sweep_stop",
        "0.1",
        "--sweep_count",
        "2",
    ]);
    assert!(o.status.success());
    let text = read(&dir.path().join("sweep_eps.csv"));
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let rows: Vec<_> = r.records().map(|x| x.unwrap()).collect();
    assert!(rows[0][1].is_empty() && rows[0][8].contains("cells"));
    assert!(!rows[1][1].is_empty() && rows[1][8].is_empty());
}

#[test]
fn spectrum_eigenvectors_are_orthonormal_when_read_back() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = gcselect(&["spectrum", "--out", out, "--eps", "0.1", "--modes", "12"]);
    assert!(o.status.success());
    let (header, rows) = table(&dir.path().join("spectrum.csv"));
    assert_eq!(header, ["k", "lambda_exact", "lambda_asym", "abs_gap"]);
    assert_eq!(rows.len(), 12);
    let vecs: Vec<Vec<f64>> = (0..12)
        .map(|k| {
            let (_, rows) = table(&dir.path().join(format!("eigvec_{k}.csv")));
            rows.iter().map(|r| r[1]).collect()
        })
        .collect();
    let h = 1.0 / (vecs[0].len() - 1) as f64;
    for i in 0..12 {
        for j in 0..12 {
            let p: Vec<f64> = vecs[i].iter().zip(&vecs[j]).map(|(a, b)| a * b).collect();
            let n = p.len();
            let ip = h * (p.iter().sum::<f64>() - 0.5 * (p[0] + p[n - 1]));
            let want = if i == j { 1.0 } else { 0.0 };
            assert!((ip - want).abs() < 1e-9, "({i}, {j}): {ip}");
        }
    }
}

#[test]
fn spectrum_is_well_formed_outside_the_narrow_regime() {
    let dir = tempfile::tempdir().unwrap();
    let o = gcselect(&["spectrum", "--out", dir.path().to_str().unwrap(), "--eps", "1", "--modes", "3"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let (_, rows) = table(&dir.path().join("spectrum.csv"));
    assert_eq!(rows.len(), 3);
    // Uniform selection shifts every eigenvalue by s0 exactly.
    assert!((rows[0][1] - 1.0).abs() < 1e-10);
    assert!(rows.iter().all(|r| (r[3] - (r[1] - r[2]).abs()).abs() < 1e-9));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let cfg = dir.path().join("bad.cfg");
    std::fs::write(&cfg, "mu = 1\nwidth = 3\n").unwrap();
    let o = gcselect(&["simulate", "--config", cfg.to_str().unwrap(), "--out", out]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("width"));
    let o = gcselect(&["simulate", "--config", "/nonexistent/run.cfg"]);
    assert_eq!(o.status.code(), Some(1));
    let o = gcselect(&["simulate", "--out", out, "--q0", "0.5", "--t_max", "1"]);
    assert_eq!(o.status.code(), Some(2));
    let o = gcselect(&["simulate", "--out", out, "--q0", "0.5", "--t_max", "1", "--stop_at_threshold", "false"]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn validate_negative_control_fails_with_code_3() {
    let dir = tempfile::tempdir().unwrap();
    let o = gcselect(&["validate", "--out", dir.path().to_str().unwrap(), "--dt", "0.5"]);
    assert_eq!(o.status.code(), Some(3));
    let report = read(&dir.path().join("validation.csv"));
    let mut r = csv::Reader::from_reader(report.as_bytes());
    assert_eq!(r.headers().unwrap(), vec!["check", "measured", "required", "status"]);
    let status: Vec<String> = r.records().map(|x| x.unwrap()[3].to_string()).collect();
    assert_eq!(status.len(), 11);
    // Time-step sensitive checks: closed-form anchor, output order, large and small mu.
    for i in [2, 4, 6, 7] {
        assert_eq!(status[i], "FAIL", "check {}", i + 1);
    }
    assert!(String::from_utf8_lossy(&o.stdout).contains("[FAIL]"));
}
