use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use wva_cli::output::fmt_sig;
use wva_cli::{execute, parse_config, sweep_fig1, Mode, RunConfig};

fn wva(args: &[&str], config: Option<&str>, dir: &Path) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_wva"));
    cmd.args(args).current_dir(dir);
    if let Some(text) = config {
        let path = dir.join("config.json");
        std::fs::write(&path, text).unwrap();
        cmd.arg("--config").arg(path);
    }
    cmd.output().unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn report_at_sixty_degrees() {
    let dir = tempfile::tempdir().unwrap();
    let out = wva(&["report"], Some(r#"{"theta_i": 1.0471975511965976, "g_delta": 0.1}"#), dir.path());
    assert!(out.status.success());
    let v = json(&out);
    let fps = v["result"]["fps_over_qfi"].as_f64().unwrap();
    assert!((fps - 0.985150).abs() <= 1e-6, "{fps}");
    assert_eq!(v["version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(v["config"]["mode"], "report");
    assert!(v["result"]["report"]["p_f"].is_f64());
}

#[test]
fn report_on_an_eigenstate() {
    let dir = tempfile::tempdir().unwrap();
    let v = json(&wva(&["report"], Some(r#"{"theta_i": 0}"#), dir.path()));
    assert!((v["result"]["fm_over_qfi"].as_f64().unwrap() - 1.0).abs() <= 1e-12);
    assert_eq!(v["result"]["report"]["fpf"].as_f64().unwrap(), 0.0);
}

#[test]
fn malformed_config_leaves_no_output() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("out.json");
    let t = target.to_str().unwrap();
    for bad in [r#"{"theta_i": "#, r#"{"theta": 1.0}"#, r#"{"meter_points": 4}"#, r#"{"g": 0.1, "g_delta": 0.1}"#] {
        let out = wva(&["report", "--out", t], Some(bad), dir.path());
        assert_eq!(out.status.code(), Some(2), "{bad}");
        assert!(!target.exists());
    }
    let out = wva(&["sweep-fig1", "--out", t], Some(r#"{"engine": "spline"}"#), dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("closed_form"));
}

#[test]
fn degenerate_postselection_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    let out = wva(&["report"], Some(r#"{"theta_i": 0, "theta_f": 3.141592653589793, "phi": 0}"#), dir.path());
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn montecarlo_needs_replicas() {
    let dir = tempfile::tempdir().unwrap();
    let out = wva(&["montecarlo"], Some(r#"{"replicas": 1}"#), dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn montecarlo_reruns_match_except_timestamp() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = r#"{"nu": 2000, "replicas": 30, "g_delta": 0.1}"#;
    let a = json(&wva(&["montecarlo", "--seed", "9"], Some(cfg), dir.path()));
    let b = json(&wva(&["montecarlo", "--seed", "9", "--threads", "1"], Some(cfg), dir.path()));
    let strip = |mut v: Value| {
        v.as_object_mut().unwrap().remove("timestamp_unix");
        serde_json::to_string(&v).unwrap()
    };
    assert!(a["timestamp_unix"].is_u64());
    assert_eq!(a["result"]["seed"], 9);
    assert_eq!(a["config"]["seed"], 9);
    assert_eq!(a["result"]["config_hash"].as_str().unwrap().len(), 64);
    assert!(a["result"]["generator"].as_str().unwrap().starts_with("ChaCha8Rng"));
    assert_eq!(strip(a), strip(b));
}

#[test]
fn csv_layout() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("fig1.csv");
    let out = wva(&["sweep-fig1", "--out", path.to_str().unwrap()], Some(r#"{"theta_points": 40}"#), dir.path());
    assert!(out.status.success());
    let text = std::fs::read_to_string(&path).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# tool: wva"));
    let cfg_line = lines.next().unwrap();
    assert!(cfg_line.starts_with("# config: {"));
    assert!(cfg_line.contains(r#""theta_points":40"#));
    assert_eq!(lines.next().unwrap(), "theta_i,fm_over_qfi,fpf_over_qfi,fps_over_qfi");
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 40);
    for cell in rows.iter().flat_map(|r| r.split(',')) {
        assert!(!cell.contains('e'), "{cell}");
        let digits = cell.chars().filter(char::is_ascii_digit).skip_while(|&c| c == '0').count();
        assert_eq!(digits, 12, "{cell}");
    }
}

#[test]
fn fig1_rows_are_mirror_symmetric_and_thread_independent() {
    let cfg = parse_config(r#"{"theta_points": 200}"#).unwrap().resolve(Mode::SweepFig1).unwrap();
    let fig = sweep_fig1(&cfg).unwrap();
    let n = fig.rows.len();
    for k in 0..n {
        let (a, b) = (&fig.rows[k], &fig.rows[n - 1 - k]);
        assert!((a.fm_over_qfi - b.fm_over_qfi).abs() <= 1e-10);
        assert!((a.fpf_over_qfi - b.fpf_over_qfi).abs() <= 1e-10);
    }
    let single = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let (_, serial) = single.install(|| execute(Mode::SweepFig1, cfg.clone(), 0)).unwrap();
    let (_, parallel) = execute(Mode::SweepFig1, cfg, 0).unwrap();
    assert_eq!(serial, parallel);
}

#[test]
fn series_check_reports_fifth_order_decay() {
    let (_, csv) = execute(Mode::SeriesCheck, RunConfig::default(), 0).unwrap();
    let mut orders = 0;
    for line in csv.lines().filter(|l| !l.starts_with('#')).skip(1) {
        let last = line.rsplit(',').next().unwrap();
        if let Ok(order) = last.parse::<f64>() {
            assert!(order >= 4.5, "{line}");
            orders += 1;
        }
    }
    assert!(orders >= 12);
}

#[test]
fn mode_key_must_match_subcommand() {
    let cfg = parse_config(r#"{"mode": "sweep_fig2"}"#).unwrap();
    assert!(cfg.resolve(Mode::Report).is_err());
}

#[test]
fn significant_digit_formatting() {
    assert_eq!(fmt_sig(0.5), "0.500000000000");
    assert_eq!(fmt_sig(-1234.5), "-1234.50000000");
    assert_eq!(fmt_sig(6.6e-5), "0.0000660000000000");
    assert_eq!(fmt_sig(9.9999999999996), "10.0000000000");
    assert_eq!(fmt_sig(0.0), "0");
}
