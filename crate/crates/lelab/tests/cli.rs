use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use lelab::report::{fmt12, CSV_COLUMNS};
use lelab_core::solver::radial_shoot;
use serde_json::Value;

fn lelab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lelab"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, name: &str, body: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path
}

fn run_config(cmd: &str, path: &Path) -> Output {
    lelab(&[cmd, "--config", path.to_str().unwrap()])
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn solve_writes_json_report() {
    let dir = tempfile::tempdir().unwrap();
    let json = dir.path().join("report.json");
    let field = dir.path().join("field.txt");
    let cfg = write_config(
        dir.path(),
        "c.json",
        &format!(
            r#"{{"domain": {{"kind": "disk", "radius": 1.0}},
                "mesh": {{"h": 0.05}},
                "sweep": {{"p": [3.0]}},
                "output": {{"json": {:?}, "field": {:?}}}}}"#,
            json, field
        ),
    );
    let out = run_config("solve", &cfg);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let report: Value = serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
    let keys: Vec<&str> = report
        .as_object()
        .unwrap()
        .keys()
        .map(String::as_str)
        .collect();
    assert_eq!(keys, ["config_echo", "diagnostics", "record", "versions"]);
    let m = report["record"]["m"].as_f64().unwrap();
    let oracle = radial_shoot(3.0, 1e-12).unwrap().m;
    assert!((m - oracle).abs() < 0.02 * oracle);
    assert_eq!(report["record"]["status"], "ok");
    // Metrics that cannot be evaluated are null with a reason.
    assert!(report["diagnostics"]["bubble_distance"].is_null());
    assert!(report["diagnostics"]["unavailable"]["bubble_distance"].is_string());
    assert_eq!(report["config_echo"]["sweep"]["p"][0], 3.0);
    let lines = std::fs::read_to_string(&field).unwrap();
    let first: Vec<f64> = lines
        .lines()
        .next()
        .unwrap()
        .split(' ')
        .map(|s| s.parse().unwrap())
        .collect();
    assert_eq!(first.len(), 3);
}

#[test]
fn config_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write_config(
        dir.path(),
        "bad.json",
        "{\n  \"domain\": {\"kind\": \"disk\",\n",
    );
    let out = run_config("solve", &bad);
    assert_eq!(out.status.code(), Some(1));
    let msg = stderr(&out);
    assert!(msg.contains("line 3") && msg.contains("column"), "{msg}");

    let low = write_config(
        dir.path(),
        "low.json",
        r#"{"domain": {"kind": "disk", "radius": 1.0}, "sweep": {"p": [0.5]}}"#,
    );
    let out = run_config("solve", &low);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("exponent must exceed 1"));

    let typo = write_config(
        dir.path(),
        "typo.json",
        r#"{"domain": {"kind": "disk", "radius": 1.0}, "sweep": {"p": [3]},
            "verify": {"pohozaev_tol": 0.1}}"#,
    );
    let out = run_config("verify", &typo);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("unknown field"));

    let single = write_config(
        dir.path(),
        "single.json",
        r#"{"domain": {"kind": "disk", "radius": 1.0}, "sweep": {"p": [3]}}"#,
    );
    assert_eq!(run_config("sweep", &single).status.code(), Some(1));
    let missing = dir.path().join("missing.json");
    assert_eq!(run_config("solve", &missing).status.code(), Some(1));

    let out = Command::new(env!("CARGO_BIN_EXE_lelab"))
        .args(["solve", "--config", single.to_str().unwrap()])
        .env("LELAB_THREADS", "0")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn usage_exit_codes() {
    assert_eq!(lelab(&["--help"]).status.code(), Some(0));
    assert_eq!(lelab(&["--version"]).status.code(), Some(0));
    assert_eq!(lelab(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(lelab(&["solve"]).status.code(), Some(1));
    assert_eq!(lelab(&["oracle", "--p", "abc"]).status.code(), Some(1));
}

#[test]
fn solver_failure_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let json = dir.path().join("r.json");
    let cfg = write_config(
        dir.path(),
        "c.json",
        &format!(
            r#"{{"domain": {{"kind": "disk", "radius": 1.0}}, "mesh": {{"h": 0.1}},
                "sweep": {{"p": [3, 4]}}, "solver": {{"max_iter": 0}},
                "output": {{"json": {:?}}}}}"#,
            json
        ),
    );
    assert_eq!(run_config("sweep", &cfg).status.code(), Some(2));
    let one = write_config(
        dir.path(),
        "one.json",
        &format!(
            r#"{{"domain": {{"kind": "disk", "radius": 1.0}}, "mesh": {{"h": 0.1}},
                "sweep": {{"p": [3]}}, "solver": {{"max_iter": 0}},
                "output": {{"json": {:?}}}}}"#,
            json
        ),
    );
    assert_eq!(run_config("solve", &one).status.code(), Some(2));
    let report: Value = serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
    assert!(report["diagnostics"].is_null());
    assert!(report["record"]["reason"].is_string());
}

fn sweep_config(dir: &Path, csv: &Path, json: &Path) -> PathBuf {
    write_config(
        dir,
        &format!("{}.json", csv.file_stem().unwrap().to_str().unwrap()),
        &format!(
            r#"{{"domain": {{"kind": "disk", "radius": 1.0}},
                "mesh": {{"h": 0.05, "peak_refinement": true}},
                "sweep": {{"start": 2, "stop": 30, "step": 1}},
                "output": {{"csv": {:?}, "json": {:?}}}}}"#,
            csv, json
        ),
    )
}

#[test]
fn sweep_csv_contract() {
    let dir = tempfile::tempdir().unwrap();
    let (csv_a, json_a) = (dir.path().join("a.csv"), dir.path().join("a.json"));
    let (csv_b, json_b) = (dir.path().join("b.csv"), dir.path().join("b.json"));
    let out = run_config("sweep", &sweep_config(dir.path(), &csv_a, &json_a));
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let out = run_config("sweep", &sweep_config(dir.path(), &csv_b, &json_b));
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read(&csv_a).unwrap();
    assert_eq!(text, std::fs::read(&csv_b).unwrap());
    assert!(!text.contains(&b'\r'));

    let mut reader = csv::Reader::from_path(&csv_a).unwrap();
    let header: Vec<String> = reader.headers().unwrap().iter().map(String::from).collect();
    assert_eq!(header, CSV_COLUMNS);
    let rows: Vec<csv::StringRecord> = reader.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 29);
    let col = |name: &str| CSV_COLUMNS.iter().position(|c| *c == name).unwrap();
    let num = |r: &csv::StringRecord, name: &str| r[col(name)].parse::<f64>().unwrap();
    let mut prev_beta: Option<f64> = None;
    for r in &rows {
        assert_eq!(&r[0], "ok");
        let p = num(r, "p");
        if p >= 3.0 {
            assert!(num(r, "M") <= 4.0);
        }
        if p >= 10.0 {
            let beta = num(r, "beta");
            if let Some(b) = prev_beta {
                assert!(beta >= b * 0.99, "beta drops at p={p}: {b} -> {beta}");
            }
            prev_beta = Some(beta);
        }
    }

    // The CSV reproduces the JSON scalars to printed precision.
    let report: Value = serde_json::from_str(&std::fs::read_to_string(&json_a).unwrap()).unwrap();
    for (k, r) in rows.iter().enumerate() {
        let rec = &report["record"][k];
        let diag = &report["diagnostics"][k];
        let pairs = [
            ("p", &rec["p"]),
            ("M", &rec["m"]),
            ("x_max_x", &rec["x_max"][0]),
            ("clearance", &rec["clearance"]),
            ("beta", &diag["beta"]),
            ("int_u_p", &diag["int_u_p"]),
            ("pohozaev_rel", &diag["pohozaev"]["relative"]),
            ("eigen_rel", &diag["eigen"]["relative"]),
            ("green_rel", &diag["green"]["identity"]["relative"]),
            ("beta_pred", &diag["concentration"]["beta_pred"]),
        ];
        for (name, v) in pairs {
            assert_eq!(r[col(name)], fmt12(v.as_f64().unwrap()), "{name} row {k}");
        }
        assert_eq!(
            r[col("newton_iters")].parse::<u64>().unwrap(),
            rec["iterations"].as_u64().unwrap()
        );
        let bubble = &r[col("bubble_dist")];
        assert_eq!(bubble.is_empty(), diag["bubble_distance"].is_null());
    }
}

#[test]
fn verify_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let base =
        r#""domain": {"kind": "disk", "radius": 1.0}, "mesh": {"h": 0.025}, "sweep": {"p": [5]}"#;
    let ok = write_config(dir.path(), "ok.json", &format!("{{{base}}}"));
    let out = run_config("verify", &ok);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    let table = stdout(&out);
    assert_eq!(table.lines().count(), 6);
    assert!(table.lines().skip(1).all(|l| l.ends_with("PASS")));

    let scaled = write_config(
        dir.path(),
        "scaled.json",
        &format!(r#"{{{base}, "verify": {{"field_scale": 1.1}}}}"#),
    );
    let out = run_config("verify", &scaled);
    assert_eq!(out.status.code(), Some(3));
    let table = stdout(&out);
    for id in ["pohozaev", "eigen"] {
        let line = table.lines().find(|l| l.contains(id)).unwrap();
        assert!(line.ends_with("FAIL"), "{line}");
    }

    let strict = write_config(
        dir.path(),
        "strict.json",
        &format!(r#"{{{base}, "verify": {{"pohozaev_rel": 1e-12}}}}"#),
    );
    let out = run_config("verify", &strict);
    assert_eq!(out.status.code(), Some(3));
    let line = stdout(&out)
        .lines()
        .find(|l| l.contains("pohozaev"))
        .unwrap()
        .to_string();
    assert!(line.ends_with("FAIL"));
}

fn oracle_values(out: &Output) -> Vec<(String, f64)> {
    stdout(out)
        .lines()
        .filter_map(|l| {
            let mut it = l.split_whitespace();
            let key = it.next()?.to_string();
            Some((key, it.next()?.parse().ok()?))
        })
        .collect()
}

#[test]
fn oracle_command() {
    let out = lelab(&["oracle", "--p", "3", "--points", "5"]);
    assert_eq!(out.status.code(), Some(0));
    let vals = oracle_values(&out);
    let get = |k: &str| vals.iter().find(|(n, _)| n == k).unwrap().1;
    let (lhs, rhs) = (get("pohozaev_lhs"), get("pohozaev_rhs"));
    assert!((lhs - rhs).abs() <= 1e-8 * lhs);
    assert!(stdout(&out).lines().any(|l| l == "r u"));
    // Six scalars, the "r u" header and five samples.
    assert_eq!(stdout(&out).lines().count(), 12);

    let out = lelab(&["oracle", "--p", "100", "--points", "0"]);
    assert_eq!(out.status.code(), Some(0));
    let m = oracle_values(&out)
        .iter()
        .find(|(n, _)| n == "M")
        .unwrap()
        .1;
    assert!(m > 1.4 && m < 2.0);
    assert_eq!(stdout(&out).lines().count(), 6);

    assert_eq!(lelab(&["oracle", "--p", "0.5"]).status.code(), Some(1));
}
