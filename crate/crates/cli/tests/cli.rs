use std::path::Path;
use std::process::{Command, Output};

fn nqp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nqp"))
        .args(args)
        .env_remove("NQP_THREADS")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn small_bounds(dir: &Path, w: &str, r_max: &str) -> std::path::PathBuf {
    let table = dir.join("bounds.json");
    let o = nqp(&[
        "bounds",
        "--w",
        w,
        "--r-max",
        r_max,
        "--population",
        "60",
        "--generations",
        "60",
        "--restarts",
        "2",
        "--seed",
        "3",
        "--format",
        "json",
        "--out",
        table.to_str().unwrap(),
    ]);
    assert!(
        o.status.code() == Some(0) || o.status.code() == Some(2),
        "{}",
        stderr(&o)
    );
    table
}

#[test]
fn coefficients_to_stdout() {
    let o = nqp(&["coeffs", "--w", "1", "--n-max", "2"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.contains("# command: coeffs"));
    let rows: Vec<&str> = text
        .lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .collect();
    assert_eq!(rows.len(), 3);
    let c1: f64 = rows[1].split(',').nth(1).unwrap().parse().unwrap();
    assert!(c1.abs() < 1e-14);
}

#[test]
fn grid_with_sidecar_and_edge_flag() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("p.csv");
    let o = nqp(&[
        "quasiprob",
        "--state",
        "fock:1",
        "--w",
        "1.6",
        "--rect",
        "-4:4:-4:4",
        "--step",
        "0.5",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let side: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("p.json")).unwrap()).unwrap();
    assert_eq!(side["shape"], serde_json::json!([17, 17]));
    assert!(side["min"]["value"].as_f64().unwrap() < 0.0);

    // a rectangle that cuts through the state raises a flag and exit code 2
    let o = nqp(&[
        "quasiprob",
        "--state",
        "fock:1",
        "--w",
        "1.6",
        "--rect=-0.5:0.5:-0.5:0.5",
        "--step",
        "0.5",
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn bad_inputs_exit_one() {
    let o = nqp(&["quasiprob", "--state", "cat:maybe:1", "--w", "1.6"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("position 4"), "{}", stderr(&o));

    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "seed = 1\nsedd = 2\n").unwrap();
    let o = nqp(&[
        "coeffs",
        "--w",
        "1",
        "--n-max",
        "2",
        "--config",
        cfg.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("sedd"), "{}", stderr(&o));

    let o = nqp(&["coeffs", "--w", "1", "--n-max", "2", "--threads", "0"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn config_and_env_threads() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "seed = 11\nformat = \"json\"\n").unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_nqp"))
        .args([
            "coeffs",
            "--w",
            "1.6",
            "--n-max",
            "1",
            "--config",
            cfg.to_str().unwrap(),
        ])
        .env("NQP_THREADS", "1")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["provenance"]["seed"], 11);
    assert_eq!(v["coefficients"].as_array().unwrap().len(), 2);
}

#[test]
fn bounds_then_certify() {
    let dir = tempfile::tempdir().unwrap();
    let table = small_bounds(dir.path(), "1.3", "2");
    let o = nqp(&[
        "certify",
        "--state",
        "fock:1",
        "--w",
        "1.3",
        "--bounds",
        table.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let cert: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(cert["kappa_min"], 1);
    assert_eq!(cert["qng"], true);

    let o = nqp(&[
        "certify",
        "--state",
        "coherent:0.7,0.2",
        "--w",
        "1.3",
        "--bounds",
        table.to_str().unwrap(),
    ]);
    let cert: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(cert["kappa_min"], 0);
    assert_eq!(cert["qng"], false);

    // no bounds stored for this w
    let o = nqp(&[
        "certify",
        "--state",
        "fock:1",
        "--w",
        "1.4",
        "--bounds",
        table.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(1));

    let text = std::fs::read_to_string(&table).unwrap();
    let mut v: serde_json::Value = serde_json::from_str(&text).unwrap();
    v["schema_version"] = serde_json::json!(99);
    let stale = dir.path().join("stale.json");
    std::fs::write(&stale, v.to_string()).unwrap();
    let o = nqp(&[
        "certify",
        "--state",
        "fock:1",
        "--w",
        "1.3",
        "--bounds",
        stale.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("schema"), "{}", stderr(&o));
}

#[test]
fn bounds_csv_is_normalized() {
    let dir = tempfile::tempdir().unwrap();
    let json = dir.path().join("t.json");
    let o = nqp(&[
        "bounds",
        "--w",
        "1.2:1.3:0.1",
        "--r-max",
        "1",
        "--no-gaussian",
        "--population",
        "30",
        "--generations",
        "30",
        "--restarts",
        "1",
        "--save-table",
        json.to_str().unwrap(),
    ]);
    assert!(
        o.status.code() == Some(0) || o.status.code() == Some(2),
        "{}",
        stderr(&o)
    );
    let text = stdout(&o);
    let rows: Vec<Vec<&str>> = text
        .lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').collect())
        .collect();
    assert_eq!(rows.len(), 2);
    for row in rows {
        // the coherent-state maximum equals the vacuum coefficient, the
        // largest at these w
        let upper_norm: f64 = row[5].parse().unwrap();
        assert!((upper_norm - 1.0).abs() < 1e-9, "{row:?}");
    }
    assert!(json.exists());
}

#[test]
fn table1_rows_start_at_onset() {
    let o = nqp(&["table1"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("# onset: 1.0954"));
    let first = text.lines().filter(|l| !l.starts_with('#')).nth(1).unwrap();
    assert!(first.ends_with(",0,1,1,true"), "{first}");
    let all = nqp(&["table1", "--all-rows"]);
    assert!(stdout(&all).lines().count() > text.lines().count());
}
