use std::process::{Command, Output};

use serde_json::Value;

fn wml(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wml")).args(args).output().expect("spawn wml")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

#[test]
fn list_names_every_experiment() {
    let o = wml(&["list"]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let names: Vec<&str> = v.as_array().unwrap().iter().map(|e| e["name"].as_str().unwrap()).collect();
    assert_eq!(names.len(), 12);
    assert!(names.contains(&"singular-limit"));
}

#[test]
fn passing_run_exits_zero_with_one_document() {
    let o = wml(&["run", "cauchy-fisher", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["pass"], true);
    assert!((v["metrics"][0]["value"].as_f64().unwrap() - 0.5).abs() < 1e-6);
}

#[test]
fn failing_run_exits_one_and_names_the_metric() {
    // the absolute bound is out of reach in double precision for n ≥ 7
    let o = wml(&["run", "stieltjes-cancellation"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("max_abs_integral"), "{}", stderr(&o));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["pass"], false);
}

#[test]
fn usage_errors_exit_two() {
    let o = wml(&["run", "--bogus"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("Usage"));

    let o = wml(&["run", "no-such-name"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("no-such-name"));

    let o = wml(&["eval", "--model", "gaussian:mu=0,sigma=-1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("--model"), "{}", stderr(&o));

    let o = wml(&["sweep", "--model", "cauchy", "--grid", "sigma=1:2:3"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("--grid"), "{}", stderr(&o));
}

#[test]
fn help_exits_zero() {
    assert_eq!(wml(&["--help"]).status.code(), Some(0));
    assert_eq!(wml(&["sweep", "--help"]).status.code(), Some(0));
}

#[test]
fn sweep_writes_csv_with_header_and_rows() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sweep.csv");
    let o = wml(&[
        "sweep",
        "--model",
        "gaussian:mu=0,sigma=1",
        "--orders",
        "0,1,2",
        "--s",
        "1:100:12",
        "--format",
        "csv",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let mut reader = csv::Reader::from_path(&path).unwrap();
    let header = reader.headers().unwrap().clone();
    assert_eq!(&header[0], "s");
    assert!(header.iter().any(|h| h == "det_g"));
    let rows: Vec<csv::StringRecord> = reader.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 12);
    let det = header.iter().position(|h| h == "det_g").unwrap();
    let dets: Vec<f64> = rows.iter().map(|r| r[det].parse().unwrap()).collect();
    assert!(dets.windows(2).skip(1).all(|w| w[1] < w[0]), "{dets:?}");
}

#[test]
fn csv_and_json_carry_identical_values() {
    let json = wml(&["run", "singular-limit", "--format", "json"]);
    let csv_out = wml(&["run", "singular-limit", "--format", "csv", "--table"]);
    assert_eq!(json.status.code(), Some(0));
    assert_eq!(csv_out.status.code(), Some(0));
    let v: Value = serde_json::from_str(&stdout(&json)).unwrap();
    let rows = v["table"]["rows"].as_array().unwrap();
    let csv_text = stdout(&csv_out);
    let mut reader = csv::Reader::from_reader(csv_text.as_bytes());
    let records: Vec<csv::StringRecord> = reader.records().map(|r| r.unwrap()).collect();
    assert_eq!(records.len(), rows.len());
    for (rec, row) in records.iter().zip(rows) {
        for (cell, value) in rec.iter().zip(row.as_array().unwrap()) {
            assert_eq!(cell.parse::<f64>().unwrap(), value.as_f64().unwrap());
        }
    }
    // and the metric rows
    let metrics = wml(&["run", "singular-limit", "--format", "csv"]);
    let text = stdout(&metrics);
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    for (rec, m) in reader.records().map(|r| r.unwrap()).zip(v["metrics"].as_array().unwrap()) {
        assert_eq!(&rec[1], m["name"].as_str().unwrap());
        assert_eq!(rec[2].parse::<f64>().unwrap(), m["value"].as_f64().unwrap());
    }
}

#[test]
fn output_is_schema_stable_and_deterministic() {
    let a = wml(&["run", "stieltjes-kernel-break", "--seed", "3"]);
    let b = wml(&["run", "stieltjes-kernel-break", "--seed", "3"]);
    let va: Value = serde_json::from_str(&stdout(&a)).unwrap();
    let vb: Value = serde_json::from_str(&stdout(&b)).unwrap();
    assert_eq!(va["metrics"], vb["metrics"]);
    assert_eq!(va["table"], vb["table"]);
    let keys = |v: &Value| v.as_object().unwrap().keys().cloned().collect::<Vec<_>>();
    assert_eq!(keys(&va), keys(&vb));
}

#[test]
fn numbers_have_seventeen_significant_digits() {
    let o = wml(&["run", "cauchy-fisher"]);
    assert!(stdout(&o).contains("5.0000000000000000e-1"));
}

#[test]
fn eval_reports_every_section() {
    let o = wml(&[
        "eval",
        "--model",
        "cauchy:mu=0.5",
        "--orders",
        "0",
        "--s",
        "1.5",
        "--kernel-form",
        "unit-peak",
        "--stratum",
        "y0=0.1",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    for key in ["features", "metric_tensor", "model_rank", "joint_rank", "transversality", "jacobian"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    assert_eq!(v["joint_rank"]["rank"], 1);
    assert_eq!(v["transversality"]["submersive"], true);
    assert_eq!(v["transversality"]["verdicts"][0]["verdict"], "transversal");

    let csv_out = wml(&["eval", "--model", "cauchy:mu=0.5", "--orders", "0", "--s", "1.5", "--format", "csv"]);
    assert_eq!(csv_out.status.code(), Some(0));
    let text = stdout(&csv_out);
    assert!(text.starts_with("key,value"));
    assert!(text.contains("features.values.0,"));
}

#[test]
fn thread_cap_is_honoured_and_validated() {
    let o = Command::new(env!("CARGO_BIN_EXE_wml"))
        .args(["run", "thresholds"])
        .env("WML_THREADS", "1")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    let o = Command::new(env!("CARGO_BIN_EXE_wml"))
        .args(["run", "thresholds"])
        .env("WML_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn config_round_trips_through_its_arguments() {
    use wml_cli::config::RunConfig;
    let argv = [
        "wml", "sweep", "--model", "stable:alpha=1.5,mu=0,sigma=1", "--s", "log0.5:50:4", "--orders", "0,2",
        "--rel-tol", "1e-11", "--format", "csv",
    ];
    let cfg = RunConfig::parse_from(argv).unwrap();
    assert_eq!(RunConfig::parse_from(cfg.to_args()).unwrap(), cfg);
}
