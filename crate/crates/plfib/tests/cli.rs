//! End-to-end checks of the command-line interface.

use std::process::Command;

fn plfib() -> Command {
    Command::new(env!("CARGO_BIN_EXE_plfib"))
}

fn run_ok(args: &[&str]) -> String {
    let out = plfib().args(args).output().expect("spawn plfib");
    assert!(
        out.status.success(),
        "args {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).expect("utf8 output")
}

#[test]
fn classify_grid_matches_regime_bands() {
    let csv = run_ok(&["classify", "--lambda-grid", "0.05:0.95:0.05"]);
    let l_star = 2.0 / (3.0 + 5f64.sqrt());
    let mut rows = 0;
    for line in csv.lines().skip(1) {
        let cols: Vec<&str> = line.split(',').collect();
        assert_eq!(cols.len(), 5, "row: {line}");
        let lambda: f64 = cols[0].parse().unwrap();
        let regime = cols[4];
        let expect = if lambda > 0.5 {
            "wild-attractor"
        } else if lambda >= l_star {
            "sigma-finite-infinite"
        } else {
            "acip"
        };
        assert_eq!(regime, expect, "lambda={lambda}");
        rows += 1;
    }
    assert_eq!(rows, 19);
}

#[test]
fn dims_at_half_is_one() {
    let out = run_ok(&["dims", "--lambda", "0.5"]);
    let v: f64 = out.trim().parse().unwrap();
    assert_eq!(v, 1.0);
}

#[test]
fn pressure_curve_rows_nonincreasing() {
    let csv = run_ok(&[
        "pressure", "--lambda", "0.7", "--t-min", "0.7", "--t-max", "1.0", "--steps", "12",
    ]);
    let mut last = f64::INFINITY;
    let mut rows = 0;
    for line in csv.lines().skip(1) {
        let cols: Vec<&str> = line.split(',').collect();
        assert_eq!(cols.last().unwrap(), &"ok", "row: {line}");
        let p: f64 = cols[1].parse().unwrap();
        assert!(p <= last + 1e-30, "pressure must be non-increasing in t");
        last = p;
        rows += 1;
    }
    assert_eq!(rows, 12);
}

#[test]
fn kneading_json_round_trips() {
    let js = run_ok(&[
        "kneading",
        "--family",
        "fibonacci",
        "--depth",
        "90",
        "--emit",
        "json",
    ]);
    let v: serde_json::Value = serde_json::from_str(&js).unwrap();
    let kd: plfib::kneading::KneadingData = serde_json::from_value(v["kneading"].clone()).unwrap();
    assert_eq!(kd.depth(), 90);
    assert_eq!(
        serde_json::to_value(&kd).unwrap(),
        v["kneading"],
        "parse(emit(x)) must reproduce x"
    );
    assert_eq!(v["condition_121"]["holds"], serde_json::json!(true));
}

#[test]
fn map_eval_and_conditions() {
    let js = run_ok(&[
        "map",
        "--lambda",
        "0.5",
        "--depth",
        "60",
        "--verify-conditions",
        "20",
        "--eval",
        "0.25",
        "--emit",
        "json",
    ]);
    let v: serde_json::Value = serde_json::from_str(&js).unwrap();
    assert_eq!(v["eval"]["f"], serde_json::json!(0.5));
    let conds = v["conditions"].as_array().unwrap();
    assert!(conds.iter().all(|c| c["pass"] == serde_json::json!(true)));
}

#[test]
fn simulate_deterministic_json() {
    let args = [
        "simulate",
        "--lambda",
        "0.4",
        "--walkers",
        "100",
        "--steps",
        "500",
        "--seed",
        "42",
        "--threshold",
        "50",
        "--emit",
        "json",
    ];
    let a = run_ok(&args);
    let b = run_ok(&args);
    assert_eq!(a, b, "identical seeds must give identical reports");
    let v: serde_json::Value = serde_json::from_str(&a).unwrap();
    assert!(v["escape_fraction"].as_f64().unwrap() <= 1.0);
}

#[test]
fn json_reports_round_trip() {
    // parse(emit(x)) = x for the machine-readable report types
    let js = run_ok(&[
        "simulate",
        "--lambda",
        "0.45",
        "--walkers",
        "50",
        "--steps",
        "200",
        "--seed",
        "9",
        "--threshold",
        "40",
        "--emit",
        "json",
    ]);
    let rep: plfib::mc::WalkRunReport = serde_json::from_str(&js).unwrap();
    assert_eq!(
        serde_json::to_value(&rep).unwrap(),
        serde_json::from_str::<serde_json::Value>(&js).unwrap()
    );

    let js = run_ok(&["classify", "--lambda", "0.3", "--emit", "json"]);
    let rows: Vec<plfib::walk::WalkModel> = serde_json::from_str(&js).unwrap();
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0].regime, plfib::walk::Regime::Acip);

    let js = run_ok(&[
        "recurrence",
        "--lambda",
        "0.6",
        "--t",
        "0.8",
        "--emit",
        "json",
    ]);
    let rep: plfib::thermo::RecurrenceReport = serde_json::from_str(&js).unwrap();
    let back = serde_json::to_string_pretty(&rep).unwrap() + "\n";
    assert_eq!(back, js);
}

#[test]
fn recurrence_rows() {
    let csv = run_ok(&["recurrence", "--lambda", "0.5", "--t", "1.0"]);
    let line = csv.lines().nth(1).unwrap();
    assert!(line.ends_with("null-recurrent,null-recurrent"), "{line}");
}

#[test]
fn measures_csv_parses() {
    let csv = run_ok(&["measures", "--lambda", "0.3", "--t", "0.9", "--depth", "10"]);
    let mut total = 0.0;
    for line in csv.lines().skip(1) {
        let cols: Vec<&str> = line.split(',').collect();
        total += 2.0 * cols[1].parse::<f64>().unwrap();
    }
    assert!(total > 0.9, "conformal mass over 10 branches");
}

#[test]
fn pressure_reports_precision_exhaustion_as_status() {
    // 53-bit mantissa cannot resolve the pressure this close to t1; the row
    // carries the condition as data instead of aborting
    let t1 = plfib::thermo::t1_of(0.7);
    let csv = run_ok(&[
        "pressure",
        "--lambda",
        "0.7",
        "--t-min",
        &format!("{}", t1 - 1e-4),
        "--t-max",
        &format!("{}", t1 - 1e-4),
        "--steps",
        "1",
        "--precision-bits",
        "53",
    ]);
    let line = csv.lines().nth(1).unwrap();
    assert!(
        line.contains("precision"),
        "expected a precision status, got: {line}"
    );
}

#[test]
fn usage_error_exits_2() {
    let out = plfib()
        .args(["classify"]) // neither --lambda nor --lambda-grid
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let out = plfib()
        .args(["pressure", "--lambda", "0.5"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2), "missing required flags");
}

#[test]
fn output_file_written() {
    let dir = std::env::temp_dir().join(format!("plfib-test-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("grid.csv");
    run_ok(&[
        "classify",
        "--lambda",
        "0.3",
        "--output",
        path.to_str().unwrap(),
    ]);
    let content = std::fs::read_to_string(&path).unwrap();
    assert!(content.contains("acip"));
    std::fs::remove_dir_all(&dir).ok();
}
