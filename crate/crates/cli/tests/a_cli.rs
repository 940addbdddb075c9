use std::fs;
use std::process::{Command, Output};

use serde_json::Value;

fn recwalk(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_recwalk"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn json(out: &Output) -> Value {
    assert!(
        out.status.success() || out.status.code() == Some(1),
        "{out:?}"
    );
    serde_json::from_slice(&out.stdout).expect("valid JSON")
}

fn without_timestamp(mut v: Value) -> Value {
    v["manifest"].as_object_mut().unwrap().remove("timestamp");
    v
}

#[test]
fn table_default_layout() {
    let out = recwalk(&["table"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(
        lines[0],
        "n,pow2_G_n,pow2_t_mix,pow3_G_n,pow3_t_mix,fib-odd_G_n,fib-odd_t_mix"
    );
    assert_eq!(lines.len(), 10);
    assert_eq!(lines[1], "1,1,0,1,0,1,0");
    assert!(lines[9].starts_with("9,256,"));
    assert!(lines[9].contains(",6561,"));
    assert!(lines[9].contains(",2584,"));
}

#[test]
fn table_single_row() {
    let out = recwalk(&["table", "--n-max", "1"]);
    assert_eq!(stdout(&out).lines().nth(1), Some("1,1,0,1,0,1,0"));
}

#[test]
fn table_json_embeds_manifest() {
    let v = json(&recwalk(&[
        "table", "--n-max", "3", "--format", "json", "--seq", "pow3",
    ]));
    let m = &v["manifest"];
    assert_eq!(m["command"], "table");
    assert_eq!(m["version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(m["spec_hash"].as_str().unwrap().len(), 64);
    assert_eq!(m["params"]["global"]["epsilon"]["text"], "1/4");
    assert_eq!(v["sequences"][0]["rows"][2]["G_n"], "9");
    assert_eq!(v["sequences"][0]["rows"][2]["t_mix"], 3);
}

#[test]
fn csv_file_gets_sidecar_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("table.csv");
    let out = recwalk(&["table", "--n-max", "2", "--out", path.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    assert!(fs::read_to_string(&path).unwrap().starts_with("n,"));
    let side = dir.path().join("table.csv.manifest.json");
    let m: Value = serde_json::from_str(&fs::read_to_string(side).unwrap()).unwrap();
    assert_eq!(m["command"], "table");
}

#[test]
fn identical_invocations_match_apart_from_timestamp() {
    let args = ["bounds", "--seq", "fib-odd", "--n-min", "3", "--n-max", "5"];
    let a = without_timestamp(json(&recwalk(&args)));
    let b = without_timestamp(json(&recwalk(&args)));
    assert_eq!(a, b);
    let sim = [
        "simulate",
        "--seq",
        "pow2",
        "--n",
        "4",
        "--trajectories",
        "5000",
        "--seed",
        "3",
    ];
    assert_eq!(stdout(&recwalk(&sim)), stdout(&recwalk(&sim)));
}

#[test]
fn spec_hash_tracks_sequences() {
    let a = json(&recwalk(&[
        "table", "--n-max", "2", "--format", "json", "--seq", "pow2",
    ]));
    let b = json(&recwalk(&[
        "mix", "--n", "2", "--format", "json", "--seq", "pow2",
    ]));
    let c = json(&recwalk(&[
        "table", "--n-max", "2", "--format", "json", "--seq", "pow3",
    ]));
    assert_eq!(a["manifest"]["spec_hash"], b["manifest"]["spec_hash"]);
    assert_ne!(a["manifest"]["spec_hash"], c["manifest"]["spec_hash"]);
}

#[test]
fn spectrum_csv_and_top() {
    let text = stdout(&recwalk(&["spectrum", "--seq", "pow2", "--n", "3"]));
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "k,re,im,modulus");
    assert_eq!(lines.len(), 5);
    assert!(lines[4].starts_with("4,1,0,1"));
    let top = json(&recwalk(&[
        "spectrum", "--seq", "pow3", "--n", "2", "--top", "1", "--format", "json",
    ]));
    assert_eq!(top["eigenvalues"].as_array().unwrap().len(), 1);
    assert!((top["slem"].as_f64().unwrap() - 0.5).abs() < 1e-12);
}

#[test]
fn mix_curve_ends_below_epsilon() {
    let text = stdout(&recwalk(&["mix", "--seq", "fib-odd", "--n", "3"]));
    let last = text.lines().last().unwrap();
    let (t, tv) = last.split_once(',').unwrap();
    assert_eq!(t, "3");
    assert!(tv.parse::<f64>().unwrap() <= 0.25 + 1e-12);
}

#[test]
fn bounds_examples() {
    let v = json(&recwalk(&["bounds", "--seq", "pow2", "--n", "5"]));
    let r = &v["reports"][0];
    assert_eq!(r["exact_t_mix"], 3);
    assert!(r["violations"].as_array().unwrap().is_empty());
    let v = json(&recwalk(&["bounds", "--seq", "fib-odd", "--n", "3"]));
    assert_eq!(v["reports"][0]["exact_t_mix"], 3);
    assert!(v["reports"][0]["c"].is_null());
    let v = json(&recwalk(&["bounds", "--seq", "pow3", "--n", "2"]));
    assert_eq!(v["reports"][0]["ubl_implied_t"], 2);
    assert_eq!(v["reports"][0]["exact_t_mix"], 2);
}

#[test]
fn bounds_gamma_override() {
    let v = json(&recwalk(&[
        "bounds", "--seq", "pow2", "--n", "9", "--gamma", "1",
    ]));
    let lower = v["reports"][0]["lower_general"].as_f64().unwrap();
    assert!((lower - (9.0 - 9f64.ln()) / 9f64.ln() * 2f64.ln()).abs() < 1e-12);
}

#[test]
fn verify_reports_and_exit_codes() {
    let v = json(&recwalk(&[
        "verify",
        "--suite",
        "eigmod-bound",
        "--seq",
        "pow2",
        "--n-max",
        "2",
    ]));
    assert_eq!(v["passed"], true);
    assert!((v["suites"][0]["worst_slack"].as_f64().unwrap() - 0.5).abs() < 1e-15);

    // Initial terms 1, 3 break the covering argument for s = 2.
    let bad = r#"{"coeffs":[1,1],"init":[1,3]}"#;
    let out = recwalk(&[
        "verify",
        "--suite",
        "angle-cover",
        "--seq",
        bad,
        "--n-max",
        "3",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json(&out)["passed"], false);
}

#[test]
fn usage_and_domain_errors_exit_two() {
    for args in [
        vec!["verify", "--suite", "angle-cover", "--n-min", "1"],
        vec!["verify", "--suite", "nope"],
        vec!["table", "--seq", "pow7"],
        vec!["table", "--epsilon", "2/1"],
        vec!["table", "--bogus"],
        vec!["mix", "--n", "3"],
        vec!["bounds", "--seq", "pow2", "--n", "1"],
        vec![
            "spectrum",
            "--seq",
            "pow2",
            "--n",
            "30",
            "--nmax-states",
            "1000",
        ],
    ] {
        let out = recwalk(&args);
        assert_eq!(
            out.status.code(),
            Some(2),
            "{args:?}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
}

#[test]
fn sequence_from_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("lucas.json");
    fs::write(&path, r#"{"coeffs":[1,1],"init":[1,2]}"#).unwrap();
    let arg = format!("@{}", path.display());
    let text = stdout(&recwalk(&["table", "--n-max", "4", "--seq", &arg]));
    assert!(text.starts_with("n,lucas_G_n,lucas_t_mix\n"));
    assert!(text.lines().nth(4).unwrap().starts_with("4,5,"));
}

#[test]
fn simulate_columns() {
    let text = stdout(&recwalk(&[
        "simulate",
        "--seq",
        "pow3",
        "--n",
        "3",
        "--t-max",
        "2",
        "--trajectories",
        "100",
        "--seed",
        "9",
    ]));
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "t,empirical_tv,num_trajectories,seed");
    assert_eq!(lines.len(), 4);
    assert!(lines[1].starts_with("0,0.888"));
    assert!(lines[1].ends_with(",100,9"));
}
