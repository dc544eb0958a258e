use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn wellcond(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wellcond"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn path(dir: &TempDir, name: &str) -> String {
    dir.path().join(name).to_str().unwrap().to_string()
}

/// 200x200 identity whose last column repeats the first.
fn write_identity_with_duplicate(file: &Path) {
    let n = 200;
    let mut text = String::new();
    for i in 0..n {
        let row: Vec<&str> = (0..n)
            .map(|j| {
                let one = if j == n - 1 { i == 0 } else { i == j };
                if one {
                    "1"
                } else {
                    "0"
                }
            })
            .collect();
        text.push_str(&row.join(","));
        text.push('\n');
    }
    fs::write(file, text).unwrap();
}

#[test]
fn select_identity_exits_zero() {
    let out = wellcond(&[
        "select",
        "--generate",
        "identity",
        "--n",
        "64",
        "--p",
        "64",
        "--epsilon",
        "0.5",
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["certified"], true);
    assert_eq!(v["selected"], serde_json::json!([0, 1]));
}

#[test]
fn bad_epsilon_is_a_usage_error() {
    for eps in ["0", "1", "1.5", "-0.2", "nan"] {
        let out = wellcond(&[
            "select",
            "--generate",
            "identity",
            "--n",
            "8",
            "--p",
            "8",
            "--seed",
            "0",
            "--epsilon",
            eps,
        ]);
        assert_eq!(code(&out), 1, "epsilon {eps}");
        assert!(
            stderr(&out).contains("epsilon must be in (0,1)"),
            "{}",
            stderr(&out)
        );
    }
}

#[test]
fn other_usage_errors_exit_one() {
    let dir = TempDir::new().unwrap();
    let missing = path(&dir, "missing.csv");
    let cases: Vec<Vec<&str>> = vec![
        vec!["select", "--epsilon", "0.5"],
        vec!["select", "--input", &missing, "--epsilon", "0.5"],
        vec![
            "select",
            "--generate",
            "nope",
            "--n",
            "4",
            "--p",
            "4",
            "--seed",
            "1",
            "--epsilon",
            "0.5",
        ],
        vec![
            "select",
            "--generate",
            "identity",
            "--n",
            "8",
            "--p",
            "8",
            "--seed",
            "0",
            "--epsilon",
            "0.5",
            "--cert-tol",
            "0.01",
        ],
        vec!["frobnicate"],
    ];
    for args in cases {
        let out = wellcond(&args);
        assert_eq!(code(&out), 1, "{args:?}: {}", stderr(&out));
    }
}

#[test]
fn non_unit_columns_need_auto_normalize() {
    let dir = TempDir::new().unwrap();
    let file = path(&dir, "m.csv");
    fs::write(&file, "2,0,0,0\n0,3,0,0\n0,0,4,0\n0,0,0,5\n").unwrap();
    let out = wellcond(&["select", "--input", &file, "--epsilon", "0.5"]);
    assert_eq!(code(&out), 1);
    let out = wellcond(&[
        "select",
        "--input",
        &file,
        "--epsilon",
        "0.5",
        "--auto-normalize",
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
}

#[test]
fn select_then_verify_roundtrip() {
    let dir = TempDir::new().unwrap();
    let matrix = path(&dir, "x.mtx");
    let report = path(&dir, "r.json");
    let gen = [
        "--generate",
        "union_orthobases",
        "--n",
        "40",
        "--p",
        "160",
        "--seed",
        "3",
    ];
    let mut args = vec!["generate", "--format", "mtx", "--output", &matrix];
    args.extend(gen);
    assert_eq!(code(&wellcond(&args)), 0);

    let out = wellcond(&[
        "select",
        "--input",
        &matrix,
        "--epsilon",
        "0.9",
        "--output",
        &report,
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let out = wellcond(&["verify", "--report", &report, "--input", &matrix]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));

    // the generator flags give the same matrix as the file
    let mut args = vec!["verify", "--report", &report];
    args.extend(gen);
    assert_eq!(code(&wellcond(&args)), 0);
}

#[test]
fn tampered_selection_fails_verification() {
    let dir = TempDir::new().unwrap();
    let matrix = dir.path().join("dup.csv");
    write_identity_with_duplicate(&matrix);
    let matrix = matrix.to_str().unwrap();
    let report = path(&dir, "r.json");
    let out = wellcond(&[
        "select",
        "--input",
        matrix,
        "--epsilon",
        "0.5",
        "--output",
        &report,
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));

    let mut v: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(v["selected"], serde_json::json!([0, 1, 2]));
    v["selected"] = serde_json::json!([0, 199, 2]);
    let tampered = path(&dir, "t.json");
    fs::write(&tampered, v.to_string()).unwrap();

    let out = wellcond(&["verify", "--report", &tampered, "--input", matrix]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("(k, r) = (1, 2)"), "{}", stderr(&out));

    // out-of-range index is a mismatch, not a crash
    v["selected"] = serde_json::json!([0, 500, 2]);
    fs::write(&tampered, v.to_string()).unwrap();
    let out = wellcond(&["verify", "--report", &tampered, "--input", matrix]);
    assert_eq!(code(&out), 2);

    // a report for another matrix
    let out = wellcond(&[
        "verify",
        "--report",
        &report,
        "--generate",
        "identity",
        "--n",
        "100",
        "--p",
        "100",
        "--seed",
        "0",
    ]);
    assert_eq!(code(&out), 2);
}

#[test]
fn csv_fixture_seed_42() {
    let dir = TempDir::new().unwrap();
    let matrix = path(&dir, "x.csv");
    let out = wellcond(&[
        "generate",
        "--generate",
        "random_sphere",
        "--n",
        "50",
        "--p",
        "200",
        "--seed",
        "42",
        "--output",
        &matrix,
    ]);
    assert_eq!(code(&out), 0);
    let text = fs::read_to_string(&matrix).unwrap();
    assert_eq!(text.lines().count(), 50);
    assert!(text.lines().all(|l| l.split(',').count() == 200));

    let report = path(&dir, "r.json");
    let out = wellcond(&[
        "select",
        "--input",
        &matrix,
        "--epsilon",
        "0.75",
        "--output",
        &report,
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let out = wellcond(&["verify", "--report", &report, "--input", &matrix]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));

    let out = wellcond(&[
        "select",
        "--input",
        &matrix,
        "--epsilon",
        "0.75",
        "--format",
        "csv",
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let csv = String::from_utf8(out.stdout).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "step,selected_index,score,mean_score,k,lambda,lower,upper,within_envelope"
    );
    assert!(lines.all(|l| l.ends_with(",true")));
}

#[test]
fn reports_are_byte_identical() {
    let args = [
        "select",
        "--generate",
        "spiked",
        "--n",
        "30",
        "--p",
        "240",
        "--seed",
        "9",
        "--epsilon",
        "0.8",
    ];
    let a = wellcond(&args);
    let b = wellcond(&args);
    assert_eq!(code(&a), code(&b));
    assert_eq!(a.stdout, b.stdout);
    let mut fast = args.to_vec();
    fast.push("--fast-path");
    let c = wellcond(&fast);
    let d = wellcond(&fast);
    assert_eq!(c.stdout, d.stdout);
}

#[test]
fn bench_greedy_meets_target_condition() {
    let cases: [&[&str]; 3] = [
        &[
            "--generate",
            "identity",
            "--n",
            "64",
            "--p",
            "64",
            "--seed",
            "0",
            "--epsilon",
            "0.5",
        ],
        &[
            "--generate",
            "random_sphere",
            "--n",
            "50",
            "--p",
            "200",
            "--seed",
            "7",
            "--epsilon",
            "0.75",
        ],
        &[
            "--generate",
            "union_orthobases",
            "--n",
            "100",
            "--p",
            "400",
            "--seed",
            "1",
            "--epsilon",
            "0.9",
        ],
    ];
    for case in cases {
        let mut args = vec!["bench", "--format", "json", "--trials", "20"];
        args.extend(case);
        let out = wellcond(&args);
        assert_eq!(code(&out), 0, "{}", stderr(&out));
        let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
        let target = v["target_condition"].as_f64().unwrap();
        let rows = v["rows"].as_array().unwrap();
        assert_eq!(rows.len(), 3);
        let methods: Vec<&str> = rows.iter().map(|r| r["method"].as_str().unwrap()).collect();
        assert_eq!(methods, ["greedy", "uniform_random", "first_r"]);
        let greedy = rows[0]["condition_number"].as_f64().unwrap();
        assert!(greedy <= target, "{greedy} > {target}");
        assert_eq!(rows[1]["trials"], 20);
    }
}
