use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::time::Instant;

const BIN: &str = env!("CARGO_BIN_EXE_sphericity");

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).env_remove("SPHERICITY_SEED").output().unwrap()
}

fn stdout(out: &Output) -> String {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

/// Rows of a CSV as column-name maps.
fn records(text: &str) -> Vec<HashMap<String, String>> {
    let mut lines = text.lines();
    let header: Vec<String> = lines.next().unwrap().split(',').map(String::from).collect();
    lines
        .map(|l| header.iter().cloned().zip(l.split(',').map(String::from)).collect())
        .collect()
}

fn num(row: &HashMap<String, String>, key: &str) -> f64 {
    row[key].parse().unwrap_or_else(|_| panic!("{key} = {:?}", row[key]))
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures").join(name)
}

fn write(dir: &tempfile::TempDir, name: &str, text: &str) -> PathBuf {
    let path = dir.path().join(name);
    std::fs::write(&path, text).unwrap();
    path
}

/// Deterministic pseudo-data, uniform on (-1, 1).
fn pseudo(i: usize, j: usize) -> f64 {
    let x = ((i * 7919 + j * 104_729 + 13) as f64 * 0.618_033_988_749_895).fract();
    2.0 * x - 1.0
}

#[test]
fn bounds_reproduce_first_reference_row() {
    let out = run(&["bounds", "--n", "60", "--n1", "40", "--p1", "5", "--p2", "5", "--pretty"]);
    let text = stdout(&out);
    assert_eq!(
        text.lines().nth(1).unwrap(),
        "5,5,60,40,0.0287,0.85,0.50,0.0943,0.95,0.40,0.39,0.1796,0.95,0.90,0.39,0.0856,0.95,0.40,0.39,0.037,2.83"
    );
}

#[test]
fn bounds_for_small_dimension_exit_with_numerical_error() {
    let out = run(&["bounds", "--n", "60", "--n1", "40", "--p1", "1", "--p2", "1"]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("diverge"));
}

#[test]
fn finer_grid_is_never_worse() {
    let design = ["--n", "60", "--n1", "40", "--p1", "5", "--p2", "10"];
    let coarse = records(&stdout(&run(&[&["bounds"][..], &design].concat())));
    let fine = records(&stdout(&run(&[&["bounds", "--grid-step", "0.01"][..], &design].concat())));
    for key in ["BOUND1", "BOUND2", "BOUND3", "BOUND4"] {
        assert!(num(&fine[0], key) <= num(&coarse[0], key), "{key}");
    }
}

#[test]
fn reproduce_table6_matches_reference_approximations() {
    let text = stdout(&run(&["reproduce", "table6", "--reps", "100000", "--seed", "42"]));
    let rows = records(&text);
    assert_eq!(rows.len(), 27);
    let reference = records(&std::fs::read_to_string(fixture("type1_tables.csv")).unwrap());
    let reference: Vec<_> = reference.iter().filter(|r| r["table"] == "6").collect();
    for (ours, theirs) in rows.iter().zip(reference) {
        assert_eq!(ours["N1"], theirs["n1"]);
        assert_eq!(ours["N2"], theirs["n2"]);
        for key in ["a_prop", "a_sys"] {
            assert_eq!(format!("{:.3}", num(ours, key)), theirs[key], "{key}");
        }
        assert!(num(ours, "alpha1") > 0.0);
        assert_eq!(ours["reps"], "100000");
    }
}

#[test]
fn reproduce_table5_is_pure_bound_computation() {
    let rows = records(&stdout(&run(&["reproduce", "table5"])));
    assert_eq!(rows.len(), 4);
    for row in &rows {
        assert!(row["mae"].is_empty());
        assert!(num(row, "BOUND1") >= 0.0);
    }
}

#[test]
fn simulate_smoke_emits_json_quickly() {
    let start = Instant::now();
    let out = run(&["simulate", "--N1", "20", "--N2", "10", "--p1", "2", "--p2", "2", "--reps", "1000"]);
    assert!(start.elapsed().as_secs_f64() < 1.0);
    let value: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let result = &value[0];
    assert_eq!(result["reps"], 1000);
    assert_eq!(result["alpha1"].as_array().unwrap().len(), 3);
    assert!(result["mae"].as_f64().unwrap().is_finite());
}

#[test]
fn seed_falls_back_to_environment() {
    let args = ["simulate", "--N1", "20", "--N2", "10", "--p1", "2", "--p2", "2", "--reps", "2000", "--format", "csv"];
    let with_flag = stdout(&run(&[&args[..], &["--seed", "7"]].concat()));
    let from_env = Command::new(BIN).args(args).env("SPHERICITY_SEED", "7").output().unwrap();
    assert_eq!(stdout(&from_env), with_flag);
    let other = stdout(&run(&[&args[..], &["--seed", "8"]].concat()));
    assert_ne!(other, with_flag);
    let bad = Command::new(BIN).args(args).env("SPHERICITY_SEED", "seven").output().unwrap();
    assert_eq!(code(&bad), 1);
}

#[test]
fn thread_count_does_not_change_results() {
    let args = ["simulate", "--N1", "20", "--N2", "10", "--p1", "2", "--p2", "2", "--reps", "20000", "--seed", "3"];
    let one = stdout(&run(&[&args[..], &["--threads", "1"]].concat()));
    let four = stdout(&run(&[&args[..], &["--threads", "4"]].concat()));
    assert_eq!(one, four);
}

#[test]
fn stat_on_monotone_sample() {
    let dir = tempfile::tempdir().unwrap();
    let mut text = String::from("x1,x2,x3,x4\n");
    for i in 0..20 {
        let row: Vec<String> = (0..4).map(|j| pseudo(i, j).to_string()).collect();
        text.push_str(&(row.join(",") + "\n"));
    }
    for i in 20..30 {
        text.push_str(&format!("{},{},,\n", pseudo(i, 0), pseudo(i, 1)));
    }
    let path = write(&dir, "sample.csv", &text);
    let out = run(&["stat", path.to_str().unwrap(), "--p1", "2", "--p2", "2"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["N1"], 20);
    assert_eq!(v["N2"], 10);
    for key in ["lambda", "log_lambda", "t", "kappa1", "kappa2", "p_value_edgeworth", "p_value_chi2"] {
        assert!(v[key].as_f64().unwrap().is_finite(), "{key}");
    }
    let p = v["p_value_edgeworth"].as_f64().unwrap();
    assert!((0.0..=1.0).contains(&p));
}

#[test]
fn stat_complete_data_matches_single_block_statistic() {
    let dir = tempfile::tempdir().unwrap();
    let n_obs = 25;
    let rows: Vec<[f64; 2]> = (0..n_obs).map(|i| [pseudo(i, 0), 0.5 * pseudo(i, 0) + pseudo(i, 1)]).collect();
    let mut text = String::from("x1,x2\n");
    for r in &rows {
        text.push_str(&format!("{},{}\n", r[0], r[1]));
    }
    let path = write(&dir, "complete.csv", &text);
    let out = run(&["stat", path.to_str().unwrap(), "--p1", "2", "--p2", "0"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();

    let nf = n_obs as f64;
    let mean = [0, 1].map(|j| rows.iter().map(|r| r[j]).sum::<f64>() / nf);
    let w = |a: usize, b: usize| rows.iter().map(|r| (r[a] - mean[a]) * (r[b] - mean[b])).sum::<f64>();
    let (w11, w12, w22) = (w(0, 0), w(0, 1), w(1, 1));
    let det = w11 * w22 - w12 * w12;
    let expect = 0.5 * nf * (det.ln() - 2.0 * ((w11 + w22) / 2.0).ln());
    let got = v["log_lambda"].as_f64().unwrap();
    assert!((got - expect).abs() < 1e-10 * expect.abs(), "{got} vs {expect}");
}

#[test]
fn stat_rejects_filled_partial_rows_naming_the_row() {
    let dir = tempfile::tempdir().unwrap();
    let mut text = String::from("x1,x2,x3\n");
    for i in 0..8 {
        text.push_str(&format!("{},{},{}\n", pseudo(i, 0), pseudo(i, 1), pseudo(i, 2)));
    }
    let path = write(&dir, "bad.csv", &text);
    let out = run(&["stat", path.to_str().unwrap(), "--p1", "2", "--N1", "6"]);
    assert_eq!(code(&out), 1);
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("row 8"), "{err}");
}

#[test]
fn config_file_supplies_values_and_flags_override() {
    let dir = tempfile::tempdir().unwrap();
    let kv = write(&dir, "run.conf", "# design\nn = 60\nn1 = 40\np1 = 5\np2 = 10\npretty = true\n");
    let from_file = stdout(&run(&["bounds", "--config", kv.to_str().unwrap()]));
    assert!(from_file.lines().nth(1).unwrap().starts_with("5,10,60,40,0.0087,0.75,0.65,"));

    let overridden = stdout(&run(&["bounds", "--config", kv.to_str().unwrap(), "--p2", "5"]));
    assert!(overridden.lines().nth(1).unwrap().starts_with("5,5,60,40,0.0287,"));

    let json = write(&dir, "run.json", r#"{"n": 60, "n1": 40, "p1": 5, "p2": 10, "format": "json"}"#);
    let v: serde_json::Value = serde_json::from_str(&stdout(&run(&["bounds", "--config", json.to_str().unwrap()]))).unwrap();
    assert_eq!(v[0]["p2"], 10);

    let bad = write(&dir, "bad.conf", "colour = blue\n");
    assert_eq!(code(&run(&["bounds", "--config", bad.to_str().unwrap()])), 1);
}

#[test]
fn bounds_csv_replays_to_identical_output() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("first.csv");
    let out = run(&["reproduce", "table1", "--no-mc", "--out", first.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let original = records(&std::fs::read_to_string(&first).unwrap());
    assert_eq!(original.len(), 9);

    let replay = records(&stdout(&run(&["bounds", "--input", first.to_str().unwrap()])));
    assert_eq!(replay.len(), original.len());
    for (a, b) in original.iter().zip(&replay) {
        for (key, value) in b {
            assert_eq!(&a[key], value, "{key}");
        }
    }
}

#[test]
fn type1_csv_replays_through_simulate() {
    let dir = tempfile::tempdir().unwrap();
    let table = dir.path().join("table6.csv");
    assert!(run(&["reproduce", "table6", "--no-mc", "--out", table.to_str().unwrap()]).status.success());
    let out = run(&["simulate", "--input", table.to_str().unwrap(), "--reps", "1000", "--format", "csv"]);
    let rows = records(&stdout(&out));
    assert_eq!(rows.len(), 27);
    let original = records(&std::fs::read_to_string(&table).unwrap());
    let key = |r: &HashMap<String, String>| (r["N1"].clone(), r["N2"].clone(), num(r, "alpha").to_bits());
    let mut a: Vec<_> = original.iter().map(key).collect();
    let mut b: Vec<_> = rows.iter().map(key).collect();
    a.sort();
    b.sort();
    assert_eq!(a, b);

    let again = dir.path().join("again.csv");
    let out = run(&["simulate", "--input", table.to_str().unwrap(), "--reps", "1000", "--format", "csv", "--out", again.to_str().unwrap()]);
    assert!(out.status.success());
    let replayed = run(&["simulate", "--input", again.to_str().unwrap(), "--reps", "1000", "--format", "csv"]);
    assert_eq!(std::fs::read_to_string(&again).unwrap(), stdout(&replayed));
}

#[test]
fn usage_errors_exit_with_one() {
    assert_eq!(code(&run(&["reproduce", "table10"])), 1);
    assert_eq!(code(&run(&["bounds", "--p1", "5"])), 1);
    assert_eq!(code(&run(&["bounds", "--n", "60", "--n1", "5", "--p1", "5", "--p2", "5"])), 1);
    assert_eq!(code(&run(&["bounds", "--n", "60", "--n1", "40", "--N1", "41", "--p1", "5", "--p2", "5"])), 1);
    assert_eq!(code(&run(&["bounds", "--n", "sixty"])), 1);
    assert_eq!(code(&run(&["simulate", "--N1", "20", "--p1", "2", "--reps", "10"])), 1);
    assert_eq!(code(&run(&["stat", "/nonexistent/file.csv", "--p1", "2"])), 1);
    assert_eq!(code(&run(&[])), 1);
}

#[test]
fn help_and_version_exit_with_zero() {
    let help = run(&["--help"]);
    assert_eq!(code(&help), 0);
    assert!(String::from_utf8_lossy(&help.stdout).contains("Exit codes"));
    assert_eq!(code(&run(&["--version"])), 0);
    assert_eq!(code(&run(&["bounds", "--help"])), 0);
}
