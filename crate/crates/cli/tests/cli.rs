use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn corbf(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_corbf")).args(args).output().unwrap()
}

fn corbf_in(out: &Path, args: &[&str]) -> Output {
    let mut all: Vec<&str> = args.to_vec();
    all.extend(["--out", out.to_str().unwrap()]);
    corbf(&all)
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn csv_files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files = Vec::new();
    for sub in ["", "runs"] {
        for entry in std::fs::read_dir(dir.join(sub)).unwrap() {
            let p = entry.unwrap().path();
            if p.extension().is_some_and(|e| e == "csv") {
                files.push((format!("{sub}/{}", p.file_name().unwrap().to_string_lossy()), std::fs::read(&p).unwrap()));
            }
        }
    }
    files.sort();
    files
}

#[test]
fn curve_has_one_row_per_epoch() {
    let tmp = TempDir::new().unwrap();
    let o = corbf_in(tmp.path(), &["run", "iris", "--arch", "co", "--runs", "1", "--epochs", "10"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = std::fs::read_to_string(tmp.path().join("co_curve.csv")).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "epoch,mse_linear,mse_db,train_acc,test_acc");
    assert_eq!(lines.len(), 11);
    assert!(lines[10].starts_with("10,"));
    assert!(!tmp.path().join("manual_curve.csv").exists());
    assert!(stdout(&o).contains("co: 1 completed, 0 diverged"));
}

#[test]
fn report_shows_published_accuracy_next_to_measured() {
    let tmp = TempDir::new().unwrap();
    let o = corbf_in(tmp.path(), &["run", "iris", "--runs", "1", "--epochs", "20"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let o = corbf(&["report", tmp.path().to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    let co_train = text.lines().find(|l| l.starts_with("co") && l.contains(" train_acc ")).unwrap();
    assert!(co_train.contains("98.35"), "{co_train}");
    let co_test = text.lines().find(|l| l.starts_with("co") && l.contains(" test_acc ")).unwrap();
    assert!(co_test.contains("99.13"), "{co_test}");
    assert!(text.contains("criterion 6"), "{text}");
    assert!(text.contains("[N/A] criterion 6"), "20 epochs cannot judge the 2000-epoch level: {text}");
}

#[test]
fn report_on_empty_directory_lists_files() {
    let tmp = TempDir::new().unwrap();
    let o = corbf(&["report", tmp.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let err = stderr(&o);
    assert!(err.contains("manifest.json") && err.contains("summary.csv"), "{err}");
}

#[test]
fn invalid_configuration_exits_2() {
    let tmp = TempDir::new().unwrap();
    for args in [
        &["run", "iris", "--runs", "0"][..],
        &["run", "sysid", "--jobs", "0"],
        &["run", "funapprox", "--funapprox-target", "custom"],
        &["run", "funapprox", "--funapprox-coeffs", "1,-1"],
        &["run", "iris", "--eta=-1"],
        &["run", "sysid", "--sysid-period", "7"],
    ] {
        let o = corbf_in(tmp.path(), args);
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", stderr(&o));
        assert!(stderr(&o).contains("invalid configuration"), "{args:?}");
    }
}

#[test]
fn all_runs_diverging_exits_1_with_manifest() {
    let tmp = TempDir::new().unwrap();
    let o = corbf_in(tmp.path(), &["run", "sysid", "--arch", "co", "--runs", "2", "--epochs", "50", "--eta", "5"]);
    assert_eq!(o.status.code(), Some(1), "{}", stdout(&o));
    assert!(stderr(&o).contains("all 2 runs diverged"));
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(tmp.path().join("manifest.json")).unwrap()).unwrap();
    let diverged = manifest["architectures"][0]["diverged"].as_array().unwrap();
    assert_eq!(diverged.len(), 2);
    assert_eq!(diverged[1]["seed"], 1);
}

#[test]
fn rerun_and_job_count_reproduce_curves() {
    let tmp = TempDir::new().unwrap();
    let (a, b, c) = (tmp.path().join("a"), tmp.path().join("b"), tmp.path().join("c"));
    let args = ["run", "sysid", "--runs", "3", "--epochs", "30", "--seed", "11", "--shuffle"];
    let o = corbf_in(&a, &[&args[..], &["--jobs", "1"]].concat());
    assert!(o.status.success(), "{}", stderr(&o));
    let o = corbf_in(&b, &[&args[..], &["--jobs", "3"]].concat());
    assert!(o.status.success(), "{}", stderr(&o));
    let o = corbf(&["rerun", a.join("manifest.json").to_str().unwrap(), "--out", c.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let reference = csv_files(&a);
    assert_eq!(reference.len(), 3 * 3 + 3 + 3 + 1);
    assert_eq!(csv_files(&b), reference);
    assert_eq!(csv_files(&c), reference);
}

#[test]
fn data_override_reports_bad_rows() {
    let tmp = TempDir::new().unwrap();
    let data = tmp.path().join("iris.csv");
    std::fs::write(&data, "5.1,3.5,1.4,0.2,setosa\n4.9,3.0,oops,0.2,setosa\n").unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_corbf"))
        .args(["run", "iris", "--runs", "1", "--epochs", "1", "--out"])
        .arg(tmp.path().join("out"))
        .env("CORBF_DATA", &data)
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("iris.csv:2:"), "{}", stderr(&o));
}

#[test]
fn bound_prints_a_positive_bound_and_verdict() {
    let o = corbf(&["bound", "iris"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    let bound: f64 = text.lines().find_map(|l| l.strip_prefix("bound 1/lambda_max: ")).unwrap().parse().unwrap();
    assert!(bound > 0.0);
    assert!(text.contains("eta 5e-3 respects the bound"), "{text}");

    let o = corbf(&["bound", "sysid", "--eta", "1"]);
    assert!(stdout(&o).contains("violates"), "{}", stdout(&o));
}
