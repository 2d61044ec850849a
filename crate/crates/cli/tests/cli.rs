//! End-to-end tests of the `catind` binary: exit codes, JSON output and
//! report files.

use std::io::Write;
use std::process::Command;

fn catind() -> Command {
    Command::new(env!("CARGO_BIN_EXE_catind"))
}

fn hand_table_csv() -> tempfile::NamedTempFile {
    // 100 rows realizing the counts [[10,20],[30,40]].
    let mut f = tempfile::NamedTempFile::new().unwrap();
    writeln!(f, "treatment,outcome").unwrap();
    for (count, x, y) in [(10, "a", "p"), (20, "a", "q"), (30, "b", "p"), (40, "b", "q")] {
        for _ in 0..count {
            writeln!(f, "{x},{y}").unwrap();
        }
    }
    f.flush().unwrap();
    f
}

#[test]
fn test_subcommand_reports_hand_values_as_json() {
    let f = hand_table_csv();
    let out = catind()
        .args(["test", "--csv"])
        .arg(f.path())
        .args(["--x", "treatment", "--y", "outcome", "--method", "x2"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["method"], "X2");
    assert_eq!(v["dof"], 1);
    assert_eq!(v["computable"], true);
    assert!((v["statistic"].as_f64().unwrap() - 0.7936507936507936).abs() < 1e-9);
    assert!((v["p_value"].as_f64().unwrap() - 0.3730).abs() < 1e-4);
}

#[test]
fn missing_file_exits_2() {
    let out = catind()
        .args(["test", "--csv", "/nonexistent/data.csv", "--x", "a", "--y", "b"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unknown_column_exits_2() {
    let f = hand_table_csv();
    let out = catind()
        .args(["test", "--csv"])
        .arg(f.path())
        .args(["--x", "treatment", "--y", "nope"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown column"));
}

#[test]
fn single_category_column_exits_2() {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    writeln!(f, "x,y\na,p\na,q\na,p").unwrap();
    f.flush().unwrap();
    let out = catind()
        .args(["test", "--csv"])
        .arg(f.path())
        .args(["--x", "x", "--y", "y"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("single distinct value"));
}

#[test]
fn bad_grid_exits_3() {
    let out = catind()
        .args(["sim-type1", "--sizes", "200,100", "--cards", "2"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn missing_subcommand_exits_3() {
    let out = catind().output().unwrap();
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn sim_type1_writes_report_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t1.csv");
    let status = catind()
        .args([
            "sim-type1",
            "--sizes",
            "60",
            "--cards",
            "2",
            "--cols",
            "8",
            "--methods",
            "x2,g2",
            "--seed",
            "5",
            "--workers",
            "1",
            "--out",
        ])
        .arg(&path)
        .status()
        .unwrap();
    assert!(status.success());
    let content = std::fs::read_to_string(&path).unwrap();
    let mut lines = content.lines();
    assert_eq!(
        lines.next(),
        Some("n,card,n_cond,method,rejection_rate,size_correct,n_incomputable,seed,config_hash")
    );
    assert_eq!(lines.count(), 2);
    assert!(content.contains("60,2,0,X2,"));
    assert!(content.contains("60,2,0,G2,"));
}

#[test]
fn permutation_test_via_binary_is_reproducible() {
    let f = hand_table_csv();
    let run = || {
        let out = catind()
            .args(["test", "--csv"])
            .arg(f.path())
            .args([
                "--x",
                "treatment",
                "--y",
                "outcome",
                "--method",
                "perm-g2",
                "--perms",
                "499",
                "--seed",
                "7",
            ])
            .output()
            .unwrap();
        assert!(out.status.success());
        out.stdout
    };
    assert_eq!(run(), run());
}
