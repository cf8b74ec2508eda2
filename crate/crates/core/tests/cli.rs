mod common;

use std::path::Path;
use std::process::{Command, Output};

use abcbp::metrics::{self, StableCcr};

fn abcbp(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_abcbp"))
        .args(args)
        .current_dir(dir)
        .env("ABCBP_DATA_DIR", common::data_dir())
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn single_run_writes_report_and_curves() {
    let tmp = tempfile::tempdir().unwrap();
    let out = abcbp(
        tmp.path(),
        &["--dataset", "iris", "--algo", "abc", "--seed", "7", "--mcn", "20", "--out", "r.json", "--curves", "c.csv"],
    );
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(stdout(&out).starts_with("iris abc seed=7 cycles=20"), "{}", stdout(&out));

    let report = metrics::read_report(&tmp.path().join("r.json")).unwrap();
    assert_eq!(report.schema_version, metrics::SCHEMA_VERSION);
    assert_eq!(report.records.len(), report.summary.cycles_run);
    assert!(report.invocation.iter().any(|a| a == "--seed"));
    let curves = std::fs::read_to_string(tmp.path().join("c.csv")).unwrap();
    assert_eq!(curves.lines().next(), Some("cycle,sse_best,sse_avg,ccr_avg"));
    assert_eq!(curves.lines().count(), report.records.len() + 1);
}

#[test]
fn default_outputs_and_repeatability() {
    let tmp = tempfile::tempdir().unwrap();
    let args = ["--dataset", "wine", "--hybrid-bp", "--mcn", "15", "--seed", "3"];
    assert!(abcbp(tmp.path(), &args).status.success());
    let first = std::fs::read(tmp.path().join("results/wine-abc.json")).unwrap();
    assert!(abcbp(tmp.path(), &args).status.success());
    let second = std::fs::read(tmp.path().join("results/wine-abc.json")).unwrap();
    assert_eq!(first, second);
    assert!(tmp.path().join("results/wine-abc.csv").exists());
}

#[test]
fn several_seeds_get_separate_files() {
    let tmp = tempfile::tempdir().unwrap();
    let out = abcbp(
        tmp.path(),
        &["--algo", "ga", "--seeds", "0,2", "--mcn", "5", "--out", "o/ga.json", "--curves", "o/ga.csv"],
    );
    assert!(out.status.success(), "{}", stderr(&out));
    assert_eq!(stdout(&out).lines().count(), 2);
    for seed in [0, 2] {
        assert!(tmp.path().join(format!("o/ga-seed{seed}.json")).exists());
        assert!(tmp.path().join(format!("o/ga-seed{seed}.csv")).exists());
    }
}

#[test]
fn file_dataset_with_layout_flags() {
    let tmp = tempfile::tempdir().unwrap();
    let mut text = String::from("id;label;x;y\n");
    for i in 0..20 {
        let c = i % 2;
        text.push_str(&format!("{i};k{c};{};{}\n", c as f64 + 0.01 * i as f64, 1 - c));
    }
    std::fs::write(tmp.path().join("toy.csv"), text).unwrap();
    let out = abcbp(
        tmp.path(),
        &[
            "--dataset", "toy.csv", "--algo", "bp", "--mcn", "30", "--hidden", "3",
            "--delimiter", ";", "--header", "--class-column", "1", "--id-columns", "0",
            "--out", "toy.json",
        ],
    );
    assert!(out.status.success(), "{}", stderr(&out));
    let report = metrics::read_report(&tmp.path().join("toy.json")).unwrap();
    assert_eq!((report.dataset.rows, report.dataset.features, report.dataset.classes), (20, 2, 2));
}

#[test]
fn non_converging_run_reports_not_stable() {
    let tmp = tempfile::tempdir().unwrap();
    let out = abcbp(
        tmp.path(),
        &[
            "--step-mode", "off", "--lr", "0", "--hybrid-bp", "--scout-policy", "replace", "--threshold", "100",
            "--out", "r.json",
        ],
    );
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(stdout(&out).contains("ccr_stable=not_stable"));
    let report = metrics::read_report(&tmp.path().join("r.json")).unwrap();
    assert_eq!(report.summary.ccr_stable, StableCcr::NotStable);
    assert_eq!(report.summary.cycles_run, 100);
}

#[test]
fn exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let out = abcbp(tmp.path(), &["--dataset", "nosuch"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("valid choices: iris, wine, glass, soybean"));

    assert_eq!(abcbp(tmp.path(), &["--bogus"]).status.code(), Some(1));
    assert_eq!(abcbp(tmp.path(), &["--pop", "1"]).status.code(), Some(1));
    assert_eq!(abcbp(tmp.path(), &["--algo", "genetic"]).status.code(), Some(1));
    assert_eq!(abcbp(tmp.path(), &["--help"]).status.code(), Some(0));

    std::fs::write(tmp.path().join("bad.csv"), "1,2,a\n1,x,b\n").unwrap();
    let out = abcbp(tmp.path(), &["--dataset", "bad.csv"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains(":2:"), "{}", stderr(&out));

    let out = abcbp(tmp.path(), &["--dataset", "iris", "--data-dir", "nowhere"]);
    assert_eq!(out.status.code(), Some(2));

    // A huge learning rate drives plain BP to overflow.
    let out = abcbp(tmp.path(), &["--algo", "bp", "--bp-mode", "batch", "--lr", "1e308", "--mcn", "3"]);
    assert_eq!(out.status.code(), Some(3), "{}", stderr(&out));
}

#[test]
fn compare_prints_table_and_writes_json() {
    let tmp = tempfile::tempdir().unwrap();
    let out = abcbp(
        tmp.path(),
        &["compare", "--datasets", "iris", "--seeds", "0", "--mcn", "10", "--out", "cmp.json"],
    );
    assert!(out.status.success(), "{}", stderr(&out));
    let table = stdout(&out);
    assert_eq!(table.lines().count(), 3, "{table}");
    assert!(table.lines().nth(1).unwrap().starts_with("iris"));
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(tmp.path().join("cmp.json")).unwrap()).unwrap();
    assert_eq!(json["rows"].as_array().unwrap().len(), 2);
}
