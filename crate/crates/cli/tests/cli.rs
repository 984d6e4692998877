use std::fs;
use std::process::{Command, Output};

use trifpp::records::{parse_csv, parse_json};
use trifpp::Configuration;

fn trifpp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_trifpp")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn all_yellow_mu_is_65_over_64() {
    let o = trifpp(&["estimate-mu", "--p", "0", "--theta", "0", "--n", "64"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("mean = 1.015625 "), "{}", stdout(&o));
}

#[test]
fn verify_duality_reports_no_mismatches() {
    let o = trifpp(&["verify-duality", "--samples", "10000", "--seed", "7"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("mismatches: 0\n"));
}

#[test]
fn sweep_ladder_writes_one_row_per_p_and_estimand() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("ladder.cfg");
    let out = dir.path().join("out.csv");
    fs::write(&cfg, "seed = 3\nsamples = 20\np = 0.2, 0.3, 0.4, 0.45\n\n[crossing]\nr = 8\n\n[point-to-line]\nn = 8\n").unwrap();
    let o = trifpp(&["sweep", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let recs = parse_csv(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(recs.len(), 8);
    assert_eq!(recs.iter().filter(|r| r.estimand == "crossing").count(), 4);
}

#[test]
fn json_output_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("mu.json");
    let o = trifpp(&["estimate-mu", "--p", "0.3", "--n", "8,16", "--samples", "20", "--format", "json", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let recs = parse_json(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(recs.len(), 2);
    assert!(recs.iter().all(|r| r.wall_time.is_some()));
}

#[test]
fn thread_count_does_not_change_output() {
    let dir = tempfile::tempdir().unwrap();
    let run = |threads: &str| {
        let out = dir.path().join(format!("t{threads}.csv"));
        let o = trifpp(&[
            "--threads", threads, "arm-prob", "--p", "0.5", "--big-r", "6", "--samples", "300", "--seed", "4", "--out",
            out.to_str().unwrap(),
        ]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        fs::read_to_string(out).unwrap()
    };
    assert_eq!(run("1"), run("3"));
}

#[test]
fn sample_dump_decodes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("c.bin");
    let o = trifpp(&["sample", "--p", "0.4", "--n", "5", "--seed", "2", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let c = Configuration::decode(&fs::read(&out).unwrap()).unwrap();
    assert_eq!(c.p(), 0.4);
    assert_eq!(c.seed(), 2);
}

#[test]
fn pi4_table_feeds_corr_length() {
    let dir = tempfile::tempdir().unwrap();
    let table = dir.path().join("pi4.csv");
    let o = trifpp(&["pi4-table", "--n", "1,2,4,8", "--samples", "200", "--out", table.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = dir.path().join("l.csv");
    let o = trifpp(&[
        "corr-length", "--p", "0.05", "--samples", "50", "--table", table.to_str().unwrap(), "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let recs = parse_csv(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(recs.iter().map(|r| r.estimand.as_str()).collect::<Vec<_>>(), ["corr-length-eps", "corr-length-L"]);
}

#[test]
fn usage_errors_exit_1() {
    for args in [
        vec!["no-such-command"],
        vec!["estimate-mu"],
        vec!["estimate-mu", "--p", "1.5"],
        vec!["estimate-shape", "--p", "0.6"],
        vec!["arm-prob", "--p", "0.5", "--big-r", "4", "--arms", "alternating:3"],
        vec!["--threads", "0", "estimate-mu", "--p", "0.1"],
    ] {
        let o = trifpp(&args);
        assert_eq!(o.status.code(), Some(1), "{args:?}: {}", stderr(&o));
        assert!(!stderr(&o).is_empty());
    }
}

#[test]
fn budget_errors_exit_2() {
    let o = trifpp(&["corr-length", "--p", "0.49", "--eps", "0.01", "--max-radius", "2", "--samples", "20"]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    assert!(stderr(&o).contains("budget"));
}

#[test]
fn short_pi4_table_is_a_range_error() {
    let dir = tempfile::tempdir().unwrap();
    let table = dir.path().join("pi4.csv");
    assert_eq!(trifpp(&["pi4-table", "--n", "1,2", "--samples", "50", "--out", table.to_str().unwrap()]).status.code(), Some(0));
    let o = trifpp(&["corr-length", "--p", "0.45", "--samples", "20", "--table", table.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
}

#[test]
fn help_exits_0() {
    assert_eq!(trifpp(&["--help"]).status.code(), Some(0));
}
