//! The command-line front end.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_gossip-torus"))
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("gossip-torus-cli-{}-{name}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn run_config(dir: &Path, text: &str, extra: &[&str]) -> Output {
    let conf = dir.join("run.conf");
    std::fs::write(&conf, text).unwrap();
    bin().arg("--config").arg(&conf).arg("--out").arg(dir).args(extra).output().unwrap()
}

const SPLITTING: &str = "experiment = splitting-tv\nN = 3\nk = 2\nt_start = 0\nt_stop = 4\nt_step = 0.5\n";

#[test]
fn writes_csv_with_provenance() {
    let dir = scratch("csv");
    let out = run_config(&dir, SPLITTING, &[]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.join("splitting-tv.csv")).unwrap();
    let mut lines = csv.lines();
    assert!(lines.next().unwrap().starts_with("# tool = "));
    assert!(csv.contains("# experiment = splitting-tv"));
    assert!(csv.contains("# config.k = 2"));
    assert!(csv.contains("# pass = true"));
    let header = csv.lines().find(|l| !l.starts_with('#')).unwrap();
    let columns = header.split(',').count();
    let rows: Vec<&str> = csv.lines().filter(|l| !l.starts_with('#')).skip(1).collect();
    assert_eq!(rows.len(), 9);
    assert!(rows.iter().all(|r| r.split(',').count() == columns));
}

#[test]
fn seed_override_is_recorded() {
    let dir = scratch("seed");
    let text = "experiment = avg-moments\nN = 5\nt = 0.5, 1\nreplicas = 200\nseed = 3\n";
    let out = run_config(&dir, text, &["--seed", "77"]);
    assert!(out.status.code().is_some_and(|c| c <= 1), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.join("avg-moments.csv")).unwrap();
    assert!(csv.contains("# seed = 77"));
}

#[test]
fn output_independent_of_thread_count() {
    let dir = scratch("threads");
    let text = "experiment = avg-moments\nN = 6\nt = 1\nreplicas = 600\nseed = 9\noutput = a.csv\n";
    assert!(run_config(&dir, text, &["--threads", "1"]).status.code().is_some_and(|c| c <= 1));
    let one = std::fs::read(dir.join("a.csv")).unwrap();
    assert!(run_config(&dir, text, &["--threads", "4"]).status.code().is_some_and(|c| c <= 1));
    assert_eq!(one, std::fs::read(dir.join("a.csv")).unwrap());
}

#[test]
fn invalid_config_reports_line_and_exits_2() {
    let dir = scratch("bad");
    let out = run_config(&dir, "experiment = heatflow\n# comment\nN = 2\nt = 1\n", &[]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 3"), "{err}");

    let out = run_config(&dir, "experiment = heatflow\nN = 5\ncolour = red\n", &[]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("colour"));
}

#[test]
fn list_names_every_experiment() {
    let out = bin().arg("--list").output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    for name in ["heatflow", "avg-moments", "concentration", "limit-profile", "splitting-tv", "cutoff-curve"] {
        assert!(text.contains(name), "{name}");
    }
}

#[test]
fn missing_config_is_a_usage_error() {
    let out = bin().output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}
