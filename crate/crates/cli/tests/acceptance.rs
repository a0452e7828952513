//! Acceptance suite: one line per criterion, then a second process run to
//! compare report bytes. Runs without the test harness so the lines are
//! never captured.

use std::path::Path;
use std::process::Command;

use vanlam_cli::config::ExperimentConfig;
use vanlam_cli::suite::{run_suite, Status};

fn suite_files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let status = Command::new(env!("CARGO_BIN_EXE_vanlam"))
        .args(["suite", "--out"])
        .arg(dir)
        .output()
        .expect("binary runs");
    assert_eq!(
        status.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&status.stderr)
    );
    let mut files: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (
                e.file_name().to_string_lossy().into_owned(),
                std::fs::read(e.path()).unwrap(),
            )
        })
        .collect();
    files.sort();
    files
}

fn main() {
    let report = run_suite(&ExperimentConfig::default()).expect("suite runs");
    let mut lines: Vec<String> = report.results.iter().map(|r| r.line()).collect();

    // two separate processes, same config
    let (first, second) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let (x, y) = (suite_files(first.path()), suite_files(second.path()));
    let same = x == y && !x.is_empty();
    lines.push(format!(
        "criterion 9 {:<22} {:<12} measured: {} files across two processes {} | tolerance: byte-identical",
        "determinism-process",
        if same { "PASS" } else { "FAIL" },
        x.len(),
        if same { "byte-identical" } else { "differ" }
    ));
    for line in &lines {
        println!("{line}");
    }
    let failed: Vec<_> = report
        .results
        .iter()
        .filter(|r| r.status != Status::Pass)
        .map(|r| r.id)
        .collect();
    assert!(
        failed.is_empty() && same,
        "criteria not passing: {failed:?}"
    );
    assert_eq!(
        report.results.iter().map(|r| r.id).collect::<Vec<_>>(),
        (1..=9).collect::<Vec<_>>()
    );
    println!("acceptance: all criteria pass");
}
