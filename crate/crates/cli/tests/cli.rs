use std::process::{Command, Output};

use vanlam_cli::commands::parse_targets;
use vanlam_cli::config::{ExperimentConfig, DEFAULT_CONFIG};
use vanlam_cli::suite::{criterion_transfer, Status};
use vanlam_cli::Failure;
use vanlam_core::bits::bits;
use vanlam_core::construct::ConstructError;
use vanlam_core::machine::Program;

fn vanlam(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vanlam"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn complexity_of_one_is_exhaustive() {
    let dir = tempfile::tempdir().unwrap();
    let targets = dir.path().join("t.txt");
    std::fs::write(&targets, "# single target\n1\n").unwrap();
    let o = vanlam(&[
        "complexity",
        targets.to_str().unwrap(),
        "--budget",
        "unbounded",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    let rows: Vec<&str> = out.lines().collect();
    assert_eq!(rows.len(), 2, "{out}");
    assert!(
        rows[1].starts_with("1,") && rows[1].contains(",unbounded,") && rows[1].ends_with(",true")
    );
    assert_eq!(
        stdout(&vanlam(&[
            "complexity",
            targets.to_str().unwrap(),
            "--budget",
            "unbounded"
        ])),
        out
    );
}

#[test]
fn bad_target_names_its_line() {
    let dir = tempfile::tempdir().unwrap();
    let targets = dir.path().join("t.txt");
    std::fs::write(&targets, "01\n\n0x1\n").unwrap();
    let o = vanlam(&["complexity", targets.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 3"));
    assert!(matches!(parse_targets("1\n2"), Err(Failure::Config(m)) if m.contains("line 2")));
}

#[test]
fn cap_violation_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let targets = dir.path().join("t.txt");
    std::fs::write(&targets, "1\n").unwrap();
    let o = vanlam(&["complexity", targets.to_str().unwrap(), "--cap", "99"]);
    assert_eq!(o.status.code(), Some(2));
    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, DEFAULT_CONFIG.replace("version = 1", "version = 7")).unwrap();
    assert_eq!(
        vanlam(&["suite", "--config", bad.to_str().unwrap()])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn compress_rows_decode() {
    let o = vanlam(&[
        "compress", "--a", "0110", "--b", "0000", "--n", "4", "--m", "4",
    ]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let out = stdout(&o);
    let mut r = csv::Reader::from_reader(out.as_bytes());
    let rows: Vec<csv::StringRecord> = r.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 2);
    for row in &rows {
        assert_eq!(&row[6], "true");
        let (len, bound): (i64, i64) = (row[4].parse().unwrap(), row[5].parse().unwrap());
        assert!(len <= bound, "{out}");
    }
}

#[test]
fn martingale_run_transcripts() {
    let o = vanlam(&["martingale-run", "--strategy", "constant", "0101"]);
    assert_eq!(stdout(&o).lines().count(), 6);
    assert!(stdout(&o)
        .lines()
        .all(|l| l.starts_with("prefix_len") || l.contains(",1,0,")));
    let code = format!("program:{}", Program::literal(&bits("1")).code());
    let o = vanlam(&["martingale-run", "--strategy", &code, "1"]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let o = vanlam(&["martingale-run", "--strategy", "lift-b-peek", "0110"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(
        vanlam(&["martingale-run", "--strategy", "nonsense", "01"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn build_pair_replay_and_refusal() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = vanlam(&[
        "build-pair",
        "--kind",
        "martingale",
        "--cap",
        "8",
        "--out",
        out,
    ]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let pair = dir.path().join("pair_martingale.txt");
    let replay = vanlam(&["build-pair", "--replay", pair.to_str().unwrap()]);
    assert_eq!(
        replay.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&replay.stderr)
    );

    let other = dir.path().join("other.toml");
    std::fs::write(
        &other,
        DEFAULT_CONFIG.replace(
            r#"decoders = ["interleave-tail", "conditional-interleave"]"#,
            "decoders = []",
        ),
    )
    .unwrap();
    let refused = vanlam(&[
        "build-pair",
        "--replay",
        pair.to_str().unwrap(),
        "--config",
        other.to_str().unwrap(),
    ]);
    assert_eq!(refused.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&refused.stderr).contains("built for machine"));

    let text = std::fs::read_to_string(&pair).unwrap();
    let tampered = dir.path().join("tampered.txt");
    let flipped = text.replacen(",true\n", ",false\n", 1);
    assert_ne!(flipped, text);
    std::fs::write(&tampered, flipped).unwrap();
    assert_eq!(
        vanlam(&["build-pair", "--replay", tampered.to_str().unwrap()])
            .status
            .code(),
        Some(1)
    );
}

#[test]
fn missing_witness_is_inconclusive() {
    let cfg = ExperimentConfig::default();
    let err = Err(ConstructError::NoWitness {
        stage: 2,
        block: "beta",
        len: 10,
        max_slack: 0,
    });
    let r = criterion_transfer(&cfg, &err).unwrap();
    assert_eq!(r.status, Status::Inconclusive);
    assert!(r.measured.contains("10"));
}
