//! End-to-end runs of the `blaschke` binary.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use blaschke_cli::report::body;
use blaschke_cli::ExperimentConfig;

fn blaschke(config: &Path, out: &Path, sub: &str) -> Output {
    Command::new(env!("CARGO_BIN_EXE_blaschke"))
        .arg(sub)
        .arg("--config")
        .arg(config)
        .arg("--out")
        .arg(out)
        .output()
        .unwrap()
}

const COUNTEREXAMPLE: &str = r#"
seed = 3

[sequence]
family = "counterexample"
count = 1000

[counterexample]
angles = 8
window = 100
"#;

#[test]
fn counterexample_smoke_run() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("ce.toml");
    fs::write(&config, COUNTEREXAMPLE).unwrap();
    let out = dir.path().join("out");
    let res = blaschke(&config, &out, "counterexample");
    assert_eq!(res.status.code(), Some(0), "{}", String::from_utf8_lossy(&res.stderr));

    let csv = fs::read_to_string(out.join("counterexample.csv")).unwrap();
    assert!(csv.contains("# command: counterexample"));
    assert!(csv.contains("# config.sequence.family: \"counterexample\"") || csv.contains("# config.sequence.family: counterexample"));
    let csv_body = body(&csv);
    let rows: Vec<&str> = csv_body.lines().collect();
    assert_eq!(rows[0], "n,theta,interior_gauge,boundary_osc");
    // 10 checkpoints × 8 angles.
    assert_eq!(rows.len(), 1 + 10 * 8);
    let summary = fs::read_to_string(out.join("summary.txt")).unwrap();
    assert!(summary.contains("interior_gauge.final"));
    assert!(out.join("zero_angles.csv").exists());
}

#[test]
fn out_of_disc_zero_is_rejected_with_its_generator() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("bad.toml");
    fs::write(
        &config,
        r#"
[sequence]
family = "explicit"

[[sequence.generators]]
zeros = [{ re = 0.2, im = 0.0 }]

[[sequence.generators]]
zeros = [{ re = 1.5, im = 0.0 }]
"#,
    )
    .unwrap();
    let res = blaschke(&config, &dir.path().join("out"), "compose");
    assert_eq!(res.status.code(), Some(2));
    let err = String::from_utf8_lossy(&res.stderr);
    assert!(err.contains("generator 2"), "{err}");
    assert!(err.contains("1.5"), "{err}");
    assert!(!dir.path().join("out").join("composites.csv").exists());
}

#[test]
fn repeated_runs_write_identical_bodies() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("geo.toml");
    fs::write(
        &config,
        r#"
seed = 5

[sequence]
family = "geometric"
count = 8

[boundary]
orbit_angles = [0.5, 2.0]
l1_pairs = [[2, 3]]
ks_steps = [4]
ks_samples = 20000
"#,
    )
    .unwrap();
    let mut seen = Vec::new();
    for run in ["a", "b"] {
        let out = dir.path().join(run);
        for sub in ["compose", "boundary"] {
            let res = blaschke(&config, &out, sub);
            assert_eq!(res.status.code(), Some(0), "{}", String::from_utf8_lossy(&res.stderr));
        }
        let mut files: Vec<_> = fs::read_dir(&out)
            .unwrap()
            .map(|e| e.unwrap().path())
            .filter(|p| p.extension().is_some_and(|e| e == "csv"))
            .collect();
        files.sort();
        seen.push(files.iter().map(|p| body(&fs::read_to_string(p).unwrap())).collect::<Vec<_>>());
    }
    assert_eq!(seen[0].len(), 5);
    assert_eq!(seen[0], seen[1]);
}

#[test]
fn shipped_configs_round_trip() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    for entry in fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        let cfg = ExperimentConfig::read(&path).unwrap();
        let again = ExperimentConfig::from_toml(&cfg.to_toml()).unwrap();
        assert_eq!(cfg, again, "{}", path.display());
    }
}
