use std::path::Path;
use std::process::{Command, Output};

use lsimvc_core::dataset::write_matrix_csv;
use lsimvc_core::solver::read_trace_csv;
use ndarray::array;

const CONFIG: &str = r#"{
  "dataset": { "kind": "blobs", "n": 45, "clusters": 3, "view_dims": [6, 5], "seed": 3 },
  "mask": { "protocol": "random-missing", "rates": [0.2], "repeats": 2 },
  "grid": { "lambda": [1.0], "beta": [0.001], "r": [2.0, 3.0], "k": [4] },
  "metrics": { "restarts": 4 },
  "master_seed": 17
}"#;

fn lsimvc(args: &[&str], extra: &[&Path]) -> Output {
    let out = Command::new(env!("CARGO_BIN_EXE_lsimvc"))
        .args(args)
        .args(extra)
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

#[test]
fn run_writes_reproducible_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let config = tmp.path().join("c.json");
    std::fs::write(&config, CONFIG).unwrap();
    for name in ["a", "b"] {
        let out = tmp.path().join(name);
        lsimvc(
            &["run", "--workers", "2", "--config"],
            &[&config, Path::new("--output"), &out],
        );
    }
    for file in ["trials.csv", "aggregate.csv"] {
        let a = std::fs::read(tmp.path().join("a").join(file)).unwrap();
        let b = std::fs::read(tmp.path().join("b").join(file)).unwrap();
        assert_eq!(a, b, "{file} differs");
    }
    let trials = std::fs::read_to_string(tmp.path().join("a/trials.csv")).unwrap();
    assert_eq!(trials.lines().count(), 1 + 2 * 2);
    assert!(tmp.path().join("a/manifest.json").exists());
}

#[test]
fn seed_override_changes_masks() {
    let tmp = tempfile::tempdir().unwrap();
    let config = tmp.path().join("c.json");
    std::fs::write(&config, CONFIG).unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    lsimvc(&["run", "--config"], &[&config, Path::new("--output"), &a]);
    lsimvc(
        &["run", "--seed", "18", "--config"],
        &[&config, Path::new("--output"), &b],
    );
    assert_ne!(
        std::fs::read(a.join("trials.csv")).unwrap(),
        std::fs::read(b.join("trials.csv")).unwrap()
    );
}

#[test]
fn ablate_labels_both_variants() {
    let tmp = tempfile::tempdir().unwrap();
    let config = tmp.path().join("c.json");
    std::fs::write(&config, CONFIG).unwrap();
    let out = tmp.path().join("o");
    lsimvc(
        &["ablate", "--which", "sparsity", "--config"],
        &[&config, Path::new("--output"), &out],
    );
    let agg = std::fs::read_to_string(out.join("aggregate.csv")).unwrap();
    assert!(agg.lines().any(|l| l.starts_with("full-")));
    assert!(agg.lines().any(|l| l.starts_with("wo-sparsity-")));
}

#[test]
fn trace_has_one_row_per_iteration_and_round_trips() {
    let tmp = tempfile::tempdir().unwrap();
    let config = tmp.path().join("c.json");
    std::fs::write(&config, CONFIG).unwrap();
    let out = tmp.path().join("o");
    let stdout = lsimvc(
        &["trace", "--grid-index", "1", "--config"],
        &[&config, Path::new("--output"), &out],
    )
    .stdout;
    let stdout = String::from_utf8(stdout).unwrap();
    let iterations: usize = stdout.split_whitespace().next().unwrap().parse().unwrap();
    let path = out.join("trace_full-g1-rate0.2-rep0.csv");
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().count(), iterations + 1);
    assert!(text.starts_with("iteration,objective,e_1,e_2,alpha_1,alpha_2"));

    let entries = read_trace_csv(&path).unwrap();
    assert_eq!(entries.len(), iterations);
    for w in entries.windows(2) {
        assert!(w[1].objective <= w[0].objective * (1.0 + 1e-9));
    }
}

#[test]
fn validate_data_reports_shapes() {
    let tmp = tempfile::tempdir().unwrap();
    let v1 = tmp.path().join("v1.csv");
    let v2 = tmp.path().join("v2.csv");
    let av2 = tmp.path().join("a2.csv");
    let labels = tmp.path().join("y.csv");
    write_matrix_csv(&v1, &array![[1.0, 2.0, 3.0], [0.0, 1.0, 0.5]]).unwrap();
    write_matrix_csv(&v2, &array![[4.0, 5.0]]).unwrap();
    std::fs::write(&av2, "0\n2\n").unwrap();
    std::fs::write(&labels, "1\n0\n1\n").unwrap();
    let out = lsimvc(
        &["validate-data"],
        &[
            Path::new("--view"),
            &v1,
            Path::new("--view"),
            &v2,
            Path::new("--availability=-"),
            Path::new("--availability"),
            &av2,
            Path::new("--labels"),
            &labels,
        ],
    );
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("samples: 3"), "{text}");
    assert!(text.contains("view 1: 1 features x 2 instances"), "{text}");
    assert!(text.contains("classes: 2"), "{text}");
}

#[test]
fn bad_config_fails_cleanly() {
    let tmp = tempfile::tempdir().unwrap();
    let config = tmp.path().join("c.json");
    std::fs::write(&config, r#"{ "dataset": { "kind": "blobs", "n": 10, "clusters": 2, "view_dims": [3] }, "mask": { "protocol": "random-missing", "repeats": 0 } }"#).unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_lsimvc"))
        .args(["run", "--config"])
        .arg(&config)
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("repeats"));
}
