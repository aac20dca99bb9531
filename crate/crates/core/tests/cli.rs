//! End-to-end tests of the `vqra` binary.

use std::path::Path;
use std::process::{Command, Output};

use vqra::model::Checkpoint;
use vqra::report::RunManifest;

fn vqra(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vqra"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn write_config(dir: &Path, name: &str, json: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, json).unwrap();
    p.to_string_lossy().into_owned()
}

const SMALL_FIT: &str = r#"{"target": "f4", "d_e": 2, "train": {"iterations": 40, "seed": 3}}"#;

#[test]
fn fit_writes_four_files_and_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "fit.json", SMALL_FIT);
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for out in [&a, &b] {
        let o = vqra(&["fit", "--config", &cfg, "--out", out.to_str().unwrap(), "--quiet"]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    }
    let mut names: Vec<String> = std::fs::read_dir(&a)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    assert_eq!(names, ["checkpoint.json", "manifest.json", "predictions.csv", "trace.csv"]);
    for f in ["trace.csv", "predictions.csv", "checkpoint.json"] {
        assert_eq!(std::fs::read(a.join(f)).unwrap(), std::fs::read(b.join(f)).unwrap(), "{f}");
    }
    let manifest: RunManifest = serde_json::from_slice(&std::fs::read(a.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest.outputs.len(), 3);
    assert_eq!(manifest.seeds, vec![3]);
    for f in &manifest.outputs {
        let bytes = std::fs::read(a.join(&f.path)).unwrap();
        assert_eq!(vqra::report::sha256_hex(&bytes), f.sha256);
    }
    let trace = std::fs::read_to_string(a.join("trace.csv")).unwrap();
    assert_eq!(trace.lines().count(), 1 + 41);
}

#[test]
fn manifest_config_reproduces_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "fit.json", SMALL_FIT);
    let a = dir.path().join("a");
    assert_eq!(code(&vqra(&["fit", "--config", &cfg, "--out", a.to_str().unwrap(), "--quiet"])), 0);
    let manifest: RunManifest = serde_json::from_slice(&std::fs::read(a.join("manifest.json")).unwrap()).unwrap();
    let resolved = write_config(dir.path(), "resolved.json", &manifest.config.to_string());
    let b = dir.path().join("b");
    assert_eq!(code(&vqra(&["fit", "--config", &resolved, "--out", b.to_str().unwrap(), "--quiet"])), 0);
    assert_eq!(
        std::fs::read(a.join("predictions.csv")).unwrap(),
        std::fs::read(b.join("predictions.csv")).unwrap()
    );
}

#[test]
fn predict_round_trips_training_predictions() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "fit.json", SMALL_FIT);
    let out = dir.path().join("fit");
    assert_eq!(code(&vqra(&["fit", "--config", &cfg, "--out", out.to_str().unwrap(), "--quiet"])), 0);
    let ck_path = out.join("checkpoint.json");
    let ck: Checkpoint = serde_json::from_slice(&std::fs::read(&ck_path).unwrap()).unwrap();
    let training = ck.training.unwrap();
    let input: String = std::iter::once("x".to_string())
        .chain(training.xs.iter().map(|x| x[0].to_string()))
        .collect::<Vec<_>>()
        .join("\n");
    let input_path = write_config(dir.path(), "xs.csv", &input);
    let o = vqra(&["predict", "--checkpoint", ck_path.to_str().unwrap(), "--input", &input_path]);
    assert_eq!(code(&o), 0);
    let stdout = String::from_utf8(o.stdout).unwrap();
    let preds: Vec<f64> = stdout
        .lines()
        .skip(1)
        .map(|l| l.split(',').next_back().unwrap().parse().unwrap())
        .collect();
    assert_eq!(preds.len(), training.predictions.len());
    for (a, b) in preds.iter().zip(&training.predictions) {
        assert!((a - b).abs() < 1e-12);
    }
}

#[test]
fn predict_warns_outside_domain_and_rejects_bad_checkpoints() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "fit.json", r#"{"d_e": 1, "train": {"iterations": 0}}"#);
    let out = dir.path().join("fit");
    assert_eq!(code(&vqra(&["fit", "--config", &cfg, "--out", out.to_str().unwrap(), "--quiet"])), 0);
    let ck = out.join("checkpoint.json");
    let o = vqra(&["predict", "--checkpoint", ck.to_str().unwrap(), "--x", "1.7", "--x", "-0.2"]);
    assert_eq!(code(&o), 0);
    assert!(String::from_utf8_lossy(&o.stderr).contains("warning"));
    assert_eq!(String::from_utf8_lossy(&o.stdout).lines().count(), 3);

    let bad = write_config(dir.path(), "bad.json", r#"{"circuit": {"k": 3}}"#);
    assert_eq!(code(&vqra(&["predict", "--checkpoint", &bad, "--x", "0"])), 2);
    let garbage = write_config(dir.path(), "garbage.json", "not json");
    assert_eq!(code(&vqra(&["predict", "--checkpoint", &garbage, "--x", "0"])), 2);
}

#[test]
fn configuration_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o");
    let out = out.to_str().unwrap();
    let zero_depth = write_config(dir.path(), "z.json", r#"{"d_e": 0, "train": {"iterations": 5}}"#);
    let o = vqra(&["fit", "--config", &zero_depth, "--out", out]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("d_e"));

    let unknown = write_config(dir.path(), "u.json", r#"{"depth": 3}"#);
    let o = vqra(&["fit", "--config", &unknown, "--out", out]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("depth"));

    let nested = write_config(dir.path(), "n.json", r#"{"train": {"iters": 3}}"#);
    assert_eq!(code(&vqra(&["fit", "--config", &nested, "--out", out])), 2);
    assert_eq!(code(&vqra(&["fit", "--config", "/nonexistent/cfg.json", "--out", out])), 2);
    assert_eq!(code(&vqra(&["sweep", "width", "--out", out])), 2);
    assert_eq!(code(&vqra(&["fit", "--jobs", "0", "--out", out])), 2);
}

#[test]
fn depth_sweep_writes_one_row_per_cell() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "s.json",
        r#"{"train": {"iterations": 2, "rounds": 2}, "sample_count": 6}"#,
    );
    let out = dir.path().join("depth");
    let o = vqra(&["sweep", "depth", "--config", &cfg, "--out", out.to_str().unwrap(), "--quiet"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let fig = std::fs::read_to_string(out.join("fig5.csv")).unwrap();
    assert_eq!(fig.lines().next().unwrap(), "config,d_e,mean,std");
    assert_eq!(fig.lines().count(), 1 + 4 * 6);
    let agg = std::fs::read_to_string(out.join("aggregates.csv")).unwrap();
    assert_eq!(agg.lines().next().unwrap(), "config_id,d_e,noise_p,mean_loss,std_loss");
    let plot = std::fs::read_to_string(out.join("plot.gp")).unwrap();
    assert!(plot.contains("fig5.csv"));
    assert!(out.join("manifest.json").exists());
}

#[test]
fn noise_sweep_writes_one_row_per_cell() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "s.json",
        r#"{"d_e": 1, "train": {"iterations": 1, "rounds": 1}, "sample_count": 4}"#,
    );
    let out = dir.path().join("noise");
    let o = vqra(&["sweep", "noise", "--config", &cfg, "--out", out.to_str().unwrap(), "--quiet", "--jobs", "1"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let fig = std::fs::read_to_string(out.join("fig6.csv")).unwrap();
    assert_eq!(fig.lines().next().unwrap(), "config,p,mean,std");
    assert_eq!(fig.lines().count(), 1 + 4 * 11);
}

#[test]
fn shots_flag_switches_evaluation_mode() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "f.json", r#"{"d_e": 1, "train": {"iterations": 2}, "sample_count": 5}"#);
    let out = dir.path().join("shots");
    let o = vqra(&["fit", "--config", &cfg, "--out", out.to_str().unwrap(), "--shots", "500", "--seed", "9", "--quiet"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let ck: Checkpoint = serde_json::from_slice(&std::fs::read(out.join("checkpoint.json")).unwrap()).unwrap();
    assert_eq!(ck.eval_mode, vqra::model::EvalMode::Shots { count: 500, seed: 9 });
}

#[test]
fn selftest_passes_and_detects_injected_fault() {
    let o = vqra(&["selftest"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let stdout = String::from_utf8(o.stdout).unwrap();
    let summary = stdout.lines().last().unwrap();
    let count: usize = summary.split_whitespace().next().unwrap().parse().unwrap();
    assert!(count > 20, "{summary}");

    let o = vqra(&["selftest", "--fault", "gate-convention"]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("swap-test law"));
}

#[test]
fn help_exits_zero() {
    assert_eq!(code(&vqra(&["--help"])), 0);
    assert_eq!(code(&vqra(&[])), 2);
}
