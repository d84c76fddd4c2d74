use std::process::{Command, Output};

fn edged3(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_edged3")).args(args).output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn short_train<'a>(out: &'a str) -> Vec<&'a str> {
    vec![
        "train", "--env", "pointmass", "--preset", "edge", "--steps", "300", "--warmup", "100",
        "--eval-interval", "100", "--eval-episodes", "2", "--log-interval", "50", "--out", out,
    ]
}

#[test]
fn train_writes_artifacts_and_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let o = edged3(&short_train(out.to_str().unwrap()));
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["curve.csv", "diagnostics.csv", "episodes.csv", "record.json", "checkpoint.json"] {
        assert!(out.join(f).exists(), "{f}");
    }
    let summary: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(summary["status"], "completed");

    let ckpt = out.join("checkpoint.json");
    let eval_dir = dir.path().join("eval");
    let o = edged3(&[
        "eval", "--checkpoint", ckpt.to_str().unwrap(), "--env", "pointmass", "--episodes", "2",
        "--out", eval_dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(eval_dir.join("eval.json").exists());

    let o = edged3(&["eval", "--checkpoint", ckpt.to_str().unwrap(), "--env", "corridor"]);
    assert_eq!(code(&o), 1);
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(code(&edged3(&[])), 1);
    assert_eq!(code(&edged3(&["train", "--agent", "sac"])), 1);
    assert_eq!(code(&edged3(&["train", "--steps", "10", "--seconds", "1"])), 1);
    assert_eq!(code(&edged3(&["train", "--alpha", "-2", "--steps", "0"])), 1);
    assert_eq!(code(&edged3(&["sweep", "--grid", "1:x"])), 1);
    assert_eq!(code(&edged3(&["--help"])), 0);
}

#[test]
fn numeric_failure_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"overrides": {"lr_critic": 1e300, "lr_actor": 1e300}}"#).unwrap();
    let out = dir.path().join("run");
    let mut args = short_train(out.to_str().unwrap());
    args.extend(["--config", cfg.to_str().unwrap()]);
    let o = edged3(&args);
    assert_eq!(code(&o), 2, "{}", String::from_utf8_lossy(&o.stderr));
    let rec: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("record.json")).unwrap()).unwrap();
    assert_eq!(rec["status"], "failed");
}

#[test]
fn io_failures_exit_three() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("missing.json");
    assert_eq!(code(&edged3(&["train", "--config", missing.to_str().unwrap()])), 3);
    assert_eq!(code(&edged3(&["eval", "--checkpoint", missing.to_str().unwrap()])), 3);

    let file = dir.path().join("occupied");
    std::fs::write(&file, "x").unwrap();
    let o = edged3(&short_train(file.join("sub").to_str().unwrap()));
    assert_eq!(code(&o), 3, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn sweep_bench_and_demo_write_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let sweep = dir.path().join("sweep");
    let mut args = short_train(sweep.to_str().unwrap());
    args[0] = "sweep";
    args.extend(["--grid", "1:2,2:1"]);
    let o = edged3(&args);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(sweep.join("summary.csv").exists());

    let bench = dir.path().join("bench");
    let o = edged3(&[
        "bench", "--steps", "5", "--seeds", "1", "--preset", "edge", "--peak-steps", "2",
        "--out", bench.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(bench.join("bench.json")).unwrap()).unwrap();
    assert_eq!(report["timing"].as_array().unwrap().len(), 4);
    assert!(report["memory"][0]["peak_heap_bytes"].as_u64().unwrap() > 0);

    let demo = dir.path().join("demo");
    let o = edged3(&["expectile-demo", "--steps", "500", "--out", demo.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["demo_data.csv", "demo_grid.csv", "demo_fits.json"] {
        assert!(demo.join(f).exists(), "{f}");
    }
}
