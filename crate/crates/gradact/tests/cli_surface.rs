//! End-to-end exercises of the `gradact` binary: flags, file formats, and
//! exit codes.

use gradact::train::{ModelActivation, TrainConfig};
use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_gradact"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn data_file(name: &str) -> String {
    format!("{}/data/{name}", env!("CARGO_MANIFEST_DIR"))
}

#[test]
fn curve_reference_rows() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("xielu.csv");
    let out = run(&[
        "curve",
        "--kind",
        "xielu",
        "--alpha-p",
        "0.8",
        "--alpha-n",
        "0.8",
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{out:?}");
    let csv = std::fs::read_to_string(&out_path).unwrap();
    let mut at0 = None;
    let mut at1 = None;
    for line in csv.lines().skip(1) {
        let cols: Vec<f64> = line.split(',').map(|v| v.parse().unwrap()).collect();
        if cols[0] == 0.0 {
            at0 = Some((cols[1], cols[2]));
        }
        if cols[0] == 1.0 {
            at1 = Some((cols[1], cols[2]));
        }
    }
    let (f0, d0) = at0.expect("row at x=0");
    assert_eq!(f0, 0.0);
    assert!((d0 - 0.5).abs() < 1e-12);
    let (f1, d1) = at1.expect("row at x=1");
    assert!((f1 - 1.3).abs() < 1e-12);
    assert!((d1 - 2.1).abs() < 1e-12);
}

#[test]
fn curve_relu2_is_flat_below_zero() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("relu2.csv");
    let out = run(&[
        "curve",
        "--kind",
        "relu2",
        "--xmin",
        "-5",
        "--xmax",
        "5",
        "--samples",
        "11",
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let csv = std::fs::read_to_string(&out_path).unwrap();
    let first = csv.lines().nth(1).unwrap();
    let cols: Vec<f64> = first.split(',').map(|v| v.parse().unwrap()).collect();
    assert_eq!((cols[0], cols[1], cols[2]), (-5.0, 0.0, 0.0));
}

#[test]
fn curve_sweep_writes_one_file_per_value() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("fig.csv");
    let out = run(&[
        "curve",
        "--kind",
        "xielu",
        "--sweep",
        "alpha_n=0.5,1,2",
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{out:?}");
    for name in ["fig_alpha_n_0.5.csv", "fig_alpha_n_1.csv", "fig_alpha_n_2.csv"] {
        assert!(dir.path().join(name).exists(), "missing {name}");
    }
}

#[test]
fn usage_errors_exit_two() {
    let bad_kind = run(&["curve", "--kind", "tanh", "--out", "/tmp/x.csv"]);
    assert_eq!(bad_kind.status.code(), Some(2));

    let bad_range = run(&["curve", "--kind", "relu", "--xmin", "3", "--xmax", "-3", "--out", "/tmp/x.csv"]);
    assert_eq!(bad_range.status.code(), Some(2));

    let bad_samples =
        run(&["curve", "--kind", "relu", "--samples", "1", "--out", "/tmp/x.csv"]);
    assert_eq!(bad_samples.status.code(), Some(2));

    // clap's own usage errors also exit 2
    let unknown_flag = run(&["curve", "--frobnicate"]);
    assert_eq!(unknown_flag.status.code(), Some(2));

    let bad_mode = run(&["stability", "--mode", "fp8"]);
    assert_eq!(bad_mode.status.code(), Some(2));
}

#[test]
fn derive_prints_negative_constant() {
    let out = run(&["derive", "--spec", &data_file("xielu.gradspec"), "--anchor", "0,0"]);
    assert!(out.status.success(), "{out:?}");
    let text = stdout(&out);
    // C_n = -alpha_n = -0.8 for the bundled spec
    assert!(
        text.contains("piece 0: C = -8.0000000000000004e-1"),
        "stdout was:\n{text}"
    );
    assert!(text.contains("piece 1: C = 0.0000000000000000e0"), "stdout was:\n{text}");
    // matched intercepts: no gradient jump at the breakpoint
    assert!(text.contains("gradient jump at x = 0: 0.0000000000000000e0"));
}

#[test]
fn derive_rejects_malformed_specs() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.gradspec");
    std::fs::write(&bad, "(0,inf) 1 2 3\n").unwrap();
    let out = run(&["derive", "--spec", bad.to_str().unwrap(), "--anchor", "0,0"]);
    assert_eq!(out.status.code(), Some(2));

    let out = run(&["derive", "--spec", &data_file("xielu.gradspec"), "--anchor", "zero"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn gradcheck_single_kind_passes() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("report.csv");
    let out = run(&[
        "gradcheck",
        "--kind",
        "xiprelu",
        "--seed",
        "7",
        "--out",
        report.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{out:?}");
    let csv = std::fs::read_to_string(&report).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "check,samples,max_rel_err,worst_x,tolerance,pass");
    assert_eq!(lines.len(), 4, "input, param, and model rows: {csv}");
    assert!(lines[1..].iter().all(|l| l.ends_with(",true")), "{csv}");
}

#[test]
fn stability_report_shows_total_loss_at_cancellation_point() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("stab.csv");
    let out = run(&["stability", "--mode", "single", "--out", report.to_str().unwrap()]);
    assert!(out.status.success(), "{out:?}");
    let csv = std::fs::read_to_string(&report).unwrap();
    let row = csv
        .lines()
        .find(|l| l.starts_with("-1.0000000000000000e-8,"))
        .expect("probe at -1e-8");
    let cols: Vec<&str> = row.split(',').collect();
    // naive collapses to zero: relative error exactly 1
    assert_eq!(cols[1], "0.0000000000000000e0", "naive value: {row}");
    assert_eq!(cols[4], "1.0000000000000000e0", "naive rel err: {row}");
    let stable_rel: f64 = cols[5].parse().unwrap();
    assert!(stable_rel < 1e-6, "{row}");

    let out = run(&["stability", "--mode", "bf16"]);
    assert!(out.status.success());
}

fn tiny_config() -> TrainConfig {
    TrainConfig {
        d_model: 16,
        n_layers: 2,
        context_length: 4,
        batch_size: 16,
        steps: 60,
        log_every: 20,
        warmup_steps: 10,
        constant_steps: 38,
        cooldown_steps: 12,
        ..TrainConfig::desk_default(ModelActivation::Kind(
            gradact::activations::ActivationKind::XIelu,
        ))
    }
}

#[test]
fn train_writes_reproducible_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("tiny.cfg");
    std::fs::write(&config, tiny_config().to_text()).unwrap();

    let run_train = |out_dir: &Path| {
        let out = run(&[
            "train",
            "--config",
            config.to_str().unwrap(),
            "--out-dir",
            out_dir.to_str().unwrap(),
            "--corpus",
            &data_file("corpus.txt"),
        ]);
        assert!(out.status.success(), "{out:?}");
    };
    let (dir_a, dir_b) = (dir.path().join("a"), dir.path().join("b"));
    run_train(&dir_a);
    run_train(&dir_b);

    let log_a = std::fs::read(dir_a.join("runlog.csv")).unwrap();
    let log_b = std::fs::read(dir_b.join("runlog.csv")).unwrap();
    assert_eq!(log_a, log_b, "same seed must reproduce the log byte for byte");
    assert!(dir_a.join("checkpoint.bin").exists());

    // the checkpoint round-trips through the library loader
    let mut file = std::fs::File::open(dir_a.join("checkpoint.bin")).unwrap();
    let model = gradact::nn::load_checkpoint(&mut file).unwrap();
    assert_eq!(model.layers.len(), 2);

    // run log header matches the documented schema
    let text = String::from_utf8(log_a).unwrap();
    assert!(text.starts_with("step,lr,loss,alpha_p_0,alpha_p_1,alpha_n_0,alpha_n_1\n"));

    // alphas prints the per-layer table from the same log
    let out = run(&["alphas", "--log", dir_a.join("runlog.csv").to_str().unwrap()]);
    assert!(out.status.success());
    let table = stdout(&out);
    assert!(table.contains("layer"), "{table}");
    assert!(table.lines().count() >= 4, "{table}");
}

#[test]
fn train_reports_missing_config_keys() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("partial.cfg");
    std::fs::write(&config, "seed = 1\nbatch_size = 8\n").unwrap();
    let out = run(&[
        "train",
        "--config",
        config.to_str().unwrap(),
        "--out-dir",
        dir.path().join("out").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr).into_owned();
    assert!(err.contains("missing config keys"), "{err}");
    assert!(err.contains("activation"), "{err}");
}

#[test]
fn bench_prints_census_table() {
    let out = run(&["bench", "--kind", "xielu", "--n", "10000"]);
    assert!(out.status.success(), "{out:?}");
    let text = stdout(&out);
    assert!(text.contains("xielu"), "{text}");
    // census columns for xielu: 1 exp, 4 mults, 4 adds, 0 divs, 1 conditional
    let row = text.lines().find(|l| l.starts_with("xielu")).unwrap();
    let nums: Vec<&str> = row.split_whitespace().collect();
    assert_eq!(&nums[1..6], &["1", "4", "4", "0", "1"], "{row}");
}
