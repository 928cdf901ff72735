//! Integration tests for the harness: weight-file format, config loading,
//! stage isolation, and end-to-end determinism at miniature scale.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use wleak_cli::config::ExperimentConfig;
use wleak_cli::report;
use wleak_cli::weightfile::{self, Precision};
use wleak_core::nn::{Activation, LayerSpec, Network};
use wleak_core::Matrix;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_wleak"))
}

/// Miniature experiment: small corpus, 4-layer surrogate, two attacked
/// layers, both directions. Fast enough to run several times per test.
fn mini_toml(out_dir: &Path) -> String {
    format!(
        r#"
experiment = "mini"
master_seed = 7
output_dir = {out:?}

[corpus]
feature_dim = 8
num_classes = 4
generic_speakers = 4
p1_speakers = 8
p2_speakers = 6
frames_per_session = 120

[topology]
num_layers = 4
hidden_units = 8

[generic_train]
epochs = 4

[personalize_train]
epochs = 2

[attack]
layers = [2, 3]

[extractor]
per_block_units = 4
fc_units = [16, 8]
num_classes = 3
epochs = 6
holdout_fraction = 0.15
"#,
        out = out_dir
    )
}

fn write_config(dir: &Path, toml: &str) -> PathBuf {
    let path = dir.join("config.toml");
    fs::write(&path, toml).unwrap();
    path
}

fn run_ok(config: &Path, subcommand: &str) {
    let output = bin().args(["--config"]).arg(config).arg(subcommand).output().unwrap();
    assert!(
        output.status.success(),
        "{subcommand} failed:\n{}",
        String::from_utf8_lossy(&output.stderr)
    );
}

fn seeded_net() -> Network {
    Network::seeded(
        vec![
            LayerSpec::new(5, 7, Activation::Relu),
            LayerSpec::new(7, 3, Activation::Softmax),
        ],
        2024,
    )
    .unwrap()
}

#[test]
fn weight_file_round_trips_f64_bitwise() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("net.wlkw");
    let net = seeded_net();
    weightfile::save_network(&path, &net, "generic").unwrap();

    let file = weightfile::load(&path).unwrap();
    assert_eq!(file.precision, Precision::F64);
    assert_eq!(file.provenance, "generic");
    assert_eq!(file.layers.len(), 2);
    for ((w, b), (ew, eb)) in file.layers.iter().zip(net.weights().iter().zip(net.biases())) {
        assert_eq!(w.data(), ew.data());
        assert_eq!(b, eb);
    }

    let dims: Vec<(usize, usize)> = net.weights().iter().map(|w| (w.cols(), w.rows())).collect();
    let expected = weightfile::expected_size(&dims, Precision::F64, "generic".len());
    assert_eq!(fs::metadata(&path).unwrap().len(), expected);
}

#[test]
fn weight_file_f32_stores_rounded_values() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("net32.wlkw");
    let w = Matrix::from_rows(&[vec![0.1, 0.2], vec![-0.3, 1.0 / 3.0]]).unwrap();
    let b = vec![0.25, -0.125];
    weightfile::save(&path, &[(&w, &b)], "p", Precision::F32).unwrap();

    let file = weightfile::load(&path).unwrap();
    assert_eq!(file.precision, Precision::F32);
    let (rw, rb) = &file.layers[0];
    for (loaded, original) in rw.data().iter().zip(w.data()) {
        assert_eq!(*loaded, *original as f32 as f64);
    }
    assert_eq!(rb[1], -0.125);
}

#[test]
fn weight_file_rejects_corruption() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("net.wlkw");
    weightfile::save_network(&path, &seeded_net(), "generic").unwrap();
    let good = fs::read(&path).unwrap();

    let mut bad_magic = good.clone();
    bad_magic[0] = b'X';
    fs::write(&path, &bad_magic).unwrap();
    let err = weightfile::load(&path).unwrap_err().to_string();
    assert!(err.contains("magic"), "unexpected error: {err}");

    fs::write(&path, &good[..good.len() - 3]).unwrap();
    assert!(weightfile::load(&path).is_err(), "truncated file must not load");

    let mut trailing = good.clone();
    trailing.push(0);
    fs::write(&path, &trailing).unwrap();
    let err = weightfile::load(&path).unwrap_err().to_string();
    assert!(err.contains("trailing"), "unexpected error: {err}");
}

#[test]
fn config_minimal_toml_fills_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_config(dir.path(), "experiment = \"x\"\nmaster_seed = 3\n");
    let config = ExperimentConfig::load(&path).unwrap();
    assert_eq!(config.master_seed, 3);
    assert_eq!(config.topology.num_layers, 13);
    assert_eq!(config.topology.hidden_units, 32);
    assert_eq!(config.personalize_train.initial_lr, 0.000_025);
    assert_eq!(config.personalize_train.final_lr, 0.000_015);
    assert_eq!(config.generic_train.initial_lr, 0.000_25);
    assert!(config.splits.both_directions);
}

#[test]
fn config_rejects_unknown_and_invalid_fields() {
    let dir = tempfile::tempdir().unwrap();

    let path = write_config(dir.path(), "experiment = \"x\"\nmystery_knob = 1\n");
    assert!(ExperimentConfig::load(&path).is_err(), "unknown key must be rejected");

    let path = write_config(
        dir.path(),
        "experiment = \"x\"\n[attack]\nlayers = [14]\n",
    );
    let err = ExperimentConfig::load(&path).unwrap_err().to_string();
    assert!(err.contains("layer"), "unexpected error: {err}");

    let path = write_config(
        dir.path(),
        "experiment = \"x\"\n[splits]\ntrain = \"p1\"\neval = \"p1\"\n",
    );
    assert!(ExperimentConfig::load(&path).is_err(), "overlapping splits must be rejected");
}

#[test]
fn stages_run_in_isolation_and_resume_without_retraining() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let config = write_config(dir.path(), &mini_toml(&out));

    run_ok(&config, "synth");
    assert!(out.join("corpus.json").exists());
    assert!(!out.join("generic.wlkw").exists());

    run_ok(&config, "pretrain");
    assert!(out.join("generic.wlkw").exists());
    assert!(!out.join("models").exists());
    let generic_bytes = fs::read(out.join("generic.wlkw")).unwrap();

    run_ok(&config, "personalize");
    let model = out.join("models").join("p1-000-s1.wlkw");
    assert!(model.exists(), "expected personalized model at {}", model.display());
    let model_bytes = fs::read(&model).unwrap();

    // Completing the run must reuse the existing artifacts bit for bit.
    run_ok(&config, "run-all");
    assert!(out.join("report.csv").exists());
    assert!(out.join("report.json").exists());
    assert_eq!(fs::read(out.join("generic.wlkw")).unwrap(), generic_bytes);
    assert_eq!(fs::read(&model).unwrap(), model_bytes);

    // Deleting derived artifacts and resuming reproduces them bit for bit
    // from the surviving upstream stages.
    let report = fs::read(out.join("report.csv")).unwrap();
    let verification = fs::read(out.join("verification.json")).unwrap();
    fs::remove_file(out.join("report.csv")).unwrap();
    fs::remove_file(out.join("report.json")).unwrap();
    fs::remove_file(out.join("verification.json")).unwrap();
    run_ok(&config, "run-all");
    assert_eq!(fs::read(out.join("report.csv")).unwrap(), report);
    assert_eq!(fs::read(out.join("verification.json")).unwrap(), verification);
}

#[test]
fn run_all_is_deterministic_and_seed_sensitive() {
    let dir = tempfile::tempdir().unwrap();
    let out_a = dir.path().join("a");
    let out_b = dir.path().join("b");
    let out_c = dir.path().join("c");
    let config = write_config(dir.path(), &mini_toml(&out_a));

    run_ok(&config, "run-all");
    let output = bin()
        .args(["--config"])
        .arg(&config)
        .args(["--output-dir"])
        .arg(&out_b)
        .arg("run-all")
        .output()
        .unwrap();
    assert!(output.status.success());

    for rel in [
        "report.csv",
        "report.json",
        "generic.wlkw",
        "gender-purity.json",
        "verification.json",
        "models/p2-003-s2.wlkw",
        "extractors/p1-to-p2-L02.wlkw",
        "embeddings/p2-to-p1-L03.json",
        "trials/p1-to-p2.txt",
    ] {
        let a = fs::read(out_a.join(rel)).unwrap();
        let b = fs::read(out_b.join(rel)).unwrap();
        assert_eq!(a, b, "artifact {rel} differs between identically seeded runs");
    }

    let output = bin()
        .args(["--config"])
        .arg(&config)
        .args(["--output-dir"])
        .arg(&out_c)
        .args(["--seed", "8"])
        .arg("run-all")
        .output()
        .unwrap();
    assert!(output.status.success());
    assert_ne!(
        fs::read(out_a.join("report.csv")).unwrap(),
        fs::read(out_c.join("report.csv")).unwrap(),
        "different master seeds must change the report"
    );
}

#[test]
fn report_has_one_row_per_layer_metric_direction() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let config = write_config(dir.path(), &mini_toml(&out));
    run_ok(&config, "run-all");

    let rows = report::read_csv(&out.join("report.csv")).unwrap();
    assert_eq!(rows.len(), 2 * 3 * 2, "2 layers x 3 metrics x 2 directions");
    let mut keys: Vec<(String, usize, String)> = rows
        .iter()
        .map(|r| (r.direction.clone(), r.layer, r.metric.as_str().to_string()))
        .collect();
    keys.sort();
    keys.dedup();
    assert_eq!(keys.len(), rows.len(), "duplicate (direction, layer, metric) row");

    for row in &rows {
        assert_eq!(row.experiment, "mini");
        assert_eq!(row.seed, 7);
        assert!([2, 3].contains(&row.layer));
        match row.metric.as_str() {
            "purity" => assert!((0.0..=1.0).contains(&row.value), "purity {}", row.value),
            _ => assert!((0.0..=100.0).contains(&row.value), "eer {}", row.value),
        }
    }

    let header = fs::read_to_string(out.join("report.csv")).unwrap();
    assert!(header.starts_with("experiment,layer,metric,direction,seed,value\n"));
}

#[test]
fn stage_failure_names_stage_and_artifact() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let config = write_config(dir.path(), &mini_toml(&out));
    run_ok(&config, "synth");

    fs::write(out.join("corpus.json"), b"{ not json").unwrap();
    let output = bin().args(["--config"]).arg(&config).arg("pretrain").output().unwrap();
    assert!(!output.status.success(), "corrupt corpus must fail the stage");
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("synth"), "stage name missing: {stderr}");
    assert!(stderr.contains("corpus.json"), "artifact path missing: {stderr}");
}
