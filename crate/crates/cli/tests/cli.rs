//! End-to-end checks of the `shapespace` binary: exit codes, the documented
//! subcommand examples, and byte-level reproducibility of the JSON reports.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use nalgebra::Point3;
use shapespace::fit::centroid_scale_alignment;
use shapespace::geometry::io::load_mesh;
use shapespace::model::load_model;
use shapespace::ShapeModel;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_shapespace"))
}

fn run(cmd: &mut Command) -> Output {
    cmd.output().expect("binary runs")
}

fn assert_code(output: &Output, expected: i32, context: &str) {
    assert_eq!(
        output.status.code(),
        Some(expected),
        "{context}\nstdout:\n{}\nstderr:\n{}",
        String::from_utf8_lossy(&output.stdout),
        String::from_utf8_lossy(&output.stderr),
    );
}

fn write_config(dir: &Path, text: &str) -> PathBuf {
    let path = dir.join("config.json");
    std::fs::write(&path, text).unwrap();
    path
}

/// Small corpus + triad evaluation config shared by several tests.
const SMALL_CONFIG: &str = r#"{
  "synth": { "levels": 1, "count": 12, "seed": 42 },
  "evaluate": { "specificity_samples": 50, "seed": 7 }
}"#;

fn synth_corpus(dir: &Path, config: &Path) -> PathBuf {
    let corpus = dir.join("corpus");
    let out = run(bin()
        .arg("synth")
        .arg("--config")
        .arg(config)
        .arg("--out")
        .arg(&corpus));
    assert_code(&out, 0, "synth");
    corpus
}

#[test]
fn unknown_config_key_is_named_and_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), r#"{ "synth": { "speling_mistake": 3 } }"#);
    let out = run(bin()
        .arg("synth")
        .arg("--config")
        .arg(&config)
        .arg("--out")
        .arg(dir.path().join("corpus")));
    assert_code(&out, 1, "unknown config key");
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(
        stderr.contains("speling_mistake"),
        "error must name the key: {stderr}"
    );
}

#[test]
fn missing_input_file_exits_2_with_the_path() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(bin()
        .arg("fit")
        .arg("--model")
        .arg(dir.path().join("nope.bin"))
        .arg("--cloud")
        .arg(dir.path().join("nope.ply"))
        .arg("--out")
        .arg(dir.path().join("out")));
    assert_code(&out, 2, "missing model file");
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("nope.bin"), "path in message: {stderr}");
}

#[test]
fn roundtrip_reports_tiny_error_and_exits_0() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), SMALL_CONFIG);
    let corpus = synth_corpus(dir.path(), &config);

    // On a grid mesh from disk (J inferred), and on the built-in patch.
    let out = run(bin()
        .arg("roundtrip")
        .arg("--mesh")
        .arg(corpus.join("shape_000.ply")));
    assert_code(&out, 0, "roundtrip on a corpus mesh");
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("ok"), "reports success: {stdout}");

    let out = run(bin().arg("roundtrip").arg("--levels").arg("3"));
    assert_code(&out, 0, "roundtrip on the built-in patch");
}

#[test]
fn fit_with_c_zero_returns_the_mean_mesh() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), SMALL_CONFIG);
    let corpus = synth_corpus(dir.path(), &config);

    let model_dir = dir.path().join("model");
    let out = run(bin()
        .arg("train")
        .arg("--corpus-dir")
        .arg(&corpus)
        .arg("--out")
        .arg(&model_dir)
        .arg("--model")
        .arg("global"));
    assert_code(&out, 0, "train global");

    let fit_dir = dir.path().join("fit");
    let out = run(bin()
        .arg("fit")
        .arg("--model")
        .arg(model_dir.join("model.bin"))
        .arg("--cloud")
        .arg(corpus.join("shape_003.ply"))
        .arg("--out")
        .arg(&fit_dir)
        .arg("--c")
        .arg("0"));
    assert_code(&out, 0, "fit with c = 0");

    let model = load_model(model_dir.join("model.bin")).unwrap();
    let model = model.as_global().unwrap();
    let cloud: Vec<Point3<f64>> = load_mesh(corpus.join("shape_003.ply"))
        .unwrap()
        .vertices()
        .to_vec();
    let init = centroid_scale_alignment(model.mean(), &cloud).unwrap();
    let expected = init.apply_all(model.mean());

    let fitted = load_mesh(fit_dir.join("fit_shape_003.ply")).unwrap();
    assert_eq!(fitted.vertices().len(), expected.len());
    for (a, b) in fitted.vertices().iter().zip(&expected) {
        // Binary PLY stores doubles, so the mean must round-trip exactly.
        assert_eq!(a, b, "c = 0 must return the transformed mean verbatim");
    }
}

#[test]
fn identical_config_and_seed_reproduce_reports_byte_for_byte() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), SMALL_CONFIG);
    let corpus = synth_corpus(dir.path(), &config);

    let run_eval = |out_dir: &Path| {
        let out = run(bin()
            .arg("evaluate")
            .arg("--config")
            .arg(&config)
            .arg("--corpus-dir")
            .arg(&corpus)
            .arg("--out")
            .arg(out_dir));
        assert_code(&out, 0, "evaluate");
    };
    let a = dir.path().join("eval_a");
    let b = dir.path().join("eval_b");
    run_eval(&a);
    run_eval(&b);

    let report_a = std::fs::read(a.join("report.json")).unwrap();
    let report_b = std::fs::read(b.join("report.json")).unwrap();
    assert_eq!(report_a, report_b, "report.json must be byte-identical");
    let curves_a = std::fs::read(a.join("curves.csv")).unwrap();
    let curves_b = std::fs::read(b.join("curves.csv")).unwrap();
    assert_eq!(curves_a, curves_b, "curves.csv must be byte-identical");
}

/// Full pipeline against the committed golden outputs. The golden files were
/// produced by the first verified run of this exact configuration and pin
/// every numeric path: synthesis, GPA, both trainings, the triad, and
/// 10-fold cross-validation fits.
#[test]
fn reference_pipeline_matches_the_committed_golden_report() {
    let golden_dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden");
    let dir = tempfile::tempdir().unwrap();
    let config = golden_dir.join("config.json");

    let corpus = dir.path().join("corpus");
    let out = run(bin()
        .arg("synth")
        .arg("--config")
        .arg(&config)
        .arg("--out")
        .arg(&corpus));
    assert_code(&out, 0, "golden synth");

    let eval_dir = dir.path().join("eval");
    let out = run(bin()
        .arg("evaluate")
        .arg("--config")
        .arg(&config)
        .arg("--corpus-dir")
        .arg(&corpus)
        .arg("--out")
        .arg(&eval_dir));
    assert_code(&out, 0, "golden evaluate");

    let got = std::fs::read(eval_dir.join("report.json")).unwrap();
    let want = std::fs::read(golden_dir.join("report.json")).unwrap();
    assert_eq!(
        got, want,
        "report.json deviates from the committed golden output"
    );
    let got = std::fs::read(eval_dir.join("curves.csv")).unwrap();
    let want = std::fs::read(golden_dir.join("curves.csv")).unwrap();
    assert_eq!(
        got, want,
        "curves.csv deviates from the committed golden output"
    );
}

#[test]
fn level_sweep_prints_the_trade_off_table() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), SMALL_CONFIG);
    let corpus = synth_corpus(dir.path(), &config);

    let model_dir = dir.path().join("model");
    let out = run(bin()
        .arg("train")
        .arg("--corpus-dir")
        .arg(&corpus)
        .arg("--out")
        .arg(&model_dir)
        .arg("--model")
        .arg("local"));
    assert_code(&out, 0, "train local");

    let fit_dir = dir.path().join("fit");
    let out = run(bin()
        .arg("fit")
        .arg("--model")
        .arg(model_dir.join("model.bin"))
        .arg("--cloud")
        .arg(corpus.join("shape_000.ply"))
        .arg("--out")
        .arg(&fit_dir)
        .arg("--sweep-levels")
        .arg("--samples-per-parameter")
        .arg("9"));
    assert_code(&out, 0, "sweep fit");
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("max_level"), "table header: {stdout}");
    // J = 1 corpus: levels 0 and 1 both fitted and written.
    assert!(fit_dir.join("fit_shape_000_level0.ply").exists());
    assert!(fit_dir.join("fit_shape_000_level1.ply").exists());
    assert!(fit_dir.join("report.json").exists());
    assert!(fit_dir.join("resolved_config.json").exists());
}
