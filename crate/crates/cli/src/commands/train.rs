//! `train`: align a corpus with GPA and train a shape model.
//!
//! Writes `model.bin` plus three sidecars next to it: `model_landmarks.txt`
//! (initialization landmarks at the Procrustes-mean vertices, model frame),
//! `landmark_ids.json` (label -> vertex id, used for landmark error
//! reporting), and `grid.json` (the quad-grid layout, so fits can export
//! meshes rather than bare clouds).

use std::collections::BTreeMap;
use std::path::PathBuf;

use clap::Args;
use serde::Serialize;
use shapespace::align::gpa;
use shapespace::model::{save_model, train_global, train_local, TrainedModel};
use shapespace::synth::{init_landmark_labels, landmark_vertex_ids};
use shapespace::{LandmarkSet, ShapeModel, TrainingSet};

use crate::config::{self, FileConfig, TrainSection};
use crate::manifest::Manifest;
use crate::{commands, CliError, CliResult};

pub const MODEL_FILE: &str = "model.bin";
pub const MODEL_LANDMARKS_FILE: &str = "model_landmarks.txt";
pub const LANDMARK_IDS_FILE: &str = "landmark_ids.json";
pub const GRID_FILE: &str = "grid.json";

#[derive(Args)]
pub struct TrainArgs {
    /// Corpus directory written by `synth`.
    #[arg(long, value_name = "DIR")]
    pub corpus_dir: PathBuf,

    /// Output directory for the model and its sidecars.
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,

    /// Model family: "global" or "local".
    #[arg(long, value_name = "KIND")]
    pub model: Option<String>,

    /// Retained modes d (global only; default 30, clamped to the corpus
    /// rank bound).
    #[arg(long, value_name = "D")]
    pub modes: Option<usize>,

    #[arg(long, value_name = "N")]
    pub gpa_iterations: Option<usize>,

    #[arg(long, value_name = "TOL")]
    pub gpa_tolerance: Option<f64>,
}

#[derive(Serialize)]
struct Resolved {
    command: &'static str,
    corpus_dir: String,
    out: String,
    train: TrainSection,
}

#[derive(Serialize)]
struct Report {
    command: &'static str,
    model: String,
    shapes: usize,
    vertices: usize,
    /// Global: retained modes. Local: coefficient count (3 parameters each).
    parameters: usize,
    gpa_iterations: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    compactness: Option<Vec<f64>>,
    files: BTreeMap<String, String>,
}

pub fn run(args: TrainArgs, file: &FileConfig) -> CliResult<()> {
    let section = file.train.clone().unwrap_or_default();
    let kind = args
        .model
        .or(section.model)
        .unwrap_or_else(|| "global".to_string());
    if kind != "global" && kind != "local" {
        return Err(CliError::Validation(format!(
            "model must be \"global\" or \"local\", got {kind:?}"
        )));
    }
    let gpa_iterations = args.gpa_iterations.or(section.gpa_iterations).unwrap_or(100);
    let gpa_tolerance = args.gpa_tolerance.or(section.gpa_tolerance).unwrap_or(1e-10);

    let manifest = Manifest::load(&args.corpus_dir)?;
    let hierarchy = manifest.hierarchy()?;
    let (shapes, _) = manifest.load_shapes(&args.corpus_dir)?;

    let aligned = gpa(&shapes, gpa_iterations, gpa_tolerance)?;
    let data = TrainingSet::new_aligned(aligned.aligned.clone()).with_labels(manifest.labels())?;

    // Default d = 30, clamped so small corpora keep working; an explicit
    // request is passed through and may fail validation.
    let explicit_modes = args.modes.or(section.modes);
    let modes = explicit_modes
        .unwrap_or_else(|| config::default_modes(data.vertex_count(), data.len()));

    commands::ensure_out_dir(&args.out)?;
    let (model, parameters, compactness): (TrainedModel, usize, Option<Vec<f64>>) =
        if kind == "global" {
            let m = train_global(&data, Some(modes))?;
            let curve = shapespace::eval::compactness_curve(&m);
            let p = m.parameter_count();
            (m.into(), p, Some(curve))
        } else {
            let m = train_local(&data, &hierarchy)?;
            let p = m.parameter_count() / 3;
            (m.into(), p, None)
        };
    save_model(args.out.join(MODEL_FILE), &model)?;

    // Initialization landmarks live on the Procrustes mean, in model frame.
    let ids = landmark_vertex_ids(&hierarchy);
    let mut init_lms = LandmarkSet::new();
    for (label, id) in &ids {
        if init_landmark_labels().contains(&label.as_str()) {
            init_lms.insert(label, Some(aligned.mean[*id]))?;
        }
    }
    init_lms.save(args.out.join(MODEL_LANDMARKS_FILE))?;
    let id_map: BTreeMap<String, usize> = ids.into_iter().collect();
    config::write_json(&args.out.join(LANDMARK_IDS_FILE), &id_map)?;
    config::write_json(&args.out.join(GRID_FILE), &hierarchy)?;

    config::write_resolved(
        &args.out,
        &Resolved {
            command: "train",
            corpus_dir: commands::display_path(&args.corpus_dir),
            out: commands::display_path(&args.out),
            train: TrainSection {
                model: Some(kind.clone()),
                modes: if kind == "global" { Some(modes) } else { None },
                gpa_iterations: Some(gpa_iterations),
                gpa_tolerance: Some(gpa_tolerance),
            },
        },
    )?;

    let files: BTreeMap<String, String> = [
        ("model", MODEL_FILE),
        ("model_landmarks", MODEL_LANDMARKS_FILE),
        ("landmark_ids", LANDMARK_IDS_FILE),
        ("grid", GRID_FILE),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), v.to_string()))
    .collect();
    let report = Report {
        command: "train",
        model: kind.clone(),
        shapes: data.len(),
        vertices: data.vertex_count(),
        parameters,
        gpa_iterations: aligned.iterations,
        compactness: compactness.clone(),
        files,
    };
    config::write_json(&args.out.join("report.json"), &report)?;

    println!(
        "trained {kind} model: {} shapes, {} vertices, {} {}",
        report.shapes,
        report.vertices,
        parameters,
        if kind == "global" { "modes" } else { "coefficients" },
    );
    if let Some(curve) = &compactness {
        let shown: Vec<String> = curve.iter().take(8).map(|c| format!("{c:.4}")).collect();
        println!("  compactness: {}{}", shown.join(" "), if curve.len() > 8 { " ..." } else { "" });
    }
    println!("  model: {}", args.out.join(MODEL_FILE).display());
    Ok(())
}
