//! `fit`: register a trained model to point clouds.
//!
//! Initialization uses landmark correspondence when `--landmarks` files are
//! given (one per cloud, paired with `model_landmarks.txt` next to the
//! model), otherwise a centroid/scale guess. Fitted surfaces are written as
//! PLY colored by point-to-cloud distance; with `grid.json` next to the
//! model they carry quad faces, otherwise they are bare vertex sets.
//!
//! `--sweep-levels` refits a local model at every `max_level` from 0 to J
//! and prints the accuracy/cost trade-off table.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::Args;
use nalgebra::Point3;
use rayon::prelude::*;
use serde::Serialize;
use shapespace::eval::{landmark_distance, surface_distance, SummaryStats};
use shapespace::fit::{
    centroid_scale_alignment, fit_global, fit_local, initial_alignment, FitConfig, FitResult,
};
use shapespace::geometry::io::{distance_color, load_cloud, save_cloud_with, save_mesh_with_field, SaveOptions};
use shapespace::model::{load_model, TrainedModel};
use shapespace::synth::eval_landmark_labels;
use shapespace::{LandmarkSet, PointCloud, QuadMesh, SubdivisionHierarchy};

use crate::config::{self, FileConfig, FitSection};
use crate::{commands, CliError, CliResult};

#[derive(Args)]
pub struct FitArgs {
    /// Trained model file (`model.bin`).
    #[arg(long, value_name = "FILE")]
    pub model: PathBuf,

    /// Target point cloud (PLY or OBJ); repeat to fit several targets.
    #[arg(long, value_name = "FILE", required = true)]
    pub cloud: Vec<PathBuf>,

    /// Target landmark file, one per cloud, for landmark initialization.
    #[arg(long, value_name = "FILE")]
    pub landmarks: Vec<PathBuf>,

    /// Output directory.
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,

    /// Robust truncation distance, target-frame mm.
    #[arg(long, value_name = "MM")]
    pub tau: Option<f64>,

    /// Hyper-box half-width in per-parameter standard deviations.
    #[arg(long, value_name = "C")]
    pub c: Option<f64>,

    /// Outer correspondence iterations (global fits).
    #[arg(long, value_name = "N")]
    pub max_iterations: Option<usize>,

    /// Lattice samples per parameter component (local fits).
    #[arg(long, value_name = "N")]
    pub samples_per_parameter: Option<usize>,

    /// Deepest detail level swept by local fits.
    #[arg(long, value_name = "L", conflicts_with = "sweep_levels")]
    pub max_level: Option<usize>,

    /// Convergence tolerance on relative energy improvement.
    #[arg(long, value_name = "TOL")]
    pub tolerance: Option<f64>,

    /// Fit a local model at every max_level from 0 to J and print the
    /// accuracy/cost trade-off.
    #[arg(long)]
    pub sweep_levels: bool,
}

#[derive(Serialize)]
struct Resolved {
    command: &'static str,
    model: String,
    clouds: Vec<String>,
    landmarks: Vec<String>,
    out: String,
    sweep_levels: bool,
    fit: FitSection,
}

#[derive(Serialize)]
struct Report {
    command: &'static str,
    model_kind: &'static str,
    vertices: usize,
    parameters: usize,
    fits: BTreeMap<String, CloudFit>,
}

#[derive(Serialize)]
struct CloudFit {
    cloud: String,
    points: usize,
    initial_energy: f64,
    final_energy: f64,
    iterations: usize,
    converged: bool,
    nn_queries: u64,
    energy_evaluations: u64,
    surface_error_mm: SummaryStats,
    #[serde(skip_serializing_if = "Option::is_none")]
    landmark_errors_mm: Option<BTreeMap<String, f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    per_level: Option<Vec<LevelFit>>,
}

#[derive(Serialize, Clone, Copy)]
struct LevelFit {
    max_level: usize,
    coefficients: usize,
    final_energy: f64,
    energy_evaluations: u64,
    surface_rms_mm: f64,
}

/// One sweep entry: summary plus the data needed to write its PLY.
struct SweptLevel {
    summary: LevelFit,
    fitted: Vec<Point3<f64>>,
    distances: Vec<f64>,
    seconds: f64,
}

/// Everything produced for one cloud, kept until the sequential write pass.
struct Outcome {
    stem: String,
    cloud_path: PathBuf,
    points: usize,
    result: FitResult,
    distances: Vec<f64>,
    landmark_errors: Option<BTreeMap<String, f64>>,
    levels: Vec<SweptLevel>,
}

pub fn run(args: FitArgs, file: &FileConfig) -> CliResult<()> {
    let mut fit_config = FitConfig::default();
    if let Some(section) = &file.fit {
        section.apply(&mut fit_config);
    }
    let flags = FitSection {
        tau: args.tau,
        c: args.c,
        max_iterations: args.max_iterations,
        samples_per_parameter: args.samples_per_parameter,
        max_level: args.max_level,
        tolerance: args.tolerance,
    };
    flags.apply(&mut fit_config);
    fit_config.validate()?;

    if !args.landmarks.is_empty() && args.landmarks.len() != args.cloud.len() {
        return Err(CliError::Validation(format!(
            "{} --landmarks files for {} clouds; give one per cloud or none",
            args.landmarks.len(),
            args.cloud.len()
        )));
    }

    let model = commands::with_path(load_model(&args.model), &args.model)?;
    let model_dir = args.model.parent().unwrap_or(Path::new("."));
    let grid = load_grid(model_dir, model.as_shape_model().vertex_count())?;
    let model_landmarks = load_model_landmarks(model_dir)?;
    let landmark_ids = load_landmark_ids(model_dir)?;

    if args.sweep_levels && matches!(model, TrainedModel::Global(_)) {
        return Err(CliError::Validation(
            "--sweep-levels only applies to local models".into(),
        ));
    }

    // One task per cloud; rayon bounds them by --jobs.
    let tasks: Vec<(usize, &PathBuf)> = args.cloud.iter().enumerate().collect();
    let outcomes: Vec<CliResult<Outcome>> = tasks
        .par_iter()
        .map(|&(i, cloud_path)| {
            fit_one_cloud(
                i,
                cloud_path,
                &args,
                &model,
                &fit_config,
                model_landmarks.as_ref(),
                landmark_ids.as_deref(),
            )
        })
        .collect();
    let mut outcomes = outcomes.into_iter().collect::<CliResult<Vec<_>>>()?;
    disambiguate_stems(&mut outcomes);

    commands::ensure_out_dir(&args.out)?;
    let mut fits = BTreeMap::new();
    for outcome in &outcomes {
        write_fit_outputs(&args.out, outcome, grid.as_ref())?;
        fits.insert(outcome.stem.clone(), outcome.to_report_entry());
    }
    let report = Report {
        command: "fit",
        model_kind: match model {
            TrainedModel::Global(_) => "global",
            TrainedModel::Local(_) => "local",
        },
        vertices: model.as_shape_model().vertex_count(),
        parameters: model.as_shape_model().parameter_count(),
        fits,
    };
    config::write_json(&args.out.join("report.json"), &report)?;
    config::write_resolved(
        &args.out,
        &Resolved {
            command: "fit",
            model: commands::display_path(&args.model),
            clouds: args.cloud.iter().map(|p| commands::display_path(p)).collect(),
            landmarks: args.landmarks.iter().map(|p| commands::display_path(p)).collect(),
            out: commands::display_path(&args.out),
            sweep_levels: args.sweep_levels,
            fit: FitSection::resolved(&fit_config),
        },
    )?;

    print_summary(&report, &outcomes, &args);
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn fit_one_cloud(
    index: usize,
    cloud_path: &Path,
    args: &FitArgs,
    model: &TrainedModel,
    fit_config: &FitConfig,
    model_landmarks: Option<&LandmarkSet>,
    landmark_ids: Option<&[(String, usize)]>,
) -> CliResult<Outcome> {
    let cloud = commands::with_path(load_cloud(cloud_path), cloud_path)?;
    let target_landmarks = match args.landmarks.get(index) {
        Some(path) => Some(commands::with_path(LandmarkSet::load(path), path)?),
        None => None,
    };

    let init = match &target_landmarks {
        Some(target) => {
            let Some(source) = model_landmarks else {
                return Err(CliError::Validation(format!(
                    "--landmarks given but {} has no {} sidecar",
                    args.model.display(),
                    crate::commands::train::MODEL_LANDMARKS_FILE
                )));
            };
            initial_alignment(source, target)?
        }
        None => centroid_scale_alignment(model.as_shape_model().mean(), &cloud.points)?,
    };

    let run_fit = |config: &FitConfig| -> CliResult<FitResult> {
        Ok(match model {
            TrainedModel::Global(m) => fit_global(m, &cloud, &init, config)?,
            TrainedModel::Local(m) => fit_local(m, &cloud, &init, config)?,
        })
    };

    let mut levels = Vec::new();
    let result = if args.sweep_levels {
        let TrainedModel::Local(local) = model else {
            unreachable!("sweep mode is rejected for global models upfront");
        };
        let hierarchy = local.hierarchy();
        let mut deepest = None;
        for level in 0..=hierarchy.levels() {
            let config = FitConfig {
                max_level: Some(level),
                ..fit_config.clone()
            };
            let result = run_fit(&config)?;
            let distances = surface_distance(&result.fitted, &cloud)?;
            let rms = (distances.iter().map(|d| d * d).sum::<f64>() / distances.len() as f64).sqrt();
            levels.push(SweptLevel {
                summary: LevelFit {
                    max_level: level,
                    coefficients: hierarchy.coefficients_up_to(level),
                    final_energy: result.final_energy(),
                    energy_evaluations: result.energy_evaluations,
                    surface_rms_mm: rms,
                },
                fitted: result.fitted.clone(),
                distances,
                seconds: result.elapsed.as_secs_f64(),
            });
            deepest = Some(result);
        }
        deepest.expect("levels() + 1 >= 1 sweep iterations")
    } else {
        run_fit(fit_config)?
    };

    let distances = surface_distance(&result.fitted, &cloud)?;
    let landmark_errors = match (&target_landmarks, landmark_ids) {
        (Some(target), Some(ids)) => landmark_errors_mm(&result.fitted, ids, target)?,
        _ => None,
    };

    let stem = cloud_path
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("cloud")
        .to_string();
    Ok(Outcome {
        stem,
        cloud_path: cloud_path.to_path_buf(),
        points: cloud.len(),
        result,
        distances,
        landmark_errors,
        levels,
    })
}

/// Errors at the evaluation landmarks, when the target names any of them.
fn landmark_errors_mm(
    fitted: &[Point3<f64>],
    ids: &[(String, usize)],
    target: &LandmarkSet,
) -> CliResult<Option<BTreeMap<String, f64>>> {
    let eval: Vec<(String, usize)> = ids
        .iter()
        .filter(|(label, _)| {
            eval_landmark_labels().contains(&label.as_str()) && target.get(label).is_some()
        })
        .cloned()
        .collect();
    if eval.is_empty() {
        return Ok(None);
    }
    let errors = landmark_distance(fitted, &eval, target)?;
    Ok(Some(errors.into_iter().collect()))
}

impl Outcome {
    fn to_report_entry(&self) -> CloudFit {
        CloudFit {
            cloud: self.cloud_path.display().to_string(),
            points: self.points,
            initial_energy: self.result.energy_trace[0],
            final_energy: self.result.final_energy(),
            iterations: self.result.iterations,
            converged: self.result.converged,
            nn_queries: self.result.nn_queries,
            energy_evaluations: self.result.energy_evaluations,
            surface_error_mm: SummaryStats::of(&self.distances)
                .expect("fit output is never empty"),
            landmark_errors_mm: self.landmark_errors.clone(),
            per_level: if self.levels.is_empty() {
                None
            } else {
                Some(self.levels.iter().map(|l| l.summary).collect())
            },
        }
    }
}

/// Append `_2`, `_3`, ... to repeated cloud stems so outputs never collide.
fn disambiguate_stems(outcomes: &mut [Outcome]) {
    let mut seen: BTreeMap<String, usize> = BTreeMap::new();
    for outcome in outcomes.iter_mut() {
        let count = seen.entry(outcome.stem.clone()).or_insert(0);
        *count += 1;
        if *count > 1 {
            outcome.stem = format!("{}_{}", outcome.stem, count);
        }
    }
}

fn write_fit_outputs(
    out: &Path,
    outcome: &Outcome,
    grid: Option<&SubdivisionHierarchy>,
) -> CliResult<()> {
    write_surface(
        &out.join(format!("fit_{}.ply", outcome.stem)),
        &outcome.result.fitted,
        &outcome.distances,
        grid,
    )?;
    for level in &outcome.levels {
        write_surface(
            &out.join(format!(
                "fit_{}_level{}.ply",
                outcome.stem, level.summary.max_level
            )),
            &level.fitted,
            &level.distances,
            grid,
        )?;
    }
    Ok(())
}

/// Distance-colored PLY: quads when the grid layout is known.
fn write_surface(
    path: &Path,
    vertices: &[Point3<f64>],
    distances: &[f64],
    grid: Option<&SubdivisionHierarchy>,
) -> CliResult<()> {
    match grid {
        Some(h) => {
            let (rows, cols) = h.finest_dims();
            let mesh = QuadMesh::from_grid(rows, cols, vertices.to_vec())?;
            save_mesh_with_field(path, &mesh, distances)?;
        }
        None => {
            let colors: Vec<[u8; 3]> = distances.iter().map(|&d| distance_color(d)).collect();
            let cloud = PointCloud::new(vertices.to_vec())?;
            save_cloud_with(
                path,
                &cloud,
                SaveOptions {
                    ascii: false,
                    vertex_colors: Some(&colors),
                },
            )?;
        }
    }
    Ok(())
}

/// `grid.json` sidecar, if present and consistent with the model.
fn load_grid(model_dir: &Path, vertex_count: usize) -> CliResult<Option<SubdivisionHierarchy>> {
    let path = model_dir.join(crate::commands::train::GRID_FILE);
    if !path.exists() {
        return Ok(None);
    }
    let text = std::fs::read_to_string(&path)
        .map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))?;
    let hierarchy: SubdivisionHierarchy = serde_json::from_str(&text)
        .map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))?;
    if hierarchy.vertex_count() != vertex_count {
        return Err(CliError::Runtime(format!(
            "{}: grid has {} vertices, model has {}",
            path.display(),
            hierarchy.vertex_count(),
            vertex_count
        )));
    }
    Ok(Some(hierarchy))
}

fn load_model_landmarks(model_dir: &Path) -> CliResult<Option<LandmarkSet>> {
    let path = model_dir.join(crate::commands::train::MODEL_LANDMARKS_FILE);
    if !path.exists() {
        return Ok(None);
    }
    Ok(Some(commands::with_path(LandmarkSet::load(&path), &path)?))
}

fn load_landmark_ids(model_dir: &Path) -> CliResult<Option<Vec<(String, usize)>>> {
    let path = model_dir.join(crate::commands::train::LANDMARK_IDS_FILE);
    if !path.exists() {
        return Ok(None);
    }
    let text = std::fs::read_to_string(&path)
        .map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))?;
    let map: BTreeMap<String, usize> = serde_json::from_str(&text)
        .map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))?;
    Ok(Some(map.into_iter().collect()))
}

fn print_summary(report: &Report, outcomes: &[Outcome], args: &FitArgs) {
    println!(
        "fit {} model ({} vertices, {} parameters) to {} cloud{}",
        report.model_kind,
        report.vertices,
        report.parameters,
        outcomes.len(),
        if outcomes.len() == 1 { "" } else { "s" },
    );
    println!("{:<20} {:>8} {:>14} {:>14} {:>12} {:>10}", "cloud", "points", "E_initial", "E_final", "rms_mm", "median_mm");
    for outcome in outcomes {
        let entry = report.fits.get(&outcome.stem).expect("every outcome is reported");
        let rms = (outcome.distances.iter().map(|d| d * d).sum::<f64>()
            / outcome.distances.len() as f64)
            .sqrt();
        println!(
            "{:<20} {:>8} {:>14.4} {:>14.4} {:>12.4} {:>10.4}",
            outcome.stem,
            entry.points,
            entry.initial_energy,
            entry.final_energy,
            rms,
            entry.surface_error_mm.median,
        );
    }
    if args.sweep_levels {
        for outcome in outcomes {
            println!("\nlevel sweep for {}:", outcome.stem);
            println!(
                "{:>9} {:>13} {:>13} {:>14} {:>9} {:>9}",
                "max_level", "coefficients", "energy_evals", "final_energy", "rms_mm", "seconds"
            );
            for level in &outcome.levels {
                println!(
                    "{:>9} {:>13} {:>13} {:>14.4} {:>9.4} {:>9.2}",
                    level.summary.max_level,
                    level.summary.coefficients,
                    level.summary.energy_evaluations,
                    level.summary.final_energy,
                    level.summary.surface_rms_mm,
                    level.seconds
                );
            }
        }
    }
    println!("outputs in {}", args.out.display());
}
