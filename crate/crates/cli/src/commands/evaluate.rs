//! `evaluate`: score a corpus with the compactness / generalization /
//! specificity triad and, on request, 10-fold cross-validation.
//!
//! The corpus is aligned with GPA, both model families are trained on the
//! aligned set, and every measure lands in `report.json`; the curves
//! (compactness per mode count, cumulative cross-validation error) also go
//! to `curves.csv` in long format (`curve,x,y`).

use std::collections::BTreeMap;
use std::io::Write;
use std::path::PathBuf;

use clap::Args;
use serde::Serialize;
use shapespace::align::gpa;
use shapespace::eval::{
    compactness_curve, cross_validate_10fold, generalization_global, generalization_local,
    specificity_global, specificity_local, CrossValidation, CurvePoint, CvModel,
    EvaluationReport,
};
use shapespace::fit::FitConfig;
use shapespace::model::{train_global, train_local};
use shapespace::TrainingSet;

use crate::config::{self, EvaluateSection, FileConfig, FitSection};
use crate::manifest::Manifest;
use crate::{commands, CliError, CliResult};

#[derive(Args)]
pub struct EvaluateArgs {
    /// Corpus directory written by `synth`.
    #[arg(long, value_name = "DIR")]
    pub corpus_dir: PathBuf,

    /// Output directory.
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,

    /// Which families to score: "global", "local", or "both".
    #[arg(long, value_name = "KIND")]
    pub models: Option<String>,

    /// Retained modes d for the global model (default 30, clamped).
    #[arg(long, value_name = "D")]
    pub modes: Option<usize>,

    /// Random samples per specificity estimate.
    #[arg(long, value_name = "N")]
    pub specificity_samples: Option<usize>,

    /// Seed for specificity sampling and fold assignment.
    #[arg(long, value_name = "SEED")]
    pub seed: Option<u64>,

    /// Run 10-fold cross-validation (fit hyperparameters come from the
    /// `fit` config section).
    #[arg(long)]
    pub cross_validate: bool,
}

#[derive(Serialize)]
struct Resolved {
    command: &'static str,
    corpus_dir: String,
    out: String,
    evaluate: EvaluateSection,
    #[serde(skip_serializing_if = "Option::is_none")]
    fit: Option<FitSection>,
}

#[derive(Serialize)]
struct Report {
    command: &'static str,
    shapes: usize,
    vertices: usize,
    models: BTreeMap<String, EvaluationReport>,
}

pub fn run(args: EvaluateArgs, file: &FileConfig) -> CliResult<()> {
    let section = file.evaluate.clone().unwrap_or_default();
    let models = args
        .models
        .or(section.models)
        .unwrap_or_else(|| "both".to_string());
    let (do_global, do_local) = match models.as_str() {
        "global" => (true, false),
        "local" => (false, true),
        "both" => (true, true),
        other => {
            return Err(CliError::Validation(format!(
                "models must be \"global\", \"local\", or \"both\", got {other:?}"
            )))
        }
    };
    let specificity_samples = args
        .specificity_samples
        .or(section.specificity_samples)
        .unwrap_or(1000);
    let seed = args.seed.or(section.seed).unwrap_or(42);
    let cross_validate = args.cross_validate || section.cross_validate.unwrap_or(false);

    let mut fit_config = FitConfig::default();
    if let Some(fit_section) = &file.fit {
        fit_section.apply(&mut fit_config);
    }
    fit_config.validate()?;

    let manifest = Manifest::load(&args.corpus_dir)?;
    let hierarchy = manifest.hierarchy()?;
    let (shapes, _) = manifest.load_shapes(&args.corpus_dir)?;
    let aligned = gpa(&shapes, 100, 1e-10)?;
    let data = TrainingSet::new_aligned(aligned.aligned.clone()).with_labels(manifest.labels())?;

    let explicit_modes = args.modes.or(section.modes);
    let modes =
        explicit_modes.unwrap_or_else(|| config::default_modes(data.vertex_count(), data.len()));

    let mut reports: BTreeMap<String, EvaluationReport> = BTreeMap::new();
    if do_global {
        let model = train_global(&data, Some(modes))?;
        let mut report = EvaluationReport {
            compactness_curve: Some(compactness_curve(&model)),
            generalization_mm: Some(generalization_global(&data, Some(modes))?),
            specificity_mm: Some(specificity_global(&model, &data, specificity_samples, seed)?),
            ..EvaluationReport::default()
        };
        if cross_validate {
            let cv = cross_validate_10fold(
                &data,
                &CvModel::Global { modes: Some(modes) },
                &fit_config,
                seed,
            )?;
            fill_cv(&mut report, &cv);
        }
        reports.insert("global".to_string(), report);
    }
    if do_local {
        let model = train_local(&data, &hierarchy)?;
        let mut report = EvaluationReport {
            generalization_mm: Some(generalization_local(&data, &hierarchy)?),
            specificity_mm: Some(specificity_local(&model, &data, specificity_samples, seed)?),
            ..EvaluationReport::default()
        };
        if cross_validate {
            let cv =
                cross_validate_10fold(&data, &CvModel::Local { hierarchy }, &fit_config, seed)?;
            fill_cv(&mut report, &cv);
        }
        reports.insert("local".to_string(), report);
    }

    commands::ensure_out_dir(&args.out)?;
    let report = Report {
        command: "evaluate",
        shapes: data.len(),
        vertices: data.vertex_count(),
        models: reports,
    };
    config::write_json(&args.out.join("report.json"), &report)?;
    write_curves(&args.out, &report)?;
    config::write_resolved(
        &args.out,
        &Resolved {
            command: "evaluate",
            corpus_dir: commands::display_path(&args.corpus_dir),
            out: commands::display_path(&args.out),
            evaluate: EvaluateSection {
                models: Some(models),
                modes: Some(modes),
                specificity_samples: Some(specificity_samples),
                seed: Some(seed),
                cross_validate: Some(cross_validate),
            },
            fit: cross_validate.then(|| FitSection::resolved(&fit_config)),
        },
    )?;

    print_summary(&report);
    println!("outputs in {}", args.out.display());
    Ok(())
}

fn fill_cv(report: &mut EvaluationReport, cv: &CrossValidation) {
    report.cross_validation_per_shape_mm = Some(cv.per_shape_mean_mm.clone());
    report.cross_validation_stats_mm = Some(cv.pooled);
    report.cumulative_error_curve = Some(CurvePoint::from_pairs(&cv.curve));
}

/// Long-format curve export: one `curve,x,y` row per point.
fn write_curves(out: &std::path::Path, report: &Report) -> CliResult<()> {
    let path = out.join("curves.csv");
    let mut text = String::from("curve,x,y\n");
    for (name, model) in &report.models {
        if let Some(curve) = &model.compactness_curve {
            for (i, value) in curve.iter().enumerate() {
                text += &format!("compactness_{name},{},{value}\n", i + 1);
            }
        }
        if let Some(curve) = &model.cumulative_error_curve {
            for point in curve {
                text += &format!(
                    "cross_validation_{name},{},{}\n",
                    point.threshold_mm, point.fraction
                );
            }
        }
    }
    let mut file = std::fs::File::create(&path)
        .map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))?;
    file.write_all(text.as_bytes())
        .map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))?;
    Ok(())
}

fn print_summary(report: &Report) {
    println!(
        "evaluated {} shapes, {} vertices",
        report.shapes, report.vertices
    );
    println!("{:<28} {:>16} {:>16}", "measure", "global", "local");
    let fetch = |name: &str| report.models.get(name);
    let fmt_meanstd = |m: Option<&EvaluationReport>,
                       f: fn(&EvaluationReport) -> Option<String>| {
        m.and_then(f).unwrap_or_else(|| "-".to_string())
    };
    let gen = |r: &EvaluationReport| {
        r.generalization_mm
            .as_ref()
            .map(|m| format!("{:.4}±{:.4}", m.mean, m.stddev))
    };
    let spec = |r: &EvaluationReport| {
        r.specificity_mm
            .as_ref()
            .map(|m| format!("{:.4}±{:.4}", m.mean, m.stddev))
    };
    let compact = |r: &EvaluationReport| {
        r.compactness_curve.as_ref().map(|c| {
            let k = c.len().min(5);
            format!("C({k})={:.4}", c[k - 1])
        })
    };
    let cv = |r: &EvaluationReport| {
        r.cross_validation_stats_mm
            .as_ref()
            .map(|s| format!("{:.4}/{:.4}", s.mean, s.median))
    };
    println!(
        "{:<28} {:>16} {:>16}",
        "compactness",
        fmt_meanstd(fetch("global"), compact),
        fmt_meanstd(fetch("local"), compact)
    );
    println!(
        "{:<28} {:>16} {:>16}",
        "generalization mm",
        fmt_meanstd(fetch("global"), gen),
        fmt_meanstd(fetch("local"), gen)
    );
    println!(
        "{:<28} {:>16} {:>16}",
        "specificity mm",
        fmt_meanstd(fetch("global"), spec),
        fmt_meanstd(fetch("local"), spec)
    );
    if report
        .models
        .values()
        .any(|r| r.cross_validation_stats_mm.is_some())
    {
        println!(
            "{:<28} {:>16} {:>16}",
            "cross-val mean/median mm",
            fmt_meanstd(fetch("global"), cv),
            fmt_meanstd(fetch("local"), cv)
        );
    }
}
