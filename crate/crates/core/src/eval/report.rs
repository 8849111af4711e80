use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::eval::distance::SummaryStats;
use crate::eval::measures::MeanStd;

/// One sample of a cumulative error curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub threshold_mm: f64,
    pub fraction: f64,
}

impl CurvePoint {
    pub fn from_pairs(pairs: &[(f64, f64)]) -> Vec<CurvePoint> {
        pairs
            .iter()
            .map(|&(threshold_mm, fraction)| CurvePoint {
                threshold_mm,
                fraction,
            })
            .collect()
    }
}

/// Machine-readable evaluation output. Every quantity is in mm. Measures
/// that need a fit, ground-truth landmarks, or a cross-validation run stay
/// absent when not computed.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct EvaluationReport {
    /// C(d) for d = 1..=T-1. Identically 1 for the local model.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub compactness_curve: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub generalization_mm: Option<MeanStd>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub specificity_mm: Option<MeanStd>,
    /// Per-vertex nearest-neighbor distance of a fit against its scan.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub per_vertex_error_mm: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub surface_error_stats_mm: Option<SummaryStats>,
    /// Landmark label -> distance; sorted by label for stable output.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub landmark_errors_mm: Option<BTreeMap<String, f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cumulative_error_curve: Option<Vec<CurvePoint>>,
    /// Mean corresponding-vertex error per held-out cross-validation fit.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cross_validation_per_shape_mm: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cross_validation_stats_mm: Option<SummaryStats>,
}

/// Write a curve as two-column CSV: `threshold_mm,fraction`.
pub fn write_curve_csv(path: &Path, curve: &[CurvePoint]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "threshold_mm,fraction")?;
    for p in curve {
        writeln!(w, "{},{}", p.threshold_mm, p.fraction)?;
    }
    w.flush()?;
    Ok(())
}
