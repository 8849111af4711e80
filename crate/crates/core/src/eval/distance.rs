use nalgebra::Point3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{LandmarkSet, NearestNeighborIndex, PointCloud};

/// Mean / median / population-stddev / max of a set of distances, in mm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SummaryStats {
    pub mean: f64,
    pub median: f64,
    pub stddev: f64,
    pub max: f64,
}

impl SummaryStats {
    pub fn of(values: &[f64]) -> Result<SummaryStats> {
        if values.is_empty() {
            return Err(Error::InvalidArgument(
                "summary statistics require at least one value".into(),
            ));
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        let mut sorted = values.to_vec();
        sorted.sort_by(|a, b| a.total_cmp(b));
        let mid = sorted.len() / 2;
        let median = if sorted.len() % 2 == 1 {
            sorted[mid]
        } else {
            0.5 * (sorted[mid - 1] + sorted[mid])
        };
        Ok(SummaryStats {
            mean,
            median,
            stddev: var.sqrt(),
            max: sorted[sorted.len() - 1],
        })
    }
}

/// Distance from every fitted vertex to its nearest target point, in mm.
/// A lower bound on the true fitting error: correspondence on the scan is
/// unknown, and the nearest point is at most as far as the correct one.
pub fn surface_distance(fit: &[Point3<f64>], target: &PointCloud) -> Result<Vec<f64>> {
    let tree = NearestNeighborIndex::build(target)?;
    Ok(fit
        .iter()
        .map(|v| tree.nearest_squared(v).1.sqrt())
        .collect())
}

/// Euclidean distance per landmark label between fitted vertex positions and
/// ground-truth target landmarks. `model_landmarks` pins each label to a
/// model vertex id; only labels with a known position in `target` are
/// evaluated. Results come back in `model_landmarks` order.
pub fn landmark_distance(
    fit: &[Point3<f64>],
    model_landmarks: &[(String, usize)],
    target: &LandmarkSet,
) -> Result<Vec<(String, f64)>> {
    let mut out = Vec::new();
    for (label, id) in model_landmarks {
        if *id >= fit.len() {
            return Err(Error::InvalidArgument(format!(
                "landmark '{label}' points at vertex {id}, but the fit has {} vertices",
                fit.len()
            )));
        }
        if let Some(p) = target.get(label) {
            out.push((label.clone(), (fit[*id] - p).norm()));
        }
    }
    if out.is_empty() {
        return Err(Error::InvalidArgument(
            "no landmark label is present in both the model and the target".into(),
        ));
    }
    Ok(out)
}

/// Fraction of errors at or below each threshold, thresholds stepping by
/// `step_mm` from zero until the curve reaches 1. Non-decreasing and always
/// ends at exactly 1.0.
pub fn cumulative_error_curve(errors: &[f64], step_mm: f64) -> Result<Vec<(f64, f64)>> {
    if errors.is_empty() {
        return Err(Error::InvalidArgument(
            "cumulative error curve requires at least one error value".into(),
        ));
    }
    if !step_mm.is_finite() || step_mm <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "curve step must be positive and finite, got {step_mm}"
        )));
    }
    let mut sorted = errors.to_vec();
    sorted.sort_by(|a, b| a.total_cmp(b));
    let n = sorted.len() as f64;
    let mut curve = Vec::new();
    let mut k = 0usize; // sorted[..k] <= current threshold
    for step in 0.. {
        let t = step as f64 * step_mm;
        while k < sorted.len() && sorted[k] <= t {
            k += 1;
        }
        curve.push((t, k as f64 / n));
        if k == sorted.len() {
            break;
        }
    }
    Ok(curve)
}
