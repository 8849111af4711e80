//! Model-quality and fit-quality measures, plus the cross-validation harness.
//!
//! Model quality is the usual triad:
//!
//! * compactness — cumulative variance fraction C(d) over the full spectrum;
//!   identically 1 for the local model, which retains every direction;
//! * generalization — leave-one-out reconstruction error of held-out shapes,
//!   mean corresponding-vertex distance in mm;
//! * specificity — mean distance from random model samples to the nearest
//!   training shape, sampled from the learned per-mode Gaussians.
//!
//! Fit quality against a scan is measured by per-vertex nearest-neighbor
//! surface distance (a lower bound on true error, since correspondence is
//! unknown) and by per-label landmark distance where ground-truth landmarks
//! exist. [`cross_validate_10fold`] ties both halves together: train on nine
//! folds, fit every held-out shape as a point cloud, and pool the
//! corresponding-vertex errors into a cumulative curve at 0.1 mm steps.

mod crossval;
mod distance;
mod measures;
mod report;

pub use crossval::{cross_validate_10fold, CrossValidation, CvModel};
pub use distance::{cumulative_error_curve, landmark_distance, surface_distance, SummaryStats};
pub use measures::{
    compactness_curve, generalization_global, generalization_local, specificity_global,
    specificity_local, MeanStd,
};
pub use report::{write_curve_csv, CurvePoint, EvaluationReport};
