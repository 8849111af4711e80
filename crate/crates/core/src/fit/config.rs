use nalgebra::Point3;

use crate::align::SimilarityTransform;
use crate::error::{Error, Result};
use crate::model::ShapeParameters;

/// Fitting hyperparameters. Defaults suit millimeter-scale surface scans.
#[derive(Debug, Clone)]
pub struct FitConfig {
    /// Truncation distance of the robust energy, in target-frame units.
    pub tau: f64,
    /// Hyper-box half-width in per-parameter standard deviations.
    pub c: f64,
    /// Outer correspondence iterations (global fits only).
    pub max_iterations: usize,
    /// Lattice samples per parameter component (local fits only).
    pub samples_per_parameter: usize,
    /// Deepest detail level swept by local fits; `None` sweeps every level.
    pub max_level: Option<usize>,
    /// Global fits stop once an outer iteration improves the energy by less
    /// than `tolerance * max(1, E)`.
    pub tolerance: f64,
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig {
            tau: 10.0,
            c: 1.0,
            max_iterations: 200,
            samples_per_parameter: 64,
            max_level: None,
            tolerance: 1e-8,
        }
    }
}

impl FitConfig {
    pub fn validate(&self) -> Result<()> {
        if !self.tau.is_finite() || self.tau <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "tau must be positive and finite, got {}",
                self.tau
            )));
        }
        if !self.c.is_finite() || self.c < 0.0 {
            return Err(Error::InvalidArgument(format!(
                "c must be nonnegative and finite, got {}",
                self.c
            )));
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidArgument(
                "max_iterations must be at least 1".into(),
            ));
        }
        if self.samples_per_parameter < 2 {
            return Err(Error::InvalidArgument(format!(
                "samples_per_parameter must be at least 2, got {}",
                self.samples_per_parameter
            )));
        }
        if !self.tolerance.is_finite() || self.tolerance < 0.0 {
            return Err(Error::InvalidArgument(format!(
                "tolerance must be nonnegative and finite, got {}",
                self.tolerance
            )));
        }
        Ok(())
    }
}

/// Outcome of a fit.
#[derive(Debug, Clone)]
pub struct FitResult {
    pub parameters: ShapeParameters,
    /// The model-frame-to-target-frame transform the fit ran under.
    pub initial_transform: SimilarityTransform,
    /// Fitted model vertices, mapped back into the target frame.
    pub fitted: Vec<Point3<f64>>,
    /// True robust energy after the initial placement and after each outer
    /// step (global) or each swept parameter (local), in squared
    /// target-frame units. Nonincreasing by construction.
    pub energy_trace: Vec<f64>,
    /// Outer iterations run (global) or coefficients swept (local).
    pub iterations: usize,
    pub converged: bool,
    /// Nearest-neighbor queries spent against the target cloud.
    pub nn_queries: u64,
    /// Candidate energy evaluations. For local fits this is exactly
    /// `3 * coefficients_swept * samples_per_parameter`.
    pub energy_evaluations: u64,
    /// Wall-clock time spent inside the fitter.
    pub elapsed: std::time::Duration,
}

impl FitResult {
    pub fn final_energy(&self) -> f64 {
        *self
            .energy_trace
            .last()
            .expect("energy trace always holds the initial energy")
    }
}
