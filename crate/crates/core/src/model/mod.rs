//! Linear statistical shape models.
//!
//! Both families share the generator form `F(s) = mean + Phi * s`:
//!
//! * [`GlobalPcaModel`]: `Phi` holds the top eigenvectors of the training
//!   covariance `(1/T) * sum (F_i - mean)(F_i - mean)^T`. Compact but every
//!   basis vector has global support.
//! * [`LocalWaveletModel`]: shapes are wavelet-transformed; each of the n
//!   coefficients gets its own 3x3 PCA `s_k = mean_k + U_k r_k`. The
//!   combined basis (inverse transform times the block-diagonal `U`) is
//!   square and full rank, and every column inherits the wavelet's spatial
//!   locality.
//!
//! Training requires a Procrustes-aligned [`TrainingSet`]; models remember
//! everything needed to generate, project, and serialize themselves.

mod global;
mod io;
mod local;
mod params;
mod training;

pub use global::{train_global, GlobalPcaModel};
pub use io::{load_model, save_model, TrainedModel};
pub use local::{train_local, LocalWaveletModel};
pub use params::ShapeParameters;
pub use training::TrainingSet;

use crate::error::Result;
use nalgebra::Point3;

/// Shared model surface: generation, projection, and the per-parameter
/// standard deviations that drive hyper-box bounds and specificity
/// sampling.
pub trait ShapeModel {
    fn vertex_count(&self) -> usize;
    fn mean(&self) -> &[Point3<f64>];
    /// Number of scalar parameters (d for global, 3n for local).
    fn parameter_count(&self) -> usize;
    /// Per-parameter standard deviation, in [`ShapeParameters`] order.
    fn sigmas(&self) -> &[f64];
    fn zero_parameters(&self) -> ShapeParameters;
    fn generate(&self, params: &ShapeParameters) -> Result<Vec<Point3<f64>>>;
    fn project(&self, shape: &[Point3<f64>]) -> Result<ShapeParameters>;

    /// Convenience: generate(project(shape)).
    fn reconstruct(&self, shape: &[Point3<f64>]) -> Result<Vec<Point3<f64>>> {
        self.generate(&self.project(shape)?)
    }
}
