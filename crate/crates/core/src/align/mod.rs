//! Similarity alignment and generalized Procrustes analysis.
//!
//! [`align_corresponding`] solves the least-squares similarity transform
//! between corresponded point lists in closed form (cross-covariance SVD
//! with determinant correction, so the rotation is always proper).
//! [`gpa`] iterates align-to-mean / recompute-mean until the mean stops
//! moving, then fixes the gauge: the mean has its centroid at the origin
//! and unit centroid RMS. Model space is therefore dimensionless; fitters
//! carry millimeters back and forth through the initial alignment.

mod gpa;
mod similarity;

pub use gpa::{gpa, GpaResult};
pub use similarity::{align_corresponding, SimilarityTransform};
