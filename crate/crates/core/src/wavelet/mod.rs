//! Subdivision hierarchy and the biorthogonal lifting wavelet transform on
//! quad grids.
//!
//! A [`SubdivisionHierarchy`] is a base grid refined `levels` times; each
//! refinement doubles both grid spans (`rows -> 2*rows - 1`). The lifting
//! transform splits every refinement into even (coarse) and odd (new)
//! vertices, predicts odds from evens with the linear B-spline stencil
//! (2-point edge mean, 4-point face mean), stores the prediction residuals
//! as detail coefficients, and smooths the evens with half the mean of
//! their incident details. Both directions are O(n) and exact inverses of
//! each other by construction.
//!
//! Coefficient order is frozen (it is part of the model file format):
//! scaling coefficients of the base grid first (row-major), then detail
//! levels 1..=J, row-major over each level's odd grid positions.

mod hierarchy;
mod lifting;
mod matrix;
mod resample;

pub use hierarchy::{CoefficientKind, SubdivisionHierarchy};
pub use lifting::{forward, forward_mesh, inverse, inverse_mesh, WaveletCoefficients};
pub use matrix::{dense_matrix, scalar_basis_column};
pub use resample::{resample_to_grid, CORNER_LABELS};
